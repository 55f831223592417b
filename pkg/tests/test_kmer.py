from fractions import Fraction

import pytest

from specmer.errors import CorruptIndexError, VersionMismatchError
from specmer.kmer import (
    KmerIndex,
    build_index,
    load_index,
    save_index,
    score,
    select_best,
)
from specmer.msa import parse_fasta
from specmer.vocab import default_vocabulary, encode


@pytest.fixture(scope="module")
def vocab():
    return default_vocabulary()


@pytest.fixture()
def aca_index(vocab):
    # Both rows ungap to "ACA": 6 single positions (A:4, C:2), two "ACA" 3-mers.
    msa = parse_fasta(">s1\nACA\n>s2\nAC-A\n")
    return build_index(msa, {1, 3}, vocab)


def test_build_counts_k1(aca_index, vocab):
    a, c = vocab.id_of("A"), vocab.id_of("C")
    assert aca_index.counts[1] == {(a,): 4, (c,): 2}
    assert aca_index.totals[1] == 6
    assert aca_index.probability(1, (a,)) == Fraction(2, 3)
    assert aca_index.probability(1, (c,)) == Fraction(1, 3)


def test_build_counts_k3(aca_index, vocab):
    window = tuple(encode("ACA", vocab))
    assert aca_index.counts[3] == {window: 2}
    assert aca_index.probability(3, window) == Fraction(1)


def test_default_k_sweep_accepted(vocab):
    msa = parse_fasta(">s\nACDEFGHIK\n")
    index = build_index(msa, {1, 3, 5}, vocab)
    assert index.k_values == (1, 3, 5)
    assert not index.empty_k


def test_short_rows_flagged_not_raised(vocab):
    msa = parse_fasta(">s\nAC\n")
    index = build_index(msa, {1, 5}, vocab)
    assert index.empty_k == (5,)
    assert index.totals[5] == 0
    assert score(encode("AC", vocab), [], index).per_k[5] == 0.0


def test_k_cap_and_warning(vocab):
    msa = parse_fasta(">s\nACDEFGHIKL\n")
    with pytest.raises(ValueError):
        build_index(msa, {8}, vocab)
    with pytest.warns(UserWarning):
        build_index(msa, {6}, vocab)


def test_score_candidate_ac(aca_index, vocab):
    one_k = build_index(parse_fasta(">1\nACA\n>2\nACA\n"), {1}, vocab)
    result = score(encode("AC", vocab), [], one_k)
    assert result.exact == Fraction(1, 2)
    assert result.value == 0.5


def test_score_unseen_is_zero(aca_index, vocab):
    assert score(encode("WW", vocab), [], aca_index).value == 0.0


def test_score_boundary_window(vocab):
    index = build_index(parse_fasta(">1\nACA\n>2\nACA\n"), {3}, vocab)
    result = score(encode("CA", vocab), encode("A", vocab), index)
    assert result.exact == Fraction(1, 2)


def test_score_boundary_windows_off(vocab):
    index = build_index(parse_fasta(">1\nACA\n>2\nACA\n"), {3}, vocab)
    result = score(encode("CA", vocab), encode("A", vocab), index,
                   boundary_windows=False)
    assert result.value == 0.0


def test_score_specials_zero_window(aca_index, vocab):
    with_eos = encode("AC", vocab) + [vocab.eos_id]
    plain = score(encode("AC", vocab), [], aca_index)
    scored = score(with_eos, [], aca_index)
    # eos extends L to 3 but adds no window mass
    assert scored.exact == plain.exact * Fraction(2, 3)


def test_score_additive_over_k(vocab):
    msa = parse_fasta(">s1\nACA\n>s2\nAC-A\n")
    candidate = encode("ACA", vocab)
    both = score(candidate, [], build_index(msa, {1, 3}, vocab))
    only_1 = score(candidate, [], build_index(msa, {1}, vocab))
    only_3 = score(candidate, [], build_index(msa, {3}, vocab))
    assert both.exact == only_1.exact + only_3.exact
    assert both.per_k[1] == only_1.per_k[1]
    assert both.per_k[3] == only_3.per_k[3]


def test_score_bounds(aca_index, vocab):
    candidate = encode("ACAC", vocab)
    tail = encode("AC", vocab)
    result = score(candidate, tail, aca_index)
    span = len(tail) + len(candidate)
    bound = sum(
        Fraction(span - k + 1, len(candidate)) for k in aca_index.k_values
    )
    assert 0 <= result.exact <= bound


def test_select_best_single_candidate(aca_index, vocab):
    idx, _ = select_best([encode("AC", vocab)], [], aca_index)
    assert idx == 0


def test_select_best_prefers_high_score(vocab):
    index = build_index(parse_fasta(">1\nACA\n>2\nACA\n"), {1}, vocab)
    candidates = [encode("AC", vocab), encode("CC", vocab)]
    idx, best = select_best(candidates, [], index)
    assert idx == 0
    assert best.exact == Fraction(1, 2)
    assert score(candidates[1], [], index).exact == Fraction(1, 3)


def test_select_best_tie_breaks_low_index(aca_index, vocab):
    cand = encode("ACA", vocab)
    idx, _ = select_best([cand, list(cand), list(cand)], [], aca_index)
    assert idx == 0


def test_scale_invariance_of_selection(vocab):
    index = build_index(parse_fasta(">1\nACAD\n>2\nACAD\n"), {1}, vocab)
    scaled = KmerIndex(
        k_values=index.k_values,
        counts={1: {w: c * 7 for w, c in index.counts[1].items()}},
        totals={1: index.totals[1] * 7},
        vocab=vocab,
    )
    candidates = [encode(s, vocab) for s in ("AC", "CD", "DD", "AA")]
    assert (
        select_best(candidates, [], index)[0]
        == select_best(candidates, [], scaled)[0]
    )


def test_merge_additivity(vocab):
    msa_a = parse_fasta(">1\nACAD\n>2\nDCA\n")
    msa_b = parse_fasta(">3\nAACC\n")
    merged = parse_fasta(">1\nACAD\n>2\nDCA\n>3\nAACC\n")
    ia = build_index(msa_a, {1, 2}, vocab)
    ib = build_index(msa_b, {1, 2}, vocab)
    im = build_index(merged, {1, 2}, vocab)
    for k in (1, 2):
        summed = dict(ia.counts[k])
        for window, count in ib.counts[k].items():
            summed[window] = summed.get(window, 0) + count
        assert summed == im.counts[k]
        assert ia.totals[k] + ib.totals[k] == im.totals[k]


def test_save_load_round_trip(tmp_path, aca_index):
    path = tmp_path / "index.json"
    save_index(aca_index, path)
    loaded = load_index(path)
    assert loaded.counts == aca_index.counts
    assert loaded.totals == aca_index.totals
    assert loaded.k_values == aca_index.k_values
    assert loaded.vocab.manifest() == aca_index.vocab.manifest()


def test_load_version_mismatch(tmp_path, aca_index):
    path = tmp_path / "index.json"
    save_index(aca_index, path)
    text = path.read_text().replace("kmer-index/1", "kmer-index/99")
    path.write_text(text)
    with pytest.raises(VersionMismatchError):
        load_index(path)


def test_load_checksum_failure(tmp_path, aca_index):
    path = tmp_path / "index.json"
    save_index(aca_index, path)
    text = path.read_text().replace('"count": 4', '"count": 5')
    path.write_text(text)
    with pytest.raises(CorruptIndexError):
        load_index(path)


def test_large_round_trip_totals(tmp_path, vocab):
    rows = "".join(
        f">r{i}\n{'ACDEFGHIKLMNPQRSTVWY'[i % 17: i % 17 + 4]}-{'WYV'[i % 3]}\n"
        for i in range(1000)
    )
    index = build_index(parse_fasta(rows), {1, 3}, vocab)
    path = tmp_path / "big.json"
    save_index(index, path)
    loaded = load_index(path)
    for k in (1, 3):
        assert loaded.totals[k] == sum(loaded.counts[k].values())
        assert loaded.totals[k] == index.totals[k]
