import math

import numpy as np
import pytest

from specmer.analysis import (
    SpeedupParams,
    batch_acceptance,
    bootstrap_means,
    cost_coefficient,
    diversity,
    estimate_misranking,
    expected_speedup,
    expected_speedup_batch,
    expected_speedup_serial,
    hamming_distance,
    library_stats,
    simulate_speedup,
    _top_n_mean,
)
from specmer.decode import DecodeConfig, DecodeTrace, GenerationResult, IterationRecord
from specmer.decode import speculative_generate
from specmer.errors import InsufficientDataError
from specmer.lm import NgramModel
from specmer.rng import Rng
from specmer.vocab import Vocabulary, encode


@pytest.fixture(scope="module")
def vocab():
    return Vocabulary.from_residues("ABCD")


# --- speedup formulas -----------------------------------------------------------


def test_speedup_alpha_zero_collapse():
    params = SpeedupParams(alpha=0.0, gamma=5, cost_coeff=0.425)
    assert expected_speedup(params) == pytest.approx(1 / (5 * 0.425 + 1), abs=1e-15)
    batch = SpeedupParams(alpha=0.0, gamma=5, cost_coeff=0.5)
    assert expected_speedup_batch(batch) == pytest.approx(1 / 1.5, abs=1e-15)


def test_speedup_reference_point():
    params = SpeedupParams(alpha=0.8, gamma=5, cost_coeff=0.425)
    expected = (1 - 0.8**6) / (0.2 * (5 * 0.425 + 1))
    assert expected_speedup(params) == pytest.approx(expected, abs=1e-15)
    assert expected_speedup(params) == pytest.approx(1.1806, abs=5e-5)


def test_speedup_alpha_one_limit():
    params = SpeedupParams(alpha=1.0, gamma=5, cost_coeff=0.425)
    assert expected_speedup(params) == pytest.approx(6 / 3.125, abs=1e-15)


def test_speedup_batch_reference_point():
    params = SpeedupParams(alpha=0.9, gamma=10, cost_coeff=0.5)
    expected = (1 - 0.9**11) / (0.1 * 1.5)
    assert expected_speedup_batch(params) == pytest.approx(expected, abs=1e-12)
    assert expected_speedup_batch(params) == pytest.approx(4.5746, abs=5e-4)


def test_speedup_serial_reference_point():
    params = SpeedupParams(alpha=0.8, gamma=5, candidates=5, batch_cost=1.25,
                           cost_coeff=0.425)
    expected = (1 - 0.8**6) / (0.2 * (4 * 0.425 + 1))
    assert expected_speedup_serial(params) == pytest.approx(expected, abs=1e-12)
    assert expected_speedup_serial(params) == pytest.approx(1.3664, abs=5e-4)


def test_speedup_serial_cancellation_identities():
    # xi = c makes the serial factor cancel
    params = SpeedupParams(alpha=0.6, gamma=7, candidates=3, batch_cost=3.0,
                           cost_coeff=0.7)
    assert expected_speedup_serial(params) == pytest.approx(
        expected_speedup_batch(params), abs=1e-15
    )
    # c=1, xi=1 is the degenerate batch
    single = SpeedupParams(alpha=0.6, gamma=7, candidates=1, batch_cost=1.0,
                           cost_coeff=0.7)
    assert expected_speedup_serial(single) == pytest.approx(
        expected_speedup_batch(single), abs=1e-15
    )


def test_speedup_gamma_one_closed_form():
    for alpha in (0.0, 0.3, 0.9):
        params = SpeedupParams(alpha=alpha, gamma=1, cost_coeff=0.425)
        assert expected_speedup(params) == pytest.approx(
            (1 + alpha) / (0.425 + 1), abs=1e-12
        )


def test_speedup_monotone_in_alpha():
    values = [
        expected_speedup(SpeedupParams(alpha=a, gamma=5, cost_coeff=0.425))
        for a in np.linspace(0, 0.99, 25)
    ]
    assert all(b > a for a, b in zip(values, values[1:]))


def test_cost_coefficient_modes():
    # draft/target rates 74.11 and 31.48 tokens/sec invert to this ratio
    assert cost_coefficient("vanilla", m_p=1 / 74.11, m_q=1 / 31.48) == pytest.approx(
        31.48 / 74.11
    )
    assert cost_coefficient("batch", m_p=2.0, m_q=4.0, m_k=0.4,
                            batch_cost=1.2) == pytest.approx((2.4 + 0.4) / 4.0)
    assert cost_coefficient("serial", m_p=2.0, m_q=4.0, m_k=0.4,
                            candidates=3) == pytest.approx(6.4 / 4.0)
    # xi = 1 reduces the batched draft phase to a single-candidate draft
    assert cost_coefficient("batch", m_p=2.0, m_q=4.0) == cost_coefficient(
        "vanilla", m_p=2.0, m_q=4.0
    )


def test_batch_acceptance_values():
    assert batch_acceptance(0.37, 1, 0.0) == pytest.approx(0.37)
    assert batch_acceptance(0.5, 2, 0.0) == pytest.approx(0.75)
    assert batch_acceptance(0.5, 2, 0.1) == pytest.approx(0.65)
    values = [batch_acceptance(0.3, m, 0.05) for m in (1, 2, 3, 5, 8)]
    assert all(b > a for a, b in zip(values, values[1:]))


def test_simulation_tracks_formulas():
    rng = Rng(0)
    for alpha, gamma, ce in [(0.5, 5, 0.425), (0.8, 10, 0.2), (0.2, 3, 0.9)]:
        params = SpeedupParams(alpha=alpha, gamma=gamma, cost_coeff=ce,
                               candidates=3, batch_cost=1.2)
        sim = simulate_speedup(params, "vanilla", 40_000, rng.split("v", alpha))
        assert sim == pytest.approx(expected_speedup(params), rel=0.03)
        sim_b = simulate_speedup(params, "batch", 40_000, rng.split("b", alpha))
        assert sim_b == pytest.approx(expected_speedup_batch(params), rel=0.03)
        sim_s = simulate_speedup(params, "serial", 40_000, rng.split("s", alpha))
        assert sim_s == pytest.approx(expected_speedup_serial(params), rel=0.03)


# --- library stats ---------------------------------------------------------------


def test_top_n_mean_arithmetic():
    assert _top_n_mean([5.0, 3.0, 1.0, 4.0, 2.0], 5) == pytest.approx(3.0)
    assert _top_n_mean([5.0, 3.0, 1.0], 2) == pytest.approx(2.0)
    assert _top_n_mean([5.0], 20) == pytest.approx(5.0)


def _library(vocab, n, seed=0, max_len=16):
    rows = [encode("ABCDABCD", vocab), encode("AABBAABB", vocab)]
    draft = NgramModel.fit(rows, order=1, vocab=vocab, smoothing=0.4)
    target = NgramModel.fit(rows, order=2, vocab=vocab, smoothing=0.2)
    cfg = DecodeConfig(context=tuple(encode("A", vocab)), max_len=max_len,
                       draft_len=3, seed=seed)
    results = [
        speculative_generate(draft, target, cfg, Rng(seed).split("sequence", i))
        for i in range(n)
    ]
    return results, target


def test_library_stats_single_sequence(vocab):
    results, target = _library(vocab, 1)
    stats = library_stats(results, target)
    assert stats.mean_nll == stats.top20_nll == stats.top5_nll
    assert stats.top_clipped


def test_library_stats_ordering_and_alpha(vocab):
    results, target = _library(vocab, 30)
    stats = library_stats(results, target)
    assert stats.top5_nll <= stats.top20_nll <= stats.mean_nll
    accepted = sum(r.trace.accepted for r in results)
    rejected = sum(r.trace.rejected for r in results)
    assert stats.accept_ratio == pytest.approx(accepted / (accepted + rejected))
    assert 0 <= stats.accept_ratio <= 1
    assert stats.tokens_per_second is None or stats.tokens_per_second > 0


# --- misranking ------------------------------------------------------------------


def _fake_trace(first_flags):
    trace = DecodeTrace()
    for flag in first_flags:
        trace.iterations.append(
            IterationRecord(drafted=[3], chosen_index=0, scores=None,
                            accepted_flags=[bool(flag)], correction=None,
                            bonus=None)
        )
        trace.accepted += int(flag)
        trace.rejected += int(not flag)
    return trace


def test_misranking_insufficient_data():
    with pytest.raises(InsufficientDataError):
        estimate_misranking([_fake_trace([1, 0])], [_fake_trace([1])], m=2)


def test_misranking_constant_scorer_m1_reduction():
    gen = Rng(3).generator
    flags_a = gen.random(4000) < 0.6
    flags_b = gen.random(4000) < 0.6
    est = estimate_misranking([_fake_trace(flags_a)], [_fake_trace(flags_b)], m=1)
    assert est.alpha == pytest.approx(0.6, abs=0.03)
    # with m=1 the law reduces to alpha, so epsilon is pure noise around 0
    assert abs(est.epsilon) <= 3 * np.std(
        [est.epsilon_ci[1] - est.epsilon, est.epsilon - est.epsilon_ci[0]]
    ) + 0.05
    assert est.epsilon_ci[0] <= est.epsilon <= est.epsilon_ci[1]


def test_misranking_known_epsilon():
    gen = Rng(9).generator
    alpha = 0.5
    m = 2
    n = 20_000
    flags_v = gen.random(n) < alpha
    # construct batch acceptance with a known epsilon of 0.25
    epsilon = 0.25
    target_rate = 1 - (1 - alpha) ** m - epsilon
    flags_s = gen.random(n) < target_rate
    est = estimate_misranking([_fake_trace(flags_v)], [_fake_trace(flags_s)], m=m)
    assert est.expected_accept == pytest.approx(target_rate, abs=0.02)
    assert est.epsilon == pytest.approx(epsilon, abs=0.02)
    assert not est.out_of_range


# --- diversity -------------------------------------------------------------------


def test_hamming_distance_rules():
    assert hamming_distance([1, 2, 3], [1, 2, 3]) == 0
    assert hamming_distance([1, 2, 3, 4], [1, 2, 3, 5]) == 1
    assert hamming_distance([1, 2, 3, 4], [1, 2]) == 2
    assert hamming_distance([], [1, 2]) == 2


def _result_from_ids(ids, context_len=0):
    return GenerationResult(sequence=list(ids), context_len=context_len,
                            trace=DecodeTrace())


def test_diversity_identical_library(vocab):
    wt = encode("ABCD", vocab)
    results = [_result_from_ids(wt) for _ in range(4)]
    report = diversity(results, wt, vocab.eos_id)
    assert report["wt_hamming"]["mean"] == 0.0
    assert report["inter_seq_hamming"]["mean"] == 0.0


def test_diversity_single_edit(vocab):
    a = encode("AAAA", vocab)
    b = encode("AAAB", vocab)
    report = diversity([_result_from_ids(a), _result_from_ids(b)], a, vocab.eos_id)
    assert report["inter_seq_hamming"]["mean"] == 1.0
    assert report["wt_hamming"]["mean"] == 0.5


def test_diversity_uniform_concentration(vocab):
    length = 40
    n = 300
    residues = list(vocab.residue_ids())
    gen = Rng(8).generator
    wt = [residues[0]] * length
    results = [
        _result_from_ids([residues[int(t)] for t in gen.integers(0, 4, length)])
        for _ in range(n)
    ]
    report = diversity(results, wt, vocab.eos_id, seed=1)
    expected = length * (1 - 1 / len(residues))
    sd = math.sqrt(length * 0.75 * 0.25)
    assert abs(report["wt_hamming"]["mean"] - expected) < 4 * sd / math.sqrt(n)


def test_diversity_subsampling_deterministic(vocab):
    gen = Rng(12).generator
    residues = list(vocab.residue_ids())
    results = [
        _result_from_ids([residues[int(t)] for t in gen.integers(0, 4, 10)])
        for _ in range(200)
    ]
    wt = [residues[0]] * 10
    a = diversity(results, wt, vocab.eos_id, max_pairs=100, seed=5)
    b = diversity(results, wt, vocab.eos_id, max_pairs=100, seed=5)
    assert a == b
    assert a["inter_seq_hamming"]["n"] == 100


def test_bootstrap_means_deterministic():
    values = [1.0, 2.0, 3.0, 4.0]
    a = bootstrap_means(values, 100, Rng(4))
    b = bootstrap_means(values, 100, Rng(4))
    assert np.array_equal(a, b)
    assert a.shape == (100,)
    assert 1.0 <= a.mean() <= 4.0
