import json
import math
import threading
from http.server import BaseHTTPRequestHandler, HTTPServer

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from specmer.errors import VocabularyMismatchError
from specmer.lm import (
    NgramModel,
    RemoteModel,
    SamplerConfig,
    TableModel,
    parse_model_descriptor,
    sample,
    sequence_nll,
    validate_distribution,
    warp,
)
from specmer.rng import Rng
from specmer.vocab import Vocabulary, default_vocabulary, encode


@pytest.fixture(scope="module")
def vocab():
    return default_vocabulary()


# --- warp --------------------------------------------------------------------


def test_warp_identity(vocab):
    p = np.zeros(vocab.size)
    p[3] = 0.25
    p[4] = 0.75
    out = warp(p, SamplerConfig(temperature=1.0, top_p=1.0))
    assert np.array_equal(out, p)


def test_warp_nucleus_keeps_all_below_threshold():
    p = np.array([0.6, 0.3, 0.1])
    out = warp(p, SamplerConfig(temperature=1.0, top_p=0.95))
    assert np.allclose(out, p)


def test_warp_nucleus_truncates():
    p = np.array([0.6, 0.3, 0.1])
    out = warp(p, SamplerConfig(temperature=1.0, top_p=0.6))
    assert np.allclose(out, [1.0, 0.0, 0.0])


def test_warp_cold_temperature_splits_ties():
    p = np.array([0.5, 0.5, 0.0])
    out = warp(p, SamplerConfig(temperature=1e-6, top_p=1.0))
    assert np.allclose(out, [0.5, 0.5, 0.0])


def test_warp_nucleus_tie_break_by_id():
    p = np.array([0.25, 0.25, 0.25, 0.25])
    out = warp(p, SamplerConfig(temperature=1.0, top_p=0.5))
    assert np.allclose(out, [0.5, 0.5, 0.0, 0.0])


def test_warp_temperature_sharpens():
    p = np.array([0.7, 0.2, 0.1])
    cold = warp(p, SamplerConfig(temperature=0.5, top_p=1.0))
    hot = warp(p, SamplerConfig(temperature=2.0, top_p=1.0))
    assert cold[0] > p[0] > hot[0]
    validate_distribution(cold)
    validate_distribution(hot)


@settings(max_examples=50)
@given(
    st.lists(st.floats(0.001, 1.0), min_size=2, max_size=12),
    st.floats(0.05, 1.0),
    st.floats(0.1, 5.0),
)
def test_warp_properties(weights, top_p, temperature):
    p = np.array(weights) / np.sum(weights)
    out = warp(p, SamplerConfig(temperature=temperature, top_p=top_p))
    validate_distribution(out)
    assert set(np.flatnonzero(out)) <= set(np.flatnonzero(p))
    # truncation never removes the argmax of the distribution it truncates
    # (argmax after temperature; ties break toward the lower id, as argmax does)
    tempered = warp(p, SamplerConfig(temperature=temperature, top_p=1.0))
    assert out[int(np.argmax(tempered))] > 0


# --- sample --------------------------------------------------------------------


def test_sample_point_mass():
    p = np.zeros(10)
    p[7] = 1.0
    assert sample(p, Rng(0)) == 7


def test_sample_uniform_frequencies():
    p = np.full(4, 0.25)
    rng = Rng(123)
    n = 1_000_000
    counts = np.zeros(4)
    for _ in range(n):
        counts[sample(p, rng)] += 1
    sigma = math.sqrt(0.25 * 0.75 / n)
    assert np.all(np.abs(counts / n - 0.25) < 3 * sigma)


def test_sample_deterministic_under_seed():
    p = np.array([0.2, 0.3, 0.5])
    a = [sample(p, Rng(9)) for _ in range(20)]
    # fresh stream with the same seed replays the same draws
    rng = Rng(9)
    b = [sample(p, rng) for _ in range(20)]
    assert a[0] == b[0]
    assert [sample(p, Rng(9).split("x")) for _ in range(5)] == [
        sample(p, Rng(9).split("x")) for _ in range(5)
    ]


def test_sample_never_returns_zero_probability_token():
    p = np.array([0.0, 0.5, 0.0, 0.5, 0.0])
    rng = Rng(4)
    assert {sample(p, rng) for _ in range(200)} == {1, 3}


# --- n-gram model ----------------------------------------------------------------


def test_bigram_deterministic_transition(vocab):
    model = NgramModel.fit([encode("ACACAC", vocab)], order=2, vocab=vocab,
                           smoothing=0.0)
    dist = model.next_distribution(encode("CA", vocab))
    assert dist[vocab.id_of("C")] == 1.0


def test_bigram_laplace_formula(vocab):
    model = NgramModel.fit([encode("ACACAC", vocab)], order=2, vocab=vocab,
                           smoothing=1.0)
    dist = model.next_distribution(encode("A", vocab))
    # A -> C occurs 3 times out of 3 transitions from A
    expected_c = (3 + 1) / (3 + vocab.size)
    expected_other = (0 + 1) / (3 + vocab.size)
    assert dist[vocab.id_of("C")] == pytest.approx(expected_c)
    assert dist[vocab.id_of("W")] == pytest.approx(expected_other)


def test_ngram_positive_probabilities_with_smoothing(vocab):
    model = NgramModel.fit([encode("ACD", vocab)], order=3, vocab=vocab,
                           smoothing=0.5)
    for ctx in ([], encode("A", vocab), encode("WY", vocab)):
        dist = model.next_distribution(ctx)
        validate_distribution(dist)
        assert (dist > 0).all()


def test_ngram_unseen_history_uniform_fallback(vocab):
    model = NgramModel.fit([encode("ACAC", vocab)], order=2, vocab=vocab,
                           smoothing=0.0)
    dist = model.next_distribution(encode("W", vocab))
    assert np.allclose(dist, 1.0 / vocab.size)


def test_batch_matches_single(vocab):
    model = NgramModel.fit([encode("ACDEF", vocab)], order=2, vocab=vocab)
    contexts = [encode("A", vocab), encode("AC", vocab), encode("A", vocab)]
    batch = model.batch_next_distributions(contexts)
    assert model.batch_next_distributions([]) == []
    for ctx, dist in zip(contexts, batch):
        assert np.array_equal(dist, model.next_distribution(ctx))
    assert np.array_equal(batch[0], batch[2])


# --- table model -----------------------------------------------------------------


def test_uniform_table(vocab):
    model = TableModel.uniform(vocab)
    dist = model.next_distribution(encode("ACD", vocab))
    assert np.allclose(dist, 1.0 / vocab.size)


def test_table_window_lookup(vocab):
    a, c = vocab.id_of("A"), vocab.id_of("C")
    point_a = np.zeros(vocab.size)
    point_a[a] = 1.0
    point_c = np.zeros(vocab.size)
    point_c[c] = 1.0
    model = TableModel(vocab, window=1, table={(a,): point_c, (c,): point_a},
                       default=point_a)
    assert model.next_distribution([a])[c] == 1.0
    assert model.next_distribution([c])[a] == 1.0
    assert model.next_distribution([])[a] == 1.0


# --- nll -------------------------------------------------------------------------


def test_nll_uniform(vocab):
    model = TableModel.uniform(vocab)
    nll = sequence_nll(model, encode("ACDEF", vocab))
    assert nll == pytest.approx(math.log(24), abs=1e-12)


def test_nll_point_mass_chain(vocab):
    ids = encode("ACACA", vocab)
    model = NgramModel.fit([encode("ACACAC", vocab)], order=2, vocab=vocab,
                           smoothing=0.0)
    # chain is deterministic given the leading A
    assert sequence_nll(model, ids[1:], context=ids[:1]) == 0.0


def test_nll_bigram_deterministic(vocab):
    model = NgramModel.fit([encode("ACACAC", vocab)], order=2, vocab=vocab,
                           smoothing=0.0)
    assert sequence_nll(model, encode("CAC", vocab), context=encode("A", vocab)) == 0.0


def test_nll_infinite_on_zero_probability(vocab):
    model = NgramModel.fit([encode("ACAC", vocab)], order=2, vocab=vocab,
                           smoothing=0.0)
    assert sequence_nll(model, encode("AW", vocab)) == math.inf


def test_nll_ignores_pad_after_eos(vocab):
    model = NgramModel.fit([encode("ACAC", vocab)], order=2, vocab=vocab,
                           smoothing=0.5)
    ids = encode("ACA", vocab) + [vocab.eos_id]
    padded = ids + [vocab.pad_id, vocab.pad_id]
    assert sequence_nll(model, padded) == sequence_nll(model, ids)


# --- descriptors and remote --------------------------------------------------------


def test_parse_ngram_descriptor(tmp_path, vocab):
    fasta = tmp_path / "train.fasta"
    fasta.write_text(">a\nACAC\n>b\nAC-AC\n")
    model = parse_model_descriptor(f"ngram:order=2,train={fasta},lambda=0")
    assert model.order == 2
    assert model.next_distribution(encode("A", model.vocab))[model.vocab.id_of("C")] == 1.0


def test_parse_table_descriptor(tmp_path):
    path = tmp_path / "table.json"
    payload = {
        "vocab": ["<pad>", "<bos>", "<eos>", "A", "B"],
        "window": 0,
        "entries": [{"context": [], "probs": [0, 0, 0, 0.5, 0.5]}],
    }
    path.write_text(json.dumps(payload))
    model = parse_model_descriptor(f"table:{path}")
    assert model.next_distribution([])[3] == 0.5


class _StubHandler(BaseHTTPRequestHandler):
    vocab_symbols: list = []
    logits_row: list = []

    def log_message(self, *args):
        pass

    def do_GET(self):
        if self.path == "/v1/info":
            body = json.dumps(
                {"vocab": self.vocab_symbols, "model": "stub"}
            ).encode()
            self.send_response(200)
            self.send_header("Content-Type", "application/json")
            self.end_headers()
            self.wfile.write(body)
        else:
            self.send_response(404)
            self.end_headers()

    def do_POST(self):
        length = int(self.headers.get("Content-Length", 0))
        request = json.loads(self.rfile.read(length))
        rows = [list(self.logits_row) for _ in request["contexts"]]
        # tag each row so batch order is observable
        for i, row in enumerate(rows):
            row[i % len(row)] += float(i)
        body = json.dumps({"logits": rows}).encode()
        self.send_response(200)
        self.send_header("Content-Type", "application/json")
        self.end_headers()
        self.wfile.write(body)


@pytest.fixture()
def stub_server(vocab):
    _StubHandler.vocab_symbols = vocab.manifest()
    _StubHandler.logits_row = [0.0] * vocab.size
    server = HTTPServer(("127.0.0.1", 0), _StubHandler)
    thread = threading.Thread(target=server.serve_forever, daemon=True)
    thread.start()
    yield f"http://127.0.0.1:{server.server_port}"
    server.shutdown()
    thread.join()


def test_remote_softmax_and_order(stub_server, vocab):
    model = RemoteModel(stub_server, "stub", vocab=vocab)
    contexts = [[3], [4], [5]]
    batch = model.batch_next_distributions(contexts)
    assert len(batch) == 3
    for i, dist in enumerate(batch):
        validate_distribution(dist)
        # row i carries a logit bump of size i at position i
        logits = np.zeros(vocab.size)
        logits[i % vocab.size] += float(i)
        soft = np.exp(logits - logits.max())
        soft /= soft.sum()
        assert np.allclose(dist, soft)


def test_remote_vocab_mismatch(stub_server):
    wrong = Vocabulary.from_residues("AB")
    with pytest.raises(VocabularyMismatchError):
        RemoteModel(stub_server, "stub", vocab=wrong)


def test_remote_timeout_env(monkeypatch):
    from specmer.lm import _remote_timeout_s

    monkeypatch.delenv("SPECMER_REMOTE_TIMEOUT_MS", raising=False)
    assert _remote_timeout_s() == 30.0
    monkeypatch.setenv("SPECMER_REMOTE_TIMEOUT_MS", "1500")
    assert _remote_timeout_s() == 1.5
    monkeypatch.setenv("SPECMER_REMOTE_TIMEOUT_MS", "junk")
    assert _remote_timeout_s() == 30.0
