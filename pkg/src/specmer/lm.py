"""Autoregressive model abstraction and sampling transforms.

Draft and target models expose one operation: the next-token distribution
given a context. Three families are provided: Laplace-smoothed n-gram
models (the desk-scale stand-ins for neural draft/target pairs), explicit
conditional tables (for forced test scenarios), and a client for a remote
logits server speaking the HTTP wire protocol.

All sampling noise comes from explicit ``Rng`` streams; temperature and
nucleus truncation are applied by ``warp`` before any draw.
"""

from __future__ import annotations

import math
import os
from dataclasses import dataclass

import numpy as np

from .errors import (
    DegenerateDistributionError,
    RemoteProtocolError,
    RemoteUnavailableError,
    VocabularyMismatchError,
)
from .msa import load_fasta, ungap
from .rng import Rng
from .vocab import Vocabulary, default_vocabulary

__all__ = [
    "SamplerConfig",
    "Model",
    "NgramModel",
    "TableModel",
    "RemoteModel",
    "warp",
    "sample",
    "sequence_nll",
    "validate_distribution",
    "ensure_shared_vocab",
    "parse_model_descriptor",
]

DEFAULT_REMOTE_TIMEOUT_MS = 30_000


@dataclass(frozen=True)
class SamplerConfig:
    """Temperature plus nucleus mass; defaults follow the standard setup."""

    temperature: float = 1.0
    top_p: float = 0.95

    def __post_init__(self):
        if self.temperature <= 0:
            raise ValueError("temperature must be > 0")
        if not 0 < self.top_p <= 1:
            raise ValueError("top_p must be in (0, 1]")


def validate_distribution(probs, atol: float = 1e-9) -> np.ndarray:
    p = np.asarray(probs, dtype=np.float64)
    if p.ndim != 1:
        raise ValueError("distribution must be a 1-d vector")
    if (p < 0).any():
        raise ValueError("distribution has negative entries")
    if abs(float(p.sum()) - 1.0) > atol:
        raise ValueError(f"distribution sums to {p.sum()!r}, not 1")
    return p


def _frozen(arr: np.ndarray) -> np.ndarray:
    arr.flags.writeable = False
    return arr


def warp(dist, cfg: SamplerConfig) -> np.ndarray:
    """Apply temperature (in log space) then nucleus truncation.

    Nucleus truncation keeps the smallest high-probability prefix whose
    mass reaches ``top_p``; ties at the threshold break toward ascending
    token id. With temperature 1 and top_p 1 this is the identity.
    """
    p = np.asarray(dist, dtype=np.float64)
    if cfg.temperature == 1.0 and cfg.top_p >= 1.0:
        return p

    if cfg.temperature != 1.0:
        with np.errstate(divide="ignore"):
            logits = np.log(p) / cfg.temperature
        peak = logits.max()
        if peak == -np.inf:
            raise DegenerateDistributionError("no positive mass to warp")
        q = np.exp(logits - peak)
        q /= q.sum()
    else:
        q = p.copy()

    if cfg.top_p < 1.0:
        # Descending probability, ascending id among equals.
        order = np.lexsort((np.arange(q.size), -q))
        cumulative = np.cumsum(q[order])
        cut = int(np.searchsorted(cumulative, cfg.top_p, side="left"))
        cut = min(cut, q.size - 1)
        kept = order[: cut + 1]
        truncated = np.zeros_like(q)
        truncated[kept] = q[kept]
        total = truncated.sum()
        if total <= 0:
            raise DegenerateDistributionError("nucleus truncation removed all mass")
        q = truncated / total

    return q


def sample(dist, rng: Rng) -> int:
    """Inverse-CDF draw over ascending token ids."""
    p = np.asarray(dist, dtype=np.float64)
    cumulative = np.cumsum(p)
    u = rng.random()
    idx = int(np.searchsorted(cumulative, u, side="right"))
    if idx >= p.size:
        idx = int(np.flatnonzero(p)[-1])
    return idx


class Model:
    """Base class: a vocabulary plus next-token conditionals."""

    vocab: Vocabulary
    name: str = "model"

    def next_distribution(self, context) -> np.ndarray:
        raise NotImplementedError

    def batch_next_distributions(self, contexts) -> list[np.ndarray]:
        return [self.next_distribution(c) for c in contexts]


def ensure_shared_vocab(draft: Model, target: Model) -> None:
    if draft.vocab.manifest() != target.vocab.manifest():
        raise ValueError("draft and target must share one vocabulary")


class NgramModel(Model):
    """Order-n Markov model with Laplace smoothing.

    Conditionals are ``(count + smoothing) / (total + smoothing * |V|)``
    over the full vocabulary, so any positive smoothing keeps every token
    reachable. Histories are left-padded with the begin token; an unseen
    history with zero smoothing falls back to uniform.
    """

    def __init__(self, order: int, vocab: Vocabulary, smoothing: float = 1.0):
        if order < 1:
            raise ValueError("order must be >= 1")
        if smoothing < 0:
            raise ValueError("smoothing must be >= 0")
        self.order = order
        self.vocab = vocab
        self.smoothing = float(smoothing)
        self.name = f"ngram(order={order}, smoothing={smoothing})"
        self._counts: dict = {}
        self._dist_cache: dict = {}
        self._uniform = _frozen(np.full(vocab.size, 1.0 / vocab.size))

    @classmethod
    def fit(cls, sequences, order: int, vocab: Vocabulary, smoothing: float = 1.0):
        model = cls(order=order, vocab=vocab, smoothing=smoothing)
        for seq in sequences:
            model.observe(seq)
        return model

    def observe(self, sequence) -> None:
        """Add one token sequence's transitions to the count tables."""
        ids = [int(t) for t in sequence]
        padded = [self.vocab.bos_id] * (self.order - 1) + ids
        for i in range(len(ids)):
            history = tuple(padded[i : i + self.order - 1])
            row = self._counts.get(history)
            if row is None:
                row = np.zeros(self.vocab.size, dtype=np.float64)
                self._counts[history] = row
            row[padded[i + self.order - 1]] += 1
        self._dist_cache.clear()

    def _history(self, context) -> tuple:
        if self.order == 1:
            return ()
        padded = [self.vocab.bos_id] * (self.order - 1) + [int(t) for t in context]
        return tuple(padded[-(self.order - 1) :])

    def next_distribution(self, context) -> np.ndarray:
        history = self._history(context)
        cached = self._dist_cache.get(history)
        if cached is not None:
            return cached
        row = self._counts.get(history)
        if row is None:
            row = np.zeros(self.vocab.size, dtype=np.float64)
        smoothed = row + self.smoothing
        total = smoothed.sum()
        if total == 0:
            dist = self._uniform
        else:
            dist = _frozen(smoothed / total)
        self._dist_cache[history] = dist
        return dist


class TableModel(Model):
    """Explicit conditional table keyed by the last ``window`` tokens.

    ``window=0`` makes the model a fixed, context-free distribution. Useful
    for forced scenarios: point-mass chains, synthetic draft/target pairs.
    """

    def __init__(self, vocab: Vocabulary, window: int, table: dict, default=None,
                 name: str = "table"):
        self.vocab = vocab
        self.window = int(window)
        self.name = name
        self._table = {
            tuple(int(t) for t in key): _frozen(validate_distribution(probs))
            for key, probs in table.items()
        }
        self._default = (
            None if default is None else _frozen(validate_distribution(default))
        )

    @classmethod
    def uniform(cls, vocab: Vocabulary) -> "TableModel":
        probs = np.full(vocab.size, 1.0 / vocab.size)
        return cls(vocab, window=0, table={(): probs}, name="uniform")

    @classmethod
    def fixed(cls, vocab: Vocabulary, probs) -> "TableModel":
        """A context-free model that always emits the given distribution."""
        return cls(vocab, window=0, table={(): probs}, name="fixed")

    @classmethod
    def from_file(cls, path, vocab: Vocabulary | None = None) -> "TableModel":
        import json

        with open(path, "r", encoding="utf-8") as fh:
            payload = json.load(fh)
        if vocab is None:
            vocab = Vocabulary(tokens=tuple(payload["vocab"]))
        table = {
            tuple(entry["context"]): np.asarray(entry["probs"], dtype=np.float64)
            for entry in payload.get("entries", [])
        }
        default = payload.get("default")
        return cls(
            vocab,
            window=int(payload.get("window", 0)),
            table=table,
            default=None if default is None else np.asarray(default, dtype=np.float64),
            name=f"table:{path}",
        )

    def next_distribution(self, context) -> np.ndarray:
        key = tuple(int(t) for t in context[-self.window :]) if self.window else ()
        dist = self._table.get(key, self._default)
        if dist is None:
            raise KeyError(f"no table entry for context suffix {key}")
        return dist


def _remote_timeout_s() -> float:
    ms = os.environ.get("SPECMER_REMOTE_TIMEOUT_MS", "")
    try:
        return (int(ms) if ms else DEFAULT_REMOTE_TIMEOUT_MS) / 1000.0
    except ValueError:
        return DEFAULT_REMOTE_TIMEOUT_MS / 1000.0


class RemoteModel(Model):
    """Client for the HTTP logits protocol.

    On construction the served vocabulary is fetched and compared
    symbol-for-symbol against the expected manifest; a mismatch refuses
    the handle. Logits come back raw and are softmaxed here.
    """

    def __init__(self, url: str, model_name: str,
                 vocab: Vocabulary | None = None, timeout_s: float | None = None):
        import requests

        self._requests = requests
        self.url = url.rstrip("/")
        self.model_name = model_name
        self.name = f"remote:{self.url},model={model_name}"
        self.timeout_s = timeout_s if timeout_s is not None else _remote_timeout_s()

        info = self._get_info()
        served = info.get("vocab")
        if not isinstance(served, list) or not all(isinstance(s, str) for s in served):
            raise RemoteProtocolError(f"{self.url}: /v1/info returned no vocab list")
        if vocab is not None and vocab.manifest() != served:
            raise VocabularyMismatchError(
                f"{self.url}: served vocabulary does not match the expected manifest"
            )
        self.vocab = vocab if vocab is not None else Vocabulary(tokens=tuple(served))

    def _get_info(self) -> dict:
        try:
            reply = self._requests.get(f"{self.url}/v1/info", timeout=self.timeout_s)
        except self._requests.RequestException as exc:
            raise RemoteUnavailableError(f"{self.url}: {exc}") from exc
        if reply.status_code != 200:
            raise RemoteProtocolError(f"{self.url}: /v1/info -> {reply.status_code}")
        try:
            return reply.json()
        except ValueError as exc:
            raise RemoteProtocolError(f"{self.url}: /v1/info not JSON") from exc

    def _post_logits(self, contexts: list[list[int]]) -> list[list[float]]:
        body = {"model": self.model_name, "contexts": contexts}
        try:
            reply = self._requests.post(
                f"{self.url}/v1/logits", json=body, timeout=self.timeout_s
            )
        except self._requests.RequestException as exc:
            raise RemoteUnavailableError(f"{self.url}: {exc}") from exc
        if reply.status_code != 200:
            raise RemoteProtocolError(f"{self.url}: /v1/logits -> {reply.status_code}")
        try:
            rows = reply.json()["logits"]
        except (ValueError, KeyError) as exc:
            raise RemoteProtocolError(f"{self.url}: malformed logits reply") from exc
        if not isinstance(rows, list) or len(rows) != len(contexts):
            raise RemoteProtocolError(
                f"{self.url}: expected {len(contexts)} logit rows, got "
                f"{len(rows) if isinstance(rows, list) else type(rows).__name__}"
            )
        return rows

    @staticmethod
    def _softmax(row) -> np.ndarray:
        logits = np.asarray(row, dtype=np.float64)
        logits = logits - logits.max()
        probs = np.exp(logits)
        return probs / probs.sum()

    def next_distribution(self, context) -> np.ndarray:
        return self.batch_next_distributions([context])[0]

    def batch_next_distributions(self, contexts) -> list[np.ndarray]:
        if not contexts:
            return []
        rows = self._post_logits([[int(t) for t in c] for c in contexts])
        out = []
        for row in rows:
            probs = self._softmax(row)
            if probs.size != self.vocab.size:
                raise RemoteProtocolError(
                    f"{self.url}: logit row width {probs.size} != vocab {self.vocab.size}"
                )
            out.append(probs)
        return out


def sequence_nll(model: Model, seq, context=()) -> float:
    """Length-normalized negative log-likelihood (natural log).

    Tokens after the first end-of-sequence are excluded. Returns ``inf``
    when any token has zero conditional probability.
    """
    ids = [int(t) for t in seq]
    eos = model.vocab.eos_id
    if eos in ids:
        ids = ids[: ids.index(eos) + 1]
    if not ids:
        raise ValueError("sequence must be non-empty")

    ctx = [int(t) for t in context]
    total = 0.0
    for t in ids:
        p = float(model.next_distribution(ctx)[t])
        if p <= 0.0:
            return math.inf
        total -= math.log(p)
        ctx.append(t)
    return total / len(ids)


def _parse_kv(text: str) -> dict:
    out = {}
    for part in text.split(","):
        if not part:
            continue
        key, _, value = part.partition("=")
        out[key.strip()] = value.strip()
    return out


def parse_model_descriptor(descriptor: str, vocab: Vocabulary | None = None) -> Model:
    """Build a model from a CLI descriptor string.

    Forms: ``ngram:order=2,train=<fasta>,lambda=1``, ``table:<path>``,
    ``remote:<url>,model=<name>``.
    """
    kind, _, rest = descriptor.partition(":")
    if kind == "ngram":
        opts = _parse_kv(rest)
        if "train" not in opts:
            raise ValueError("ngram descriptor needs train=<fasta path>")
        v = vocab if vocab is not None else default_vocabulary()
        msa = load_fasta(opts["train"])
        rows = []
        for record in msa.records:
            ids, _ = ungap(record, v)
            if ids:
                rows.append(ids)
        return NgramModel.fit(
            rows,
            order=int(opts.get("order", 2)),
            vocab=v,
            smoothing=float(opts.get("lambda", 1.0)),
        )
    if kind == "table":
        return TableModel.from_file(rest, vocab=vocab)
    if kind == "remote":
        url, sep, tail = rest.rpartition(",model=")
        if not sep:
            raise ValueError("remote descriptor needs ,model=<name>")
        return RemoteModel(url, tail, vocab=vocab)
    raise ValueError(f"unknown model descriptor kind {kind!r}")
