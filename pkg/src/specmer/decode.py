"""Generation loops: plain autoregressive, draft-and-verify, and
batch-draft with motif selection.

One iteration drafts up to ``draft_len`` tokens from the draft model
(``num_candidates`` independent candidates when motif selection is on),
picks the best-scoring candidate, recomputes draft and target conditionals
along it, and verifies token by token with maximal coupling. The first
rejection is corrected from the residual and the iteration ends there; a
fully accepted draft earns one bonus token sampled from the target.

Randomness discipline: candidate ``j`` of iteration ``t`` drafts from the
substream ``(seed, "draft", t, j)`` and all verification draws come from
``(seed, "verify")``, so a single-candidate run of the batch decoder is
bit-identical to the plain draft-and-verify loop under the same seed.
"""

from __future__ import annotations

import logging
import time
from dataclasses import dataclass, field, asdict

from .coupling import couple
from .errors import ContextTooLongError
from .kmer import KmerIndex, score_candidates
from .lm import Model, SamplerConfig, ensure_shared_vocab, sample, warp
from .rng import Rng

__all__ = [
    "DecodeConfig",
    "IterationRecord",
    "DecodeTrace",
    "GenerationResult",
    "speculative_generate",
    "specmer_generate",
    "baseline_generate",
    "generate_library",
    "iter_library",
]

log = logging.getLogger(__name__)

WARP_MODES = ("both", "target-only")


@dataclass(frozen=True)
class DecodeConfig:
    """Hyperparameters of one generation run."""

    context: tuple = ()
    max_len: int = 256
    draft_len: int = 5
    num_candidates: int = 1
    sampler: SamplerConfig = field(default_factory=SamplerConfig)
    k_values: tuple = (1, 3, 5)
    seed: int = 0
    boundary_windows: bool = True
    bonus_token: bool = True
    warp_mode: str = "both"

    def __post_init__(self):
        if self.draft_len < 1:
            raise ValueError("draft_len must be >= 1")
        if self.num_candidates < 1:
            raise ValueError("num_candidates must be >= 1")
        if self.max_len < 1:
            raise ValueError("max_len must be >= 1")
        if self.warp_mode not in WARP_MODES:
            raise ValueError(f"warp_mode must be one of {WARP_MODES}")
        object.__setattr__(self, "context", tuple(int(t) for t in self.context))


@dataclass
class IterationRecord:
    """What one draft-and-verify round did."""

    drafted: list
    chosen_index: int
    scores: list | None
    accepted_flags: list
    correction: int | None
    bonus: int | None


@dataclass
class DecodeTrace:
    """Per-iteration history plus pooled accept/reject totals and timings."""

    iterations: list = field(default_factory=list)
    accepted: int = 0
    rejected: int = 0
    draft_seconds: float = 0.0
    score_seconds: float = 0.0
    verify_seconds: float = 0.0

    @property
    def acceptance_ratio(self) -> float:
        total = self.accepted + self.rejected
        return self.accepted / total if total else 0.0

    def first_token_accepts(self) -> list:
        return [rec.accepted_flags[0] for rec in self.iterations if rec.accepted_flags]

    def to_dict(self) -> dict:
        return {
            "accepted": self.accepted,
            "rejected": self.rejected,
            "draft_seconds": self.draft_seconds,
            "score_seconds": self.score_seconds,
            "verify_seconds": self.verify_seconds,
            "iterations": [asdict(rec) for rec in self.iterations],
        }

    @classmethod
    def from_dict(cls, payload: dict) -> "DecodeTrace":
        trace = cls(
            accepted=int(payload["accepted"]),
            rejected=int(payload["rejected"]),
            draft_seconds=float(payload.get("draft_seconds", 0.0)),
            score_seconds=float(payload.get("score_seconds", 0.0)),
            verify_seconds=float(payload.get("verify_seconds", 0.0)),
        )
        for rec in payload.get("iterations", []):
            trace.iterations.append(
                IterationRecord(
                    drafted=list(rec["drafted"]),
                    chosen_index=int(rec["chosen_index"]),
                    scores=rec.get("scores"),
                    accepted_flags=list(rec["accepted_flags"]),
                    correction=rec.get("correction"),
                    bonus=rec.get("bonus"),
                )
            )
        return trace


@dataclass
class GenerationResult:
    """A finished sequence with its decode trace."""

    sequence: list
    context_len: int
    trace: DecodeTrace
    method: str = "speculative"
    nll: float | None = None

    @property
    def generated(self) -> list:
        return self.sequence[self.context_len :]

    def to_dict(self) -> dict:
        payload = {
            "method": self.method,
            "sequence": list(self.sequence),
            "context_len": self.context_len,
            "nll": self.nll,
        }
        payload.update(self.trace.to_dict())
        return payload

    @classmethod
    def from_dict(cls, payload: dict) -> "GenerationResult":
        return cls(
            sequence=[int(t) for t in payload["sequence"]],
            context_len=int(payload["context_len"]),
            trace=DecodeTrace.from_dict(payload),
            method=payload.get("method", "speculative"),
            nll=payload.get("nll"),
        )


def _draft_candidate(model: Model, prefix: list, budget: int,
                     cfg: DecodeConfig, rng: Rng) -> list:
    """Sample up to ``budget`` tokens autoregressively; stop after eos."""
    eos = model.vocab.eos_id
    candidate: list = []
    ctx = list(prefix)
    for _ in range(budget):
        dist = warp(model.next_distribution(ctx), cfg.sampler)
        token = sample(dist, rng)
        candidate.append(token)
        ctx.append(token)
        if token == eos:
            break
    return candidate


def _run_loop(draft: Model, target: Model, index: KmerIndex | None,
              cfg: DecodeConfig, rng: Rng, method: str) -> GenerationResult:
    ensure_shared_vocab(draft, target)
    vocab = target.vocab
    vocab.validate_ids(cfg.context)
    if len(cfg.context) >= cfg.max_len:
        raise ContextTooLongError(
            f"context length {len(cfg.context)} >= max_len {cfg.max_len}"
        )

    select = cfg.num_candidates > 1 and index is not None
    if select and set(index.k_values) != set(cfg.k_values):
        raise ValueError(
            f"index k_values {index.k_values} differ from config {cfg.k_values}"
        )

    eos = vocab.eos_id
    seq = list(cfg.context)
    trace = DecodeTrace()
    verify_rng = rng.split("verify")
    iteration = 0
    done = False

    while not done and len(seq) < cfg.max_len:
        budget = min(cfg.draft_len, cfg.max_len - len(seq))

        t0 = time.perf_counter()
        n_candidates = cfg.num_candidates
        candidates = [
            _draft_candidate(draft, seq, budget, cfg, rng.split("draft", iteration, j))
            for j in range(n_candidates)
        ]
        trace.draft_seconds += time.perf_counter() - t0

        scores = None
        chosen = 0
        if select:
            t0 = time.perf_counter()
            tail = seq[-(index.max_k - 1) :] if index.max_k > 1 else []
            kmer_scores = score_candidates(
                candidates, tail, index, cfg.boundary_windows
            )
            chosen = 0
            for j in range(1, n_candidates):
                if kmer_scores[j].exact > kmer_scores[chosen].exact:
                    chosen = j
            scores = [s.value for s in kmer_scores]
            trace.score_seconds += time.perf_counter() - t0

        candidate = candidates[chosen]

        t0 = time.perf_counter()
        prefixes = [seq + candidate[:i] for i in range(len(candidate))]
        draft_dists = draft.batch_next_distributions(prefixes)
        want_bonus = (
            cfg.bonus_token
            and candidate[-1] != eos
            and len(seq) + len(candidate) < cfg.max_len
        )
        target_contexts = prefixes + ([seq + candidate] if want_bonus else [])
        target_dists = target.batch_next_distributions(target_contexts)

        record = IterationRecord(
            drafted=list(candidate),
            chosen_index=chosen,
            scores=scores,
            accepted_flags=[],
            correction=None,
            bonus=None,
        )

        all_accepted = True
        for i, token in enumerate(candidate):
            q_dist = warp(target_dists[i], cfg.sampler)
            if cfg.warp_mode == "both":
                p_dist = warp(draft_dists[i], cfg.sampler)
            else:
                p_dist = draft_dists[i]
            outcome = couple(token, p_dist, q_dist, verify_rng)
            record.accepted_flags.append(outcome.accepted)
            if outcome.accepted:
                trace.accepted += 1
                seq.append(token)
                if token == eos:
                    done = True
                    break
            else:
                trace.rejected += 1
                seq.append(outcome.token)
                record.correction = outcome.token
                if outcome.token == eos:
                    done = True
                all_accepted = False
                break

        if all_accepted and not done and want_bonus:
            bonus_dist = warp(target_dists[-1], cfg.sampler)
            bonus = sample(bonus_dist, verify_rng)
            seq.append(bonus)
            record.bonus = bonus
            if bonus == eos:
                done = True
        trace.verify_seconds += time.perf_counter() - t0

        trace.iterations.append(record)
        iteration += 1

    return GenerationResult(
        sequence=seq, context_len=len(cfg.context), trace=trace, method=method
    )


def speculative_generate(draft: Model, target: Model, cfg: DecodeConfig,
                         rng: Rng) -> GenerationResult:
    """Single-candidate draft-and-verify decoding."""
    if cfg.num_candidates != 1:
        raise ValueError("speculative decoding uses exactly one candidate")
    return _run_loop(draft, target, None, cfg, rng, method="speculative")


def specmer_generate(draft: Model, target: Model, index: KmerIndex | None,
                     cfg: DecodeConfig, rng: Rng) -> GenerationResult:
    """Batch-draft decoding with motif-guided candidate selection.

    With one candidate, selection is disabled and the emitted stream is
    bit-identical to ``speculative_generate`` under the same seed.
    """
    if cfg.num_candidates > 1 and index is None:
        raise ValueError("multiple candidates need a motif index to select by")
    use_index = index if cfg.num_candidates > 1 else None
    return _run_loop(draft, target, use_index, cfg, rng, method="specmer")


def baseline_generate(model: Model, cfg: DecodeConfig, rng: Rng) -> GenerationResult:
    """Plain autoregressive sampling from one model."""
    vocab = model.vocab
    vocab.validate_ids(cfg.context)
    if len(cfg.context) >= cfg.max_len:
        raise ContextTooLongError(
            f"context length {len(cfg.context)} >= max_len {cfg.max_len}"
        )
    eos = vocab.eos_id
    seq = list(cfg.context)
    trace = DecodeTrace()
    stream = rng.split("baseline")
    t0 = time.perf_counter()
    while len(seq) < cfg.max_len:
        dist = warp(model.next_distribution(seq), cfg.sampler)
        token = sample(dist, stream)
        seq.append(token)
        if token == eos:
            break
    trace.draft_seconds = time.perf_counter() - t0
    return GenerationResult(
        sequence=seq, context_len=len(cfg.context), trace=trace, method="baseline"
    )


def iter_library(kind: str, n: int, cfg: DecodeConfig, draft: Model | None = None,
                 target: Model | None = None, index: KmerIndex | None = None):
    """Yield ``(i, GenerationResult)`` for n independent generations.

    Sequence ``i`` draws from the substream ``(seed, "sequence", i)``, so
    libraries reproduce bit for bit and are order-independent. Per-sequence
    failures are logged and skipped, never aborting the batch.
    """
    if n < 1:
        raise ValueError("n must be >= 1")
    root = Rng(cfg.seed)
    for i in range(n):
        rng = root.split("sequence", i)
        try:
            if kind == "baseline":
                yield i, baseline_generate(target or draft, cfg, rng)
            elif kind == "speculative":
                yield i, speculative_generate(draft, target, cfg, rng)
            elif kind == "specmer":
                yield i, specmer_generate(draft, target, index, cfg, rng)
            else:
                raise ValueError(f"unknown generation kind {kind!r}")
        except ValueError:
            raise
        except Exception as exc:  # noqa: BLE001 - per-sequence isolation
            log.warning("generation %d failed: %s", i, exc)


def generate_library(kind: str, n: int, cfg: DecodeConfig, draft: Model | None = None,
                     target: Model | None = None,
                     index: KmerIndex | None = None) -> list:
    return [result for _, result in iter_library(kind, n, cfg, draft, target, index)]
