"""Post-hoc metrics and theory calculators.

Covers library statistics (NLL family, pooled acceptance, motif scores),
the wall-time speedup models for single-draft, batched and serial drafting,
the batch-and-select acceptance law with its misranking loss, Hamming
diversity, and a discrete-event simulation that cross-checks the speedup
formulas against constant per-phase costs.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .decode import GenerationResult
from .errors import InsufficientDataError
from .kmer import KmerIndex, score as kmer_score
from .lm import Model, sequence_nll
from .rng import Rng

__all__ = [
    "LibraryStats",
    "SpeedupParams",
    "BatchAcceptanceEstimate",
    "library_stats",
    "cost_coefficient",
    "expected_speedup",
    "expected_speedup_batch",
    "expected_speedup_serial",
    "batch_acceptance",
    "estimate_misranking",
    "diversity",
    "simulate_speedup",
    "bootstrap_means",
]


@dataclass
class LibraryStats:
    """Aggregates over one generated library."""

    n: int
    nll_values: list
    mean_nll: float
    top20_nll: float
    top5_nll: float
    accept_ratio: float
    accepted: int
    rejected: int
    first_token_accept_rate: float | None
    mean_kmer_score: float | None
    tokens_per_second: float | None
    phase_seconds: dict
    top_clipped: bool

    def to_dict(self) -> dict:
        return {
            "n": self.n,
            "mean_nll": self.mean_nll,
            "top20_nll": self.top20_nll,
            "top5_nll": self.top5_nll,
            "accept_ratio": self.accept_ratio,
            "accepted": self.accepted,
            "rejected": self.rejected,
            "first_token_accept_rate": self.first_token_accept_rate,
            "mean_kmer_score": self.mean_kmer_score,
            "tokens_per_second": self.tokens_per_second,
            "phase_seconds": self.phase_seconds,
            "top_clipped": self.top_clipped,
            "nll_values": self.nll_values,
        }


def _top_n_mean(values: list, n: int) -> float:
    ranked = sorted(values)[: max(1, min(n, len(values)))]
    return float(np.mean(ranked))


def library_stats(results: list, target: Model, index: KmerIndex | None = None,
                  boundary_windows: bool = True) -> LibraryStats:
    """Score a library under the target model and pool its traces.

    Per-sequence NLL is the length-normalized negative log-likelihood of
    the generated portion given its context; top-N values average the N
    lowest NLLs (clipped, and flagged, at the library size).
    """
    if not results:
        raise ValueError("results must be non-empty")

    nlls = []
    kmer_scores = []
    accepted = 0
    rejected = 0
    first_flags: list = []
    tokens = 0
    phase = {"draft": 0.0, "score": 0.0, "verify": 0.0}
    for result in results:
        generated = result.generated
        if generated:
            nlls.append(sequence_nll(target, generated, result.sequence[: result.context_len]))
            tokens += len(generated)
            if index is not None:
                ctx = result.sequence[: result.context_len]
                tail = ctx[-(index.max_k - 1):] if index.max_k > 1 else []
                kmer_scores.append(
                    kmer_score(generated, tail, index, boundary_windows).value
                )
        accepted += result.trace.accepted
        rejected += result.trace.rejected
        first_flags.extend(result.trace.first_token_accepts())
        phase["draft"] += result.trace.draft_seconds
        phase["score"] += result.trace.score_seconds
        phase["verify"] += result.trace.verify_seconds

    total_calls = accepted + rejected
    total_seconds = sum(phase.values())
    return LibraryStats(
        n=len(results),
        nll_values=[float(v) for v in nlls],
        mean_nll=float(np.mean(nlls)) if nlls else math.nan,
        top20_nll=_top_n_mean(nlls, 20) if nlls else math.nan,
        top5_nll=_top_n_mean(nlls, 5) if nlls else math.nan,
        accept_ratio=accepted / total_calls if total_calls else 0.0,
        accepted=accepted,
        rejected=rejected,
        first_token_accept_rate=(
            float(np.mean(first_flags)) if first_flags else None
        ),
        mean_kmer_score=float(np.mean(kmer_scores)) if kmer_scores else None,
        tokens_per_second=tokens / total_seconds if total_seconds > 0 else None,
        phase_seconds=phase,
        top_clipped=len(nlls) < 20,
    )


@dataclass(frozen=True)
class SpeedupParams:
    """Inputs to the wall-time speedup models.

    ``cost_coeff`` is the draft-to-target time ratio; ``batch_cost`` is the
    sublinear cost factor of drafting ``candidates`` sequences in one batch
    (1 under true parallelism). Raw phase timings may be given instead of
    ``cost_coeff`` and are resolved via ``cost_coefficient``.
    """

    alpha: float
    gamma: int
    candidates: int = 1
    cost_coeff: float | None = None
    batch_cost: float = 1.0
    m_p: float | None = None
    m_q: float | None = None
    m_k: float = 0.0

    def __post_init__(self):
        if not 0 <= self.alpha <= 1:
            raise ValueError("alpha must be in [0, 1]")
        if self.gamma < 1:
            raise ValueError("gamma must be >= 1")
        if self.candidates < 1:
            raise ValueError("candidates must be >= 1")
        if not 1.0 <= self.batch_cost <= self.candidates:
            raise ValueError("batch_cost must satisfy 1 <= xi <= candidates")

    def resolve_cost_coeff(self, mode: str = "vanilla") -> float:
        if self.cost_coeff is not None:
            return float(self.cost_coeff)
        if self.m_p is None or self.m_q is None:
            raise ValueError("need cost_coeff or raw timings m_p, m_q")
        return cost_coefficient(
            mode, self.m_p, self.m_q, self.m_k, self.candidates, self.batch_cost
        )


def cost_coefficient(mode: str, m_p: float, m_q: float, m_k: float = 0.0,
                     candidates: int = 1, batch_cost: float = 1.0) -> float:
    """Draft-phase cost in target units for one iteration.

    vanilla: m_p/m_q. batch: (xi*m_p + m_k)/m_q, the batched draft of
    ``candidates`` sequences at sublinear cost xi. serial:
    (candidates*m_p + m_k)/m_q, every candidate drafted separately.
    """
    if m_q <= 0 or m_p <= 0:
        raise ValueError("timings must be positive")
    if mode == "vanilla":
        return m_p / m_q
    if mode == "batch":
        return (batch_cost * m_p + m_k) / m_q
    if mode == "serial":
        return (candidates * m_p + m_k) / m_q
    raise ValueError(f"unknown cost mode {mode!r}")


def _accept_series(alpha: float, gamma: int) -> float:
    """Expected tokens per iteration: sum of alpha^i for i in 0..gamma."""
    if alpha >= 1.0:
        return gamma + 1.0
    return (1.0 - alpha ** (gamma + 1)) / (1.0 - alpha)


def expected_speedup(params: SpeedupParams) -> float:
    """Single-draft wall-time speedup over target-only decoding."""
    ce = params.resolve_cost_coeff("vanilla")
    return _accept_series(params.alpha, params.gamma) / (params.gamma * ce + 1.0)


def expected_speedup_batch(params: SpeedupParams) -> float:
    """Speedup when candidates are drafted in one batch."""
    ce = params.resolve_cost_coeff("batch")
    return _accept_series(params.alpha, params.gamma) / (ce + 1.0)


def expected_speedup_serial(params: SpeedupParams) -> float:
    """Speedup when candidates are drafted one at a time."""
    ce = params.resolve_cost_coeff("batch")
    factor = params.candidates / params.batch_cost
    return _accept_series(params.alpha, params.gamma) / (factor * ce + 1.0)


def batch_acceptance(alpha: float, m: int, epsilon: float) -> float:
    """Expected batch-and-select acceptance: 1 - (1-alpha)^m - epsilon."""
    if not 0 <= alpha <= 1 or not 0 <= epsilon <= 1:
        raise ValueError("alpha and epsilon must be in [0, 1]")
    if m < 1:
        raise ValueError("m must be >= 1")
    return 1.0 - (1.0 - alpha) ** m - epsilon


@dataclass
class BatchAcceptanceEstimate:
    """Misranking estimate from matched vanilla and batch-selected traces."""

    alpha: float
    m: int
    expected_accept: float
    epsilon: float
    epsilon_ci: tuple
    alpha_pooled: float
    n_vanilla: int
    n_selected: int
    out_of_range: bool = False

    def to_dict(self) -> dict:
        return {
            "alpha": self.alpha,
            "m": self.m,
            "expected_accept": self.expected_accept,
            "epsilon": self.epsilon,
            "epsilon_ci": list(self.epsilon_ci),
            "alpha_pooled": self.alpha_pooled,
            "n_vanilla": self.n_vanilla,
            "n_selected": self.n_selected,
            "out_of_range": self.out_of_range,
        }


def _trace_list(traces) -> list:
    out = []
    for t in traces:
        out.append(t.trace if isinstance(t, GenerationResult) else t)
    return out


def estimate_misranking(traces_vanilla, traces_specmer, m: int,
                        min_iterations: int = 1000, bootstrap: int = 1000,
                        seed: int = 0) -> BatchAcceptanceEstimate:
    """Derive the misranking loss from matched configurations.

    The single-draw acceptance is measured on the first verified token of
    each vanilla iteration, batch-and-select acceptance likewise on the
    selected candidates' first tokens; the misranking loss is the gap to
    the no-misranking law. A bootstrap interval (seeded) quantifies noise.
    """
    vanilla = _trace_list(traces_vanilla)
    selected = _trace_list(traces_specmer)
    flags_v = np.array(
        [f for t in vanilla for f in t.first_token_accepts()], dtype=float
    )
    flags_s = np.array(
        [f for t in selected for f in t.first_token_accepts()], dtype=float
    )
    if flags_v.size < min_iterations or flags_s.size < min_iterations:
        raise InsufficientDataError(
            f"need >= {min_iterations} iterations on both sides, "
            f"got {flags_v.size} and {flags_s.size}"
        )

    alpha = float(flags_v.mean())
    expected_accept = float(flags_s.mean())
    epsilon = 1.0 - (1.0 - alpha) ** m - expected_accept

    gen = Rng(seed).generator
    eps_samples = np.empty(bootstrap)
    for b in range(bootstrap):
        av = flags_v[gen.integers(0, flags_v.size, flags_v.size)].mean()
        es = flags_s[gen.integers(0, flags_s.size, flags_s.size)].mean()
        eps_samples[b] = 1.0 - (1.0 - av) ** m - es
    ci = (float(np.percentile(eps_samples, 2.5)),
          float(np.percentile(eps_samples, 97.5)))

    accepted = sum(t.accepted for t in vanilla)
    rejected = sum(t.rejected for t in vanilla)
    pooled = accepted / (accepted + rejected) if accepted + rejected else 0.0

    return BatchAcceptanceEstimate(
        alpha=alpha,
        m=m,
        expected_accept=expected_accept,
        epsilon=epsilon,
        epsilon_ci=ci,
        alpha_pooled=pooled,
        n_vanilla=int(flags_v.size),
        n_selected=int(flags_s.size),
        out_of_range=not 0.0 <= epsilon <= 1.0,
    )


def hamming_distance(a, b) -> int:
    """Position-wise mismatches up to the shorter length, plus the length gap."""
    a = list(a)
    b = list(b)
    n = min(len(a), len(b))
    mismatches = sum(1 for i in range(n) if a[i] != b[i])
    return mismatches + abs(len(a) - len(b))


def _strip_eos(seq, eos: int) -> list:
    ids = list(seq)
    if ids and ids[-1] == eos:
        ids.pop()
    return ids


def diversity(results: list, wild_type, eos_id: int, max_pairs: int = 10_000,
              seed: int = 0) -> dict:
    """Wild-type and inter-sequence Hamming statistics.

    Inter-sequence distances are computed over all unordered pairs, or a
    seeded subsample when the pair count exceeds ``max_pairs``.
    """
    seqs = [_strip_eos(r.sequence, eos_id) for r in results]
    wt = list(wild_type)
    wt_dists = np.array([hamming_distance(s, wt) for s in seqs], dtype=float)

    n = len(seqs)
    pairs = [(i, j) for i in range(n) for j in range(i + 1, n)]
    if len(pairs) > max_pairs:
        gen = Rng(seed).generator
        picks = gen.choice(len(pairs), size=max_pairs, replace=False)
        pairs = [pairs[int(k)] for k in picks]
    inter = np.array(
        [hamming_distance(seqs[i], seqs[j]) for i, j in pairs], dtype=float
    )

    def stats(values: np.ndarray) -> dict:
        if values.size == 0:
            return {"mean": math.nan, "sd": math.nan, "n": 0}
        return {
            "mean": float(values.mean()),
            "sd": float(values.std(ddof=1)) if values.size > 1 else 0.0,
            "n": int(values.size),
        }

    return {"wt_hamming": stats(wt_dists), "inter_seq_hamming": stats(inter)}


def simulate_speedup(params: SpeedupParams, mode: str, iterations: int,
                     rng: Rng) -> float:
    """Discrete-event check of the speedup formulas.

    Each simulated iteration pays a constant draft-phase cost, a constant
    verification cost of one target unit, and emits one token per accept
    before the first rejection plus the correction or bonus token, with
    accepts i.i.d. at rate alpha. The returned value is baseline time over
    simulated time for the same token count.
    """
    alpha = params.alpha
    gamma = params.gamma
    if mode == "vanilla":
        draft_phase = gamma * params.resolve_cost_coeff("vanilla")
    elif mode == "batch":
        draft_phase = params.resolve_cost_coeff("batch")
    elif mode == "serial":
        ce = params.resolve_cost_coeff("batch")
        draft_phase = (params.candidates / params.batch_cost) * ce
    else:
        raise ValueError(f"unknown mode {mode!r}")

    gen = rng.generator
    if alpha <= 0.0:
        runs = np.zeros(iterations, dtype=np.int64)
    else:
        # geometric(p) counts trials to first success; rejects succeed at 1-alpha
        runs = gen.geometric(1.0 - alpha, size=iterations) - 1
    emitted = np.minimum(runs, gamma) + 1

    verify_cost = 1.0
    baseline_per_token = 1.0
    total_time = iterations * (draft_phase + verify_cost)
    total_tokens = float(emitted.sum())
    return (total_tokens * baseline_per_token) / total_time


def bootstrap_means(values, resamples: int, rng: Rng) -> np.ndarray:
    """Means of ``resamples`` bootstrap draws from ``values``."""
    arr = np.asarray(values, dtype=float)
    gen = rng.generator
    idx = gen.integers(0, arr.size, size=(resamples, arr.size))
    return arr[idx].mean(axis=1)
