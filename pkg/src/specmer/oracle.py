"""Brute-force ground truth for small generation spaces.

Enumerates the exact sequence distribution of a model chain (with the
sampler's warp applied at every step, so nucleus-truncated decoding has a
matching reference), and compares empirical sample sets against it with
total variation and a chi-square goodness-of-fit test.
"""

from __future__ import annotations

import math
from collections import Counter
from dataclasses import dataclass

import numpy as np
from scipy import stats

from .errors import SpaceTooLargeError
from .lm import Model, SamplerConfig, warp

__all__ = ["ExactDistribution", "exact_model_distribution", "compare_empirical"]

MAX_STATES = 10_000_000


@dataclass(frozen=True)
class ExactDistribution:
    """Map from token tuple to exact probability over a bounded space."""

    probs: dict

    def __getitem__(self, seq) -> float:
        return self.probs.get(tuple(seq), 0.0)

    def __contains__(self, seq) -> bool:
        return tuple(seq) in self.probs

    def items(self):
        return self.probs.items()

    def total(self) -> float:
        return math.fsum(self.probs.values())

    def tv_against(self, other: "ExactDistribution") -> float:
        keys = set(self.probs) | set(other.probs)
        return 0.5 * math.fsum(abs(self[k] - other[k]) for k in keys)


def exact_model_distribution(model: Model, context, length: int,
                             cfg: SamplerConfig | None = None) -> ExactDistribution:
    """Chain-rule enumeration of all completions up to ``length`` tokens.

    Each step's conditional is warped exactly as the decoder would warp it.
    Paths that emit the end token stop early and keep their mass, so the
    result is a distribution over sequences of length <= ``length``.
    """
    if cfg is None:
        cfg = SamplerConfig(temperature=1.0, top_p=1.0)
    if model.vocab.size ** length > MAX_STATES:
        raise SpaceTooLargeError(
            f"{model.vocab.size}^{length} exceeds {MAX_STATES} states"
        )

    eos = model.vocab.eos_id
    base = [int(t) for t in context]
    leaves: dict = {}

    def expand(prefix: tuple, prob: float):
        if prefix and prefix[-1] == eos or len(prefix) == length:
            leaves[prefix] = leaves.get(prefix, 0.0) + prob
            return
        dist = warp(model.next_distribution(base + list(prefix)), cfg)
        for token in np.flatnonzero(dist):
            expand(prefix + (int(token),), prob * float(dist[token]))

    expand((), 1.0)
    return ExactDistribution(probs=leaves)


def _merge_small_cells(observed: np.ndarray, expected: np.ndarray,
                       min_expected: float = 5.0):
    """Pool cells below the expected-count floor into one tail cell."""
    order = np.argsort(-expected)
    observed = observed[order]
    expected = expected[order]
    keep = expected >= min_expected
    if keep.all():
        return observed, expected
    obs_kept = observed[keep]
    exp_kept = expected[keep]
    tail_obs = observed[~keep].sum()
    tail_exp = expected[~keep].sum()
    if tail_exp < min_expected and exp_kept.size:
        obs_kept[-1] += tail_obs
        exp_kept[-1] += tail_exp
        return obs_kept, exp_kept
    return np.append(obs_kept, tail_obs), np.append(exp_kept, tail_exp)


def compare_empirical(samples, exact: ExactDistribution) -> dict:
    """Total variation and chi-square fit of samples against the enumeration.

    Samples outside the enumerated space are excluded from the test and
    reported as the ``out_of_space`` fraction. Chi-square cells with
    expected count below five are pooled.
    """
    n = len(samples)
    if n == 0:
        raise ValueError("need at least one sample")
    counts = Counter(tuple(int(t) for t in s) for s in samples)
    in_space = {k: v for k, v in counts.items() if k in exact}
    n_out = n - sum(in_space.values())

    tv = 0.5 * (
        math.fsum(abs(in_space.get(k, 0) / n - p) for k, p in exact.items())
        + n_out / n
    )

    n_in = n - n_out
    keys = list(exact.probs)
    observed = np.array([in_space.get(k, 0) for k in keys], dtype=float)
    expected = np.array([exact[k] * n_in for k in keys], dtype=float)
    observed, expected = _merge_small_cells(observed, expected)
    if observed.size < 2:
        chi2_p = 1.0
    else:
        expected *= observed.sum() / expected.sum()
        _, chi2_p = stats.chisquare(observed, expected)

    return {"tv": float(tv), "chi2_p": float(chi2_p), "out_of_space": n_out / n}
