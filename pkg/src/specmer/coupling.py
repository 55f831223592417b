"""Token-level maximal coupling.

A drafted token ``x ~ p`` is accepted with probability ``min(1, q(x)/p(x))``
against a uniform draw; on rejection the output is redrawn from the
residual distribution, the normalized excess of ``q`` over ``min(p, q)``.
The marginal of the whole procedure is exactly ``q``, which the helpers at
the bottom verify by branch enumeration and by Monte Carlo.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .errors import DraftZeroProbabilityError, IdenticalDistributionsError
from .lm import sample
from .rng import Rng

__all__ = [
    "CouplingOutcome",
    "residual",
    "couple",
    "acceptance_probability",
    "exact_marginal",
    "empirical_marginal",
]

# Below this overlap deficit, p and q are treated as identical and the
# residual is undefined; couple() then accepts unconditionally.
IDENTICAL_TOL = 1e-12


@dataclass(frozen=True)
class CouplingOutcome:
    """Result of one accept/reject decision."""

    token: int
    accepted: bool
    eta: float
    residual_used: bool


def acceptance_probability(p, q) -> float:
    """Overlap mass: the chance a draft from p survives verification.

    Equals one minus the total variation distance between p and q.
    """
    return float(np.minimum(np.asarray(p, float), np.asarray(q, float)).sum())


def residual(p, q) -> np.ndarray:
    """Correction law on rejection: normalized excess of q over min(p, q).

    Supported only where q > p. Raises ``IdenticalDistributionsError`` when
    the overlap leaves no rejection mass to correct from.
    """
    p = np.asarray(p, dtype=np.float64)
    q = np.asarray(q, dtype=np.float64)
    overlap = np.minimum(p, q)
    deficit = 1.0 - float(overlap.sum())
    if deficit < IDENTICAL_TOL:
        raise IdenticalDistributionsError("p and q coincide; residual undefined")
    excess = q - overlap
    return excess / excess.sum()


def couple(x: int, p, q, rng: Rng) -> CouplingOutcome:
    """Accept or correct one drafted token.

    The uniform draw happens on every call, so the stream position does not
    depend on the data. If p and q coincide within tolerance the draft is
    accepted unconditionally.
    """
    p = np.asarray(p, dtype=np.float64)
    q = np.asarray(q, dtype=np.float64)
    px = float(p[x])
    if px <= 0.0:
        raise DraftZeroProbabilityError(f"drafted token {x} has p(x)=0")

    eta = rng.random()
    if eta <= min(1.0, float(q[x]) / px):
        return CouplingOutcome(token=int(x), accepted=True, eta=eta, residual_used=False)

    try:
        correction = residual(p, q)
    except IdenticalDistributionsError:
        return CouplingOutcome(token=int(x), accepted=True, eta=eta, residual_used=False)
    token = sample(correction, rng)
    return CouplingOutcome(token=token, accepted=False, eta=eta, residual_used=True)


def exact_marginal(p, q) -> np.ndarray:
    """Enumerate the output marginal of the coupling procedure.

    For each draftable x the accept branch contributes ``p(x) min(1, q/p)``
    to x and the reject branch spreads ``p(x) (1 - min(1, q/p))`` over the
    residual. The result should reproduce q to rounding error.
    """
    p = np.asarray(p, dtype=np.float64)
    q = np.asarray(q, dtype=np.float64)
    out = np.zeros_like(q)
    overlap = np.minimum(p, q)
    deficit = 1.0 - float(overlap.sum())
    correction = residual(p, q) if deficit >= IDENTICAL_TOL else None
    for x in np.flatnonzero(p):
        accept = min(1.0, float(q[x]) / float(p[x]))
        out[x] += float(p[x]) * accept
        reject_mass = float(p[x]) * (1.0 - accept)
        if reject_mass > 0.0:
            if correction is None:
                out[x] += reject_mass
            else:
                out += reject_mass * correction
    return out


def empirical_marginal(p, q, trials: int, rng: Rng) -> np.ndarray:
    """Monte Carlo output frequencies of draft-then-couple."""
    p = np.asarray(p, dtype=np.float64)
    q = np.asarray(q, dtype=np.float64)
    counts = np.zeros(q.size, dtype=np.int64)
    for _ in range(trials):
        x = sample(p, rng)
        counts[couple(x, p, q, rng).token] += 1
    return counts / float(trials)
