"""Motif frequency index and candidate scoring.

An index counts every length-k window over the gap-stripped rows of an
alignment, for each k in a configured set, and normalizes the counts into
per-k probability tables. Candidates are scored by summing the table
probabilities of every window they contribute to and dividing by the
candidate length; windows containing unseen motifs or special tokens add
zero, so the score is total and additive across k.

Counts are the unit of storage: probabilities are exact count/total
rationals, indices merge by count addition, and serialization round-trips
bit for bit.
"""

from __future__ import annotations

import hashlib
import json
import logging
import warnings
from dataclasses import dataclass, field
from fractions import Fraction

from .errors import CorruptIndexError, VersionMismatchError
from .msa import Msa, ungap
from .vocab import Vocabulary

__all__ = [
    "KmerIndex",
    "KmerScore",
    "build_index",
    "score",
    "score_candidates",
    "select_best",
    "save_index",
    "load_index",
]

log = logging.getLogger(__name__)

FORMAT_VERSION = "kmer-index/1"
MAX_K = 7
WARN_K = 5


@dataclass(frozen=True)
class KmerIndex:
    """Per-k motif count tables plus provenance.

    ``counts[k]`` maps a k-tuple of residue token ids to its occurrence
    count; ``totals[k]`` is the window total for that k. ``empty_k`` flags
    window sizes no alignment row was long enough to populate.
    """

    k_values: tuple[int, ...]
    counts: dict
    totals: dict
    vocab: Vocabulary
    source: dict = field(default_factory=dict)
    empty_k: tuple[int, ...] = ()

    @property
    def max_k(self) -> int:
        return max(self.k_values)

    def count(self, k: int, window: tuple) -> int:
        return self.counts[k].get(tuple(window), 0)

    def probability(self, k: int, window: tuple) -> Fraction:
        """Exact motif probability count/total; zero for unseen motifs."""
        total = self.totals[k]
        if total == 0:
            return Fraction(0)
        return Fraction(self.counts[k].get(tuple(window), 0), total)


@dataclass(frozen=True)
class KmerScore:
    """Additive motif score of one candidate.

    ``value`` is the float form of ``exact``; ``per_k`` holds each window
    size's contribution, already divided by the candidate length.
    """

    value: float
    per_k: dict
    exact: Fraction

    def __float__(self) -> float:
        return self.value


def build_index(msa: Msa, k_values, vocab: Vocabulary) -> KmerIndex:
    """Count every k-window over the ungapped alignment rows.

    Rows shorter than k contribute nothing for that k; a k no row reaches
    is flagged in ``empty_k`` rather than raised.
    """
    ks = tuple(sorted(set(int(k) for k in k_values)))
    if not ks:
        raise ValueError("k_values must be non-empty")
    if ks[0] < 1:
        raise ValueError("every k must be >= 1")
    if ks[-1] > MAX_K:
        raise ValueError(f"k={ks[-1]} exceeds the cap of {MAX_K}")
    if ks[-1] > WARN_K:
        warnings.warn(
            f"k={ks[-1]} above {WARN_K}: table size can grow exponentially",
            stacklevel=2,
        )

    counts: dict = {k: {} for k in ks}
    totals = {k: 0 for k in ks}
    dropped = 0
    for record in msa.records:
        ids, n_dropped = ungap(record, vocab)
        dropped += n_dropped
        for k in ks:
            table = counts[k]
            for i in range(len(ids) - k + 1):
                window = tuple(ids[i : i + k])
                table[window] = table.get(window, 0) + 1
                totals[k] += 1

    empty = tuple(k for k in ks if totals[k] == 0)
    if empty:
        log.warning("no alignment row reaches length %s; those tables are empty", empty)
    if dropped:
        log.info("dropped %d non-alphabet characters while ungapping", dropped)

    return KmerIndex(
        k_values=ks,
        counts=counts,
        totals=totals,
        vocab=vocab,
        source={
            "msa_path": msa.source,
            "sequence_count": msa.sequence_count,
            "drop_count": dropped,
        },
        empty_k=empty,
    )


def score(
    candidate,
    context_tail,
    index: KmerIndex,
    boundary_windows: bool = True,
) -> KmerScore:
    """Score a candidate by its motif content.

    Every k-window of ``context_tail + candidate`` that covers at least one
    candidate token contributes its table probability; the sum is divided
    by the candidate length. Windows touching special tokens contribute
    zero. With ``boundary_windows`` off, only windows fully inside the
    candidate count.
    """
    cand = [int(t) for t in candidate]
    if not cand:
        raise ValueError("candidate must be non-empty")
    length = len(cand)

    tail_budget = index.max_k - 1
    tail = [int(t) for t in context_tail][-tail_budget:] if tail_budget else []
    window_span = tail + cand
    offset = len(tail)

    specials = index.vocab.special_ids
    exact = Fraction(0)
    per_k: dict = {}
    for k in index.k_values:
        k_sum = Fraction(0)
        if boundary_windows:
            start = max(0, offset - (k - 1))
        else:
            start = offset
        for i in range(start, len(window_span) - k + 1):
            window = tuple(window_span[i : i + k])
            if any(t in specials for t in window):
                continue
            k_sum += index.probability(k, window)
        contribution = k_sum / length
        per_k[k] = float(contribution)
        exact += contribution

    return KmerScore(value=float(exact), per_k=per_k, exact=exact)


def score_candidates(
    candidates,
    context_tail,
    index: KmerIndex,
    boundary_windows: bool = True,
) -> list[KmerScore]:
    return [score(c, context_tail, index, boundary_windows) for c in candidates]


def select_best(
    candidates,
    context_tail,
    index: KmerIndex,
    boundary_windows: bool = True,
) -> tuple[int, KmerScore]:
    """Argmax of the motif score; ties go to the lowest candidate position."""
    if not candidates:
        raise ValueError("need at least one candidate")
    scores = score_candidates(candidates, context_tail, index, boundary_windows)
    best = 0
    for i in range(1, len(scores)):
        if scores[i].exact > scores[best].exact:
            best = i
    return best, scores[best]


def _payload(index: KmerIndex) -> dict:
    tables = {}
    for k in index.k_values:
        rows = [
            {"kmer": "".join(index.vocab.symbol_of(t) for t in window), "count": count}
            for window, count in index.counts[k].items()
        ]
        rows.sort(key=lambda row: row["kmer"])
        tables[str(k)] = rows
    return {
        "version": FORMAT_VERSION,
        "vocabulary": index.vocab.manifest(),
        "k_values": list(index.k_values),
        "tables": tables,
        "totals": {str(k): index.totals[k] for k in index.k_values},
        "source": dict(index.source),
        "empty_k": list(index.empty_k),
    }


def _checksum(payload: dict) -> str:
    canonical = json.dumps(payload, sort_keys=True, separators=(",", ":"))
    return "sha256:" + hashlib.sha256(canonical.encode()).hexdigest()


def save_index(index: KmerIndex, path) -> None:
    payload = _payload(index)
    payload["checksum"] = _checksum(payload)
    with open(path, "w", encoding="utf-8") as fh:
        json.dump(payload, fh, indent=1, sort_keys=True)
        fh.write("\n")


def load_index(path) -> KmerIndex:
    """Load a serialized index, re-deriving probabilities from counts."""
    try:
        with open(path, "r", encoding="utf-8") as fh:
            payload = json.load(fh)
    except (json.JSONDecodeError, UnicodeDecodeError) as exc:
        raise CorruptIndexError(f"{path}: not a JSON index file") from exc

    version = payload.get("version")
    if version != FORMAT_VERSION:
        raise VersionMismatchError(
            f"{path}: version {version!r}, expected {FORMAT_VERSION!r}"
        )
    checksum = payload.pop("checksum", None)
    if checksum != _checksum(payload):
        raise CorruptIndexError(f"{path}: checksum mismatch")

    try:
        vocab = Vocabulary(tokens=tuple(payload["vocabulary"]))
        ks = tuple(int(k) for k in payload["k_values"])
        counts: dict = {}
        totals = {}
        for k in ks:
            table = {}
            for row in payload["tables"][str(k)]:
                window = tuple(vocab.id_of(ch) for ch in row["kmer"])
                table[window] = int(row["count"])
            counts[k] = table
            totals[k] = int(payload["totals"][str(k)])
    except (KeyError, ValueError) as exc:
        raise CorruptIndexError(f"{path}: malformed index payload") from exc

    return KmerIndex(
        k_values=ks,
        counts=counts,
        totals=totals,
        vocab=vocab,
        source=dict(payload.get("source", {})),
        empty_k=tuple(payload.get("empty_k", ())),
    )
