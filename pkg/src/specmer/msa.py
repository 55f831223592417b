"""Multiple sequence alignment ingestion.

Parses FASTA/A2M-style alignments and strips them down to the gap-free
homolog sequences that feed k-mer counting. Gap characters (``-`` and the
A2M dot) are removed; lowercase insert-state residues are kept and
uppercased; anything left that is not in the vocabulary is dropped and
counted.
"""

from __future__ import annotations

import io
from dataclasses import dataclass
from typing import Iterable, NamedTuple

from .errors import EmptyMsaError, MalformedFastaError
from .vocab import Vocabulary

__all__ = ["AlignmentRecord", "Msa", "parse_fasta", "load_fasta", "ungap", "Ungapped"]

GAP_CHARS = frozenset("-.")


@dataclass(frozen=True)
class AlignmentRecord:
    """One row of an alignment: free-text header plus the raw aligned string."""

    header: str
    aligned: str


@dataclass(frozen=True)
class Msa:
    """An ordered alignment, immutable once parsed."""

    records: tuple[AlignmentRecord, ...]
    source: str = "<stream>"

    @property
    def sequence_count(self) -> int:
        return len(self.records)

    def dedupe(self) -> "Msa":
        """Drop duplicate aligned rows, keeping first occurrences."""
        seen = set()
        kept = []
        for rec in self.records:
            if rec.aligned not in seen:
                seen.add(rec.aligned)
                kept.append(rec)
        return Msa(records=tuple(kept), source=self.source)


def _lines(stream) -> Iterable[str]:
    for raw in stream:
        if isinstance(raw, bytes):
            raw = raw.decode("utf-8")
        yield raw.rstrip("\r\n")


def parse_fasta(stream, source: str = "<stream>") -> Msa:
    """Parse a FASTA/A2M stream into an ``Msa``.

    Header lines start with ``>``; wrapped sequence lines are concatenated;
    record order is preserved. Raises ``MalformedFastaError`` when sequence
    data precedes the first header or a record has no sequence, and
    ``EmptyMsaError`` when the stream holds no records.
    """
    if isinstance(stream, str):
        stream = io.StringIO(stream)
    records = []
    header = None
    header_line = 0
    chunks: list[str] = []

    def flush(at_line: int):
        if header is None:
            return
        aligned = "".join(chunks)
        if not aligned:
            raise MalformedFastaError(header_line, f"record {header!r} has no sequence")
        records.append(AlignmentRecord(header=header, aligned=aligned))

    for lineno, line in enumerate(_lines(stream), start=1):
        if not line.strip():
            continue
        if line.startswith(">"):
            flush(lineno)
            header = line[1:].strip()
            header_line = lineno
            chunks = []
        else:
            if header is None:
                raise MalformedFastaError(lineno, "sequence data before first header")
            chunks.append(line.strip())
    flush(-1)

    if not records:
        raise EmptyMsaError(f"no records in {source}")
    return Msa(records=tuple(records), source=source)


def load_fasta(path) -> Msa:
    with open(path, "r", encoding="utf-8") as fh:
        return parse_fasta(fh, source=str(path))


class Ungapped(NamedTuple):
    ids: list[int]
    dropped: int


def ungap(record: AlignmentRecord, vocab: Vocabulary) -> Ungapped:
    """Strip gaps from one row and encode the remainder.

    Gap characters are discarded, the rest is uppercased, and characters
    outside the vocabulary are dropped (the count is returned, never raised).
    """
    ids = []
    dropped = 0
    for char in record.aligned:
        if char in GAP_CHARS:
            continue
        symbol = char.upper()
        try:
            ids.append(vocab.id_of(symbol))
        except KeyError:
            dropped += 1
    return Ungapped(ids=ids, dropped=dropped)
