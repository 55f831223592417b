"""Token vocabulary shared by draft and target models.

The default alphabet covers the 20 canonical amino acids plus the unknown
residue ``X`` and three special tokens, 24 symbols total. Ids are stable:
specials first (pad=0, bos=1, eos=2), then residues in alphabetical order.
Begin/end specials render as the sentinels "1" and "2" in decoded text,
matching the stop symbol convention of autoregressive protein models.
"""

from __future__ import annotations

from dataclasses import dataclass, field

from .errors import UnknownSymbolError

__all__ = [
    "Vocabulary",
    "AMINO_ACIDS",
    "PAD",
    "BOS",
    "EOS",
    "default_vocabulary",
    "encode",
    "decode",
]

AMINO_ACIDS = "ACDEFGHIKLMNPQRSTVWY"

PAD = "<pad>"
BOS = "<bos>"
EOS = "<eos>"

# Text sentinels used when decoding special ids back to a string.
_DEFAULT_RENDER = {PAD: "", BOS: "1", EOS: "2"}


@dataclass(frozen=True)
class Vocabulary:
    """Immutable id <-> symbol bijection.

    ``tokens`` lists every symbol in id order. Residues are single
    characters; specials are the named ``<pad>``/``<bos>``/``<eos>`` symbols.
    """

    tokens: tuple[str, ...]
    render: dict = field(default_factory=lambda: dict(_DEFAULT_RENDER))

    def __post_init__(self):
        if len(set(self.tokens)) != len(self.tokens):
            raise ValueError("vocabulary symbols must be unique")
        for special in (PAD, BOS, EOS):
            if special not in self.tokens:
                raise ValueError(f"vocabulary is missing {special}")
        object.__setattr__(
            self, "_id_of", {tok: i for i, tok in enumerate(self.tokens)}
        )

    @property
    def size(self) -> int:
        return len(self.tokens)

    @property
    def pad_id(self) -> int:
        return self._id_of[PAD]

    @property
    def bos_id(self) -> int:
        return self._id_of[BOS]

    @property
    def eos_id(self) -> int:
        return self._id_of[EOS]

    @property
    def special_ids(self) -> frozenset[int]:
        return frozenset((self.pad_id, self.bos_id, self.eos_id))

    def id_of(self, symbol: str) -> int:
        return self._id_of[symbol]

    def symbol_of(self, token_id: int) -> str:
        return self.tokens[token_id]

    def is_residue(self, token_id: int) -> bool:
        return token_id not in self.special_ids

    def residue_ids(self) -> tuple[int, ...]:
        return tuple(i for i in range(self.size) if self.is_residue(i))

    def manifest(self) -> list[str]:
        """Symbol list in id order; the handshake/serialization form."""
        return list(self.tokens)

    def validate_ids(self, ids) -> None:
        """Check the token-sequence invariants: ids in range, eos only last."""
        ids = list(ids)
        for pos, t in enumerate(ids):
            if not 0 <= int(t) < self.size:
                raise ValueError(f"token id {t} at position {pos} out of range")
        eos = self.eos_id
        if eos in ids[:-1]:
            raise ValueError("end-of-sequence token before the final position")

    @classmethod
    def from_residues(cls, residues: str) -> "Vocabulary":
        """Vocabulary with the standard specials plus the given residues."""
        return cls(tokens=(PAD, BOS, EOS) + tuple(residues))


def default_vocabulary() -> Vocabulary:
    """The 24-token amino-acid vocabulary."""
    return Vocabulary.from_residues(AMINO_ACIDS + "X")


def encode(text: str, vocab: Vocabulary) -> list[int]:
    """Map a residue string to token ids, uppercasing first.

    Raises ``UnknownSymbolError`` at the first unmappable character.
    """
    ids = []
    for pos, char in enumerate(text):
        symbol = char.upper()
        try:
            ids.append(vocab.id_of(symbol))
        except KeyError:
            raise UnknownSymbolError(pos, char) from None
    return ids


def decode(ids, vocab: Vocabulary) -> str:
    """Map token ids back to text; specials render as their sentinels."""
    parts = []
    for t in ids:
        symbol = vocab.symbol_of(int(t))
        parts.append(vocab.render.get(symbol, symbol))
    return "".join(parts)
