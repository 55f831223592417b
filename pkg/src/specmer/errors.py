"""Exception hierarchy shared across the engine.

The CLI maps these onto exit codes: usage problems exit 1, ``DataError``
subclasses exit 2, ``RemoteError`` subclasses exit 3.
"""


class SpecmerError(Exception):
    """Base class for all engine errors."""


class DataError(SpecmerError):
    """Bad or inconsistent input data (files, sequences, configs)."""


class RemoteError(SpecmerError):
    """Failures talking to a remote model server."""


class UnknownSymbolError(DataError):
    """A character in a residue string has no vocabulary entry."""

    def __init__(self, position: int, char: str):
        self.position = position
        self.char = char
        super().__init__(f"unknown symbol {char!r} at position {position}")


class MalformedFastaError(DataError):
    """Sequence data before the first header, or an empty record."""

    def __init__(self, line_number: int, message: str):
        self.line_number = line_number
        super().__init__(f"line {line_number}: {message}")


class EmptyMsaError(DataError):
    """An alignment stream with zero records."""


class VersionMismatchError(DataError):
    """A serialized index carries an unsupported format version."""


class CorruptIndexError(DataError):
    """A serialized index fails its checksum or schema check."""


class RemoteUnavailableError(RemoteError):
    """The model server cannot be reached."""


class RemoteProtocolError(RemoteError):
    """The model server replied with something other than the wire format."""


class VocabularyMismatchError(RemoteError):
    """The served vocabulary differs from the engine's manifest."""


class DegenerateDistributionError(SpecmerError):
    """All probability mass sits on zeroed entries after a transform."""


class IdenticalDistributionsError(SpecmerError):
    """Residual requested for p == q, where no rejection mass exists."""


class DraftZeroProbabilityError(SpecmerError):
    """A drafted token has zero probability under the draft distribution."""


class ContextTooLongError(DataError):
    """The generation context already reaches the length limit."""


class InsufficientDataError(DataError):
    """Too few trace iterations to estimate a statistic."""


class SpaceTooLargeError(DataError):
    """Exact enumeration would exceed the configured state bound."""
