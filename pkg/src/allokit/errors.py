"""Exception hierarchy shared across the toolkit."""

from __future__ import annotations


class AlloKitError(Exception):
    """Base class for all toolkit errors."""


class InvalidIPAError(AlloKitError, ValueError):
    """Input contains a codepoint outside the known IPA repertoire, or a
    modifier/diacritic with no preceding base letter."""


class UnknownXSampaError(AlloKitError, ValueError):
    """An X-SAMPA symbol has no entry in the conversion table."""

    def __init__(self, message: str, offset: int) -> None:
        super().__init__(message)
        self.offset = offset


class ParseError(AlloKitError, ValueError):
    """A mapping document is not well-formed (e.g. broken JSON)."""


class EmptyDbError(AlloKitError, ValueError):
    """An operation that needs at least one language got an empty database."""


class BadNError(AlloKitError, ValueError):
    """Requested top-n cutoff is out of range for the ranking list."""


class PhoneNotInInventoryError(AlloKitError, KeyError):
    """A language uses a phone missing from the universal inventory."""


class DimensionMismatchError(AlloKitError, ValueError):
    """A probability vector does not match the inventory dimension."""


class InvalidDistributionError(AlloKitError, ValueError):
    """A probability vector is negative somewhere or does not sum to 1."""


class EmptyReferenceError(AlloKitError, ZeroDivisionError):
    """PER was requested against an empty reference."""


class BadNoiseError(AlloKitError, ValueError):
    """Noise level outside [0, 1)."""


class UnknownPhoneError(AlloKitError, KeyError):
    """A ground-truth phone is absent from the emission inventory."""


class DuplicateDocIdError(AlloKitError, ValueError):
    """Two corpus documents share a doc id."""


class EmptyDocError(AlloKitError, ValueError):
    """A corpus document has no segments."""


class EmptyQueryError(AlloKitError, ValueError):
    """Search query has no segments."""
