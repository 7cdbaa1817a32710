"""Universal phone inventory, per-language allophone matrices, and projection.

The inventory is the ordered union of every phone across all loaded
languages, with index 0 reserved for the CTC blank. A language's allophone
matrix is the binary phoneme-by-phone incidence read off its mapping
entries; projecting a phone distribution through it yields that language's
phoneme distribution.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Iterable, Literal

import numpy as np

from .db import AlloDb, LanguageMapping
from .errors import (
    DimensionMismatchError,
    EmptyDbError,
    InvalidDistributionError,
    PhoneNotInInventoryError,
)

__all__ = [
    "BLANK",
    "UniversalInventory",
    "AllophoneMatrix",
    "Distribution",
    "PosteriorFrames",
    "build_universal_inventory",
    "build_allophone_matrix",
    "project",
    "project_raw",
    "project_frames",
]

BLANK = "<blk>"

# Tolerance for "rows sum to 1" checks on probability vectors.
_SUM_TOL = 1e-9

Pooling = Literal["max", "sum"]


@dataclass(frozen=True)
class UniversalInventory:
    """Ordered symbol inventory with the blank reserved at index 0.

    ``phones`` excludes the blank; symbol ``phones[i]`` lives at vector
    index ``i + 1``. Symbols are deduplicated and sorted by codepoint order,
    so the inventory is identical no matter the order languages were loaded.
    """

    phones: tuple[str, ...]
    _index: dict[str, int] = field(init=False, repr=False, compare=False)

    blank_index = 0

    def __post_init__(self) -> None:
        if len(set(self.phones)) != len(self.phones):
            raise ValueError("inventory symbols must be unique")
        if BLANK in self.phones:
            raise ValueError("blank symbol cannot be an inventory phone")
        object.__setattr__(self, "_index", {p: i + 1 for i, p in enumerate(self.phones)})

    @classmethod
    def from_symbols(cls, symbols: Iterable[str]) -> "UniversalInventory":
        return cls(phones=tuple(sorted(set(symbols))))

    def __len__(self) -> int:
        """Vector dimension: phones plus the blank."""
        return len(self.phones) + 1

    def __contains__(self, phone: str) -> bool:
        return phone in self._index

    def index_of(self, phone: str) -> int:
        try:
            return self._index[phone]
        except KeyError:
            raise PhoneNotInInventoryError(phone) from None

    def symbol_at(self, index: int) -> str:
        if index == self.blank_index:
            return BLANK
        return self.phones[index - 1]


@dataclass(frozen=True, eq=False)
class AllophoneMatrix:
    """Binary phoneme-by-phone incidence for one language.

    ``incidence[p, f]`` is 1 iff universal phone ``inventory.phones[f]`` is
    an allophone of ``phonemes[p]`` in this language. Every phoneme row has
    at least one 1; columns of phones the language lacks are all zero.
    """

    language: tuple[str, str]
    phonemes: tuple[str, ...]
    incidence: np.ndarray
    inventory: UniversalInventory

    def __post_init__(self) -> None:
        expected = (len(self.phonemes), len(self.inventory.phones))
        if self.incidence.shape != expected:
            raise DimensionMismatchError(
                f"incidence shape {self.incidence.shape} != {expected}"
            )
        self.incidence.setflags(write=False)

    def phoneme_index(self, phoneme: str) -> int:
        """Vector index of a phoneme in projected distributions (blank at 0)."""
        return self.phonemes.index(phoneme) + 1


@dataclass(frozen=True, eq=False)
class Distribution:
    """A probability vector over an inventory (blank at index 0)."""

    values: np.ndarray

    def __post_init__(self) -> None:
        values = np.array(self.values, dtype=float)  # copy: callers keep their array
        object.__setattr__(self, "values", values)
        if values.ndim != 1:
            raise InvalidDistributionError(f"expected a vector, got shape {values.shape}")
        _check_rows(values[np.newaxis, :])
        values.setflags(write=False)

    def argmax(self) -> int:
        return int(np.argmax(self.values))


@dataclass(frozen=True, eq=False)
class PosteriorFrames:
    """A time-indexed stack of probability rows over one inventory.

    ``frames`` has shape (T, N+1): N labeled symbols plus the blank at
    column 0. ``labels`` names the non-blank columns in order.
    """

    frames: np.ndarray
    labels: tuple[str, ...]

    def __post_init__(self) -> None:
        frames = np.array(self.frames, dtype=float)  # copy: callers keep their array
        if frames.size == 0:
            frames = frames.reshape(0, len(self.labels) + 1)
        if frames.ndim != 2 or frames.shape[1] != len(self.labels) + 1:
            raise DimensionMismatchError(
                f"frames shape {frames.shape} does not match {len(self.labels)} labels + blank"
            )
        _check_rows(frames)
        object.__setattr__(self, "frames", frames)
        frames.setflags(write=False)

    def __len__(self) -> int:
        return self.frames.shape[0]


def _check_rows(rows: np.ndarray) -> None:
    """Every row must be a probability distribution (within tolerance)."""
    if rows.shape[0] == 0:
        return
    if np.any(rows < 0):
        raise InvalidDistributionError("negative probability entry")
    sums = rows.sum(axis=1)
    worst = float(np.max(np.abs(sums - 1.0)))
    if worst > _SUM_TOL:
        raise InvalidDistributionError(f"row sums off by up to {worst!r} from 1")


def build_universal_inventory(db: AlloDb) -> UniversalInventory:
    """Union of all entry phones across all languages, canonically ordered."""
    if len(db) == 0:
        raise EmptyDbError("cannot build an inventory from an empty database")
    return UniversalInventory.from_symbols(db.phone_set())


def build_allophone_matrix(lang: LanguageMapping, inv: UniversalInventory) -> AllophoneMatrix:
    """Read a language's binary phoneme-by-phone incidence off its entries.

    Raises :class:`~allokit.errors.PhoneNotInInventoryError` if the language
    uses a phone the inventory lacks.
    """
    phonemes = tuple(sorted(lang.phoneme_set()))
    row = {p: i for i, p in enumerate(phonemes)}
    incidence = np.zeros((len(phonemes), len(inv.phones)), dtype=np.uint8)
    for entry in lang.entries:
        phone = str(entry.phone)
        if phone not in inv:
            raise PhoneNotInInventoryError(phone)
        incidence[row[str(entry.phoneme)], inv.index_of(phone) - 1] = 1
    return AllophoneMatrix(
        language=lang.key, phonemes=phonemes, incidence=incidence, inventory=inv
    )


def _pool_rows(rows: np.ndarray, matrix: AllophoneMatrix, pooling: Pooling) -> np.ndarray:
    """Pool (T, F+1) phone rows into (T, P+1) raw phoneme scores."""
    phone_part = rows[:, 1:]
    if pooling == "max":
        mask = matrix.incidence.astype(bool)
        scores = np.where(mask[np.newaxis, :, :], phone_part[:, np.newaxis, :], 0.0).max(axis=2)
    elif pooling == "sum":
        scores = phone_part @ matrix.incidence.T.astype(float)
    else:
        raise ValueError(f"unknown pooling {pooling!r}")
    return np.concatenate((rows[:, :1], scores), axis=1)


def _renormalize_rows(raw: np.ndarray) -> np.ndarray:
    """Scale rows to sum to 1; a zero-mass row becomes a blank one-hot."""
    out = raw.astype(float).copy()
    totals = out.sum(axis=1)
    dead = totals <= 0.0
    if np.any(dead):
        out[dead] = 0.0
        out[dead, 0] = 1.0
        totals = out.sum(axis=1)
    return out / totals[:, np.newaxis]


def project_raw(
    phone_dist: Distribution | np.ndarray,
    matrix: AllophoneMatrix,
    pooling: Pooling = "max",
) -> np.ndarray:
    """Pooled phoneme scores before renormalization (blank copied through)."""
    if isinstance(phone_dist, Distribution):
        values = phone_dist.values
    else:
        values = np.asarray(phone_dist, dtype=float)
        if values.ndim != 1:
            raise InvalidDistributionError(f"expected a vector, got shape {values.shape}")
        _check_rows(values[np.newaxis, :])
    if values.shape != (len(matrix.inventory),):
        raise DimensionMismatchError(
            f"distribution of dim {values.shape[0]} does not match "
            f"inventory of dim {len(matrix.inventory)}"
        )
    return _pool_rows(values[np.newaxis, :], matrix, pooling)[0]


def project(
    phone_dist: Distribution | np.ndarray,
    matrix: AllophoneMatrix,
    pooling: Pooling = "max",
) -> Distribution:
    """Project a phone distribution into one language's phoneme distribution.

    Each phoneme pools the probabilities of its allophones; the blank score
    is the input blank mass. The pooled vector is renormalized to sum to 1
    (a no-op under sum pooling with one-to-one incidence). If the language
    captures no mass at all, everything goes to the blank: the language has
    no evidence for any of its phonemes. Use :func:`project_raw` for the
    unnormalized scores.
    """
    raw = project_raw(phone_dist, matrix, pooling)
    return Distribution(_renormalize_rows(raw[np.newaxis, :])[0])


def project_frames(
    frames: PosteriorFrames,
    matrix: AllophoneMatrix,
    pooling: Pooling = "max",
) -> PosteriorFrames:
    """Apply :func:`project` to every frame; the frame count is preserved."""
    if tuple(frames.labels) != matrix.inventory.phones:
        raise DimensionMismatchError("frame labels do not match the matrix inventory")
    if len(frames) == 0:
        return PosteriorFrames(
            frames=np.zeros((0, len(matrix.phonemes) + 1)), labels=matrix.phonemes
        )
    raw = _pool_rows(frames.frames, matrix, pooling)
    return PosteriorFrames(frames=_renormalize_rows(raw), labels=matrix.phonemes)
