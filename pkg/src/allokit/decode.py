"""CTC greedy decoding and phoneme-error-rate scoring.

Decoding takes the per-frame argmax path, collapses consecutive repeats,
and drops blanks. Scoring is unit-cost Levenshtein over segments (never
codepoints), reported with the operation counts of one deterministic
optimal alignment.
"""

from __future__ import annotations

from dataclasses import dataclass
from fractions import Fraction
from typing import Iterable, Sequence

import numpy as np

from .allophone import PosteriorFrames
from .errors import EmptyReferenceError
from .ipa import Segment, SegmentString

__all__ = [
    "EvalResult",
    "ctc_greedy_decode",
    "collapse_path",
    "edit_distance",
    "corpus_per",
]


@dataclass(frozen=True)
class EvalResult:
    """Edit distance between a reference and a hypothesis, with op counts.

    ``distance == substitutions + insertions + deletions`` for the reported
    alignment. ``per`` is exact (a Fraction) and may exceed 1.
    """

    distance: int
    substitutions: int
    insertions: int
    deletions: int
    ref_len: int

    @property
    def per(self) -> Fraction:
        if self.ref_len == 0:
            raise EmptyReferenceError("PER is undefined for an empty reference")
        return Fraction(self.distance, self.ref_len)


def collapse_path(indices: Sequence[int], blank_index: int = 0) -> list[int]:
    """CTC collapse of a label path: merge repeats, then remove blanks."""
    out: list[int] = []
    prev: int | None = None
    for idx in indices:
        if idx != prev and idx != blank_index:
            out.append(idx)
        prev = idx
    return out


def ctc_greedy_decode(frames: PosteriorFrames) -> SegmentString:
    """Best-path decode: frame-wise argmax, collapse repeats, drop blanks.

    Ties go to the lowest index, so the blank (index 0) wins any tie it is
    part of.
    """
    if len(frames) == 0:
        return SegmentString(())
    path = np.argmax(frames.frames, axis=1)
    labels = frames.labels
    return SegmentString(tuple(Segment(labels[i - 1]) for i in collapse_path(path.tolist())))


def _texts(s: SegmentString | Sequence[str]) -> tuple[str, ...]:
    if isinstance(s, SegmentString):
        return s.texts()
    return tuple(s)


def edit_distance(ref: SegmentString | Sequence[str], hyp: SegmentString | Sequence[str]) -> EvalResult:
    """Unit-cost Levenshtein over segments with a deterministic alignment.

    The reported operation counts come from one optimal alignment, with ties
    broken substitution-first, then deletion, then insertion.
    """
    r = _texts(ref)
    h = _texts(hyp)
    m, n = len(r), len(h)
    # dp[i][j]: distance between r[:i] and h[:j]
    dp = [[0] * (n + 1) for _ in range(m + 1)]
    for i in range(1, m + 1):
        dp[i][0] = i
    dp[0] = list(range(n + 1))
    for i in range(1, m + 1):
        row = dp[i]
        prev = dp[i - 1]
        ri = r[i - 1]
        for j in range(1, n + 1):
            diag = prev[j - 1] + (ri != h[j - 1])
            up = prev[j] + 1
            left = row[j - 1] + 1
            row[j] = diag if diag <= up and diag <= left else (up if up <= left else left)

    subs = ins = dels = 0
    i, j = m, n
    while i > 0 or j > 0:
        cost = dp[i][j]
        if i > 0 and j > 0 and cost == dp[i - 1][j - 1] + (r[i - 1] != h[j - 1]):
            if r[i - 1] != h[j - 1]:
                subs += 1
            i -= 1
            j -= 1
        elif i > 0 and cost == dp[i - 1][j] + 1:
            dels += 1
            i -= 1
        else:
            ins += 1
            j -= 1
    return EvalResult(
        distance=dp[m][n],
        substitutions=subs,
        insertions=ins,
        deletions=dels,
        ref_len=m,
    )


def corpus_per(
    pairs: Iterable[tuple[SegmentString | Sequence[str], SegmentString | Sequence[str]]],
) -> Fraction:
    """Micro-averaged PER: total edit distance over total reference length.

    Raises :class:`~allokit.errors.EmptyReferenceError` when any reference
    (or the whole corpus) is empty.
    """
    total_distance = 0
    total_ref = 0
    for ref, hyp in pairs:
        result = edit_distance(ref, hyp)
        if result.ref_len == 0:
            raise EmptyReferenceError("corpus PER is undefined with an empty reference")
        total_distance += result.distance
        total_ref += result.ref_len
    if total_ref == 0:
        raise EmptyReferenceError("corpus PER is undefined for an empty corpus")
    return Fraction(total_distance, total_ref)
