"""IPA string normalization, segmentation, and X-SAMPA conversion.

A segment is one base letter plus its attached marks: combining diacritics,
modifier letters (aspiration, labialization, length, ...), and tie-bar-joined
base pairs (affricates, double articulations) count as a single segment.
Segmentation happens on the canonical form produced by :func:`normalize`, so
visually identical strings tokenize identically.
"""

from __future__ import annotations

import unicodedata
import warnings
from dataclasses import dataclass
from functools import lru_cache
from importlib import resources

from .errors import InvalidIPAError, UnknownXSampaError

__all__ = [
    "Segment",
    "SegmentString",
    "normalize",
    "tokenize",
    "xsampa_to_ipa",
    "UnknownDiacriticWarning",
]


class UnknownDiacriticWarning(UserWarning):
    """A diacritic outside the curated set was kept attached to its base."""


# Base letters: the IPA letter repertoire. Ranges cover ASCII lowercase and
# the IPA Extensions block (which includes the affricate ligatures).
_BASE_RANGES = ((0x0061, 0x007A), (0x0250, 0x02AF))
_BASE_EXTRA = frozenset(
    "æçðø"  # æ ç ð ø
    "ħŋœ"        # ħ ŋ œ
    "ǀǁǂǃ"  # clicks ǀ ǁ ǂ ǃ
    "βθχ"        # Greek-letter IPA symbols β θ χ
    "ⱱ"                    # labiodental flap ⱱ
)

# Modifier letters that attach to the preceding base. Curated; anything else
# in the Lm/Sk categories (bar suprasegmentals) attaches with a warning.
_KNOWN_MODIFIERS = frozenset(
    "ʰʱʲʴʷʸ"  # ʰ ʱ ʲ ʴ ʷ ʸ
    "ʼˀˁ"                    # ʼ ˀ ˁ
    "ːˑ˞"                    # ː ˑ ˞
    "ˠˡˤ"                    # ˠ ˡ ˤ
    "ⁿᵐᵑ"                    # ⁿ ᵐ ᵑ
)

# Curated combining diacritics (voicing, articulation, nasality, ...). Other
# combining marks still attach, with an UnknownDiacriticWarning.
_KNOWN_COMBINING = frozenset(
    "̀́̃̄̆̈̊̋̏"
    "̘̙̜̝̞̟̠̤̥̩̚"
    "̴̪̬̯̰̹̺̻̼̽"
)

_TIE_BARS = frozenset("͜͡")

# Stress marks, tone letters, and break/linking symbols are out of scope;
# rejecting them keeps segment strings purely segmental.
_SUPRASEGMENTALS = frozenset(
    "ˈˌ"                  # ˈ ˌ
    "˥˦˧˨˩"  # tone letters ˥..˩
    "↑↓ꜛꜜ"      # pitch arrows
    ".|‖‿"                # break and linking marks
)


def _is_base(ch: str) -> bool:
    cp = ord(ch)
    if any(lo <= cp <= hi for lo, hi in _BASE_RANGES):
        return True
    return ch in _BASE_EXTRA


def _is_modifier(ch: str) -> bool:
    if ch in _SUPRASEGMENTALS or _is_base(ch):
        return False
    if ch in _KNOWN_MODIFIERS:
        return True
    return unicodedata.category(ch) in ("Lm", "Sk")


def _load_table(filename: str) -> dict[str, str]:
    text = resources.files("allokit.data").joinpath(filename).read_text("utf-8")
    table: dict[str, str] = {}
    for line in text.splitlines():
        line = line.rstrip("\n")
        if not line.strip() or line.lstrip().startswith("#"):
            continue
        source, target = line.split("\t")
        table[source] = target
    return table


@lru_cache(maxsize=1)
def _lookalikes() -> dict[str, str]:
    return _load_table("ipa_lookalikes.tsv")


@lru_cache(maxsize=1)
def _xsampa_table() -> dict[str, str]:
    return _load_table("xsampa_ipa.tsv")


def normalize(raw: str) -> str:
    """Return the canonical form of an IPA string.

    Composes to NFC and rewrites lookalike codepoints (Latin ``g`` for IPA
    ``ɡ``, ASCII colon for the length mark, ...) to their canonical IPA
    counterparts per the shipped substitution table. Total and idempotent;
    never raises.
    """
    if not raw:
        return raw
    # Substitute on the decomposed form so a lookalike base still gets
    # rewritten when a combining mark composed onto it (g + breve = ğ).
    decomposed = unicodedata.normalize("NFD", raw)
    table = _lookalikes()
    substituted = "".join(table.get(ch, ch) for ch in decomposed)
    return unicodedata.normalize("NFC", substituted)


@dataclass(frozen=True)
class Segment:
    """One IPA phone or phoneme unit, e.g. ``pʰ`` or ``t͡ʃ``.

    ``text`` is non-empty, whitespace-free, canonically normalized, and
    matches the segment grammar (one base letter with attached marks; tie-bar
    pairs count as one base). Construction validates.
    """

    text: str

    def __post_init__(self) -> None:
        canonical = normalize(self.text)
        if canonical != self.text:
            raise InvalidIPAError(
                f"segment {self.text!r} is not in canonical form (expected {canonical!r})"
            )
        parts = _scan(unicodedata.normalize("NFD", self.text), allow_leading_modifiers=True)
        if len(parts) != 1:
            raise InvalidIPAError(
                f"{self.text!r} does not parse as exactly one segment (got {len(parts)})"
            )

    def __str__(self) -> str:
        return self.text


@dataclass(frozen=True)
class SegmentString:
    """An ordered sequence of segments; concatenation reproduces the source."""

    segments: tuple[Segment, ...]

    @classmethod
    def from_ipa(cls, text: str) -> "SegmentString":
        """Tokenize a solid IPA string (no separators) into segments."""
        return tokenize(text)

    @classmethod
    def from_spaced(cls, text: str) -> "SegmentString":
        """Parse a whitespace-separated list of segments, one per token."""
        return cls(tuple(Segment(normalize(tok)) for tok in text.split()))

    def texts(self) -> tuple[str, ...]:
        return tuple(seg.text for seg in self.segments)

    def __iter__(self):
        return iter(self.segments)

    def __len__(self) -> int:
        return len(self.segments)

    def __str__(self) -> str:
        return "".join(seg.text for seg in self.segments)

    def spaced(self) -> str:
        return " ".join(seg.text for seg in self.segments)


def _scan(nfd: str, *, allow_leading_modifiers: bool = False) -> list[str]:
    """Split a decomposed string into NFC segment texts.

    Combining marks and modifier letters attach to the preceding base; a tie
    bar joins the next base into the current segment. With
    ``allow_leading_modifiers`` the grammar also accepts modifier letters
    before the first base (used when validating stored segments like ``ⁿd``).
    """
    parts: list[str] = []
    current: list[str] = []
    has_base = False
    pending_tie = False

    def flush() -> None:
        nonlocal has_base
        if current:
            if not has_base:
                raise InvalidIPAError(
                    f"{''.join(current)!r} contains no base letter"
                )
            parts.append(unicodedata.normalize("NFC", "".join(current)))
            current.clear()
        has_base = False

    for pos, ch in enumerate(nfd):
        if ch in _TIE_BARS:
            if not has_base:
                raise InvalidIPAError(f"tie bar at offset {pos} has no preceding base letter")
            current.append(ch)
            pending_tie = True
        elif unicodedata.combining(ch) or unicodedata.category(ch) == "Mn":
            if not has_base:
                raise InvalidIPAError(
                    f"combining mark U+{ord(ch):04X} at offset {pos} has no preceding base letter"
                )
            if ch not in _KNOWN_COMBINING:
                warnings.warn(
                    f"unknown diacritic U+{ord(ch):04X} kept attached to {''.join(current)!r}",
                    UnknownDiacriticWarning,
                    stacklevel=3,
                )
            current.append(ch)
        elif ch in _SUPRASEGMENTALS:
            raise InvalidIPAError(
                f"suprasegmental symbol {ch!r} (U+{ord(ch):04X}) at offset {pos} is not supported"
            )
        elif _is_base(ch):
            if pending_tie:
                current.append(ch)
                pending_tie = False
            else:
                if has_base:
                    flush()
                current.append(ch)
            has_base = True
        elif _is_modifier(ch):
            if not has_base and not (allow_leading_modifiers and not parts):
                raise InvalidIPAError(
                    f"modifier letter {ch!r} (U+{ord(ch):04X}) at offset {pos} "
                    "has no preceding base letter"
                )
            if ch not in _KNOWN_MODIFIERS:
                warnings.warn(
                    f"unknown modifier U+{ord(ch):04X} kept attached to {''.join(current)!r}",
                    UnknownDiacriticWarning,
                    stacklevel=3,
                )
            current.append(ch)
        else:
            raise InvalidIPAError(
                f"codepoint {ch!r} (U+{ord(ch):04X}) at offset {pos} "
                "is outside the known IPA repertoire"
            )
    if pending_tie:
        raise InvalidIPAError("dangling tie bar at end of input")
    flush()
    return parts


@lru_cache(maxsize=8192)
def _tokenize_cached(canonical: str) -> tuple[Segment, ...]:
    parts = _scan(unicodedata.normalize("NFD", canonical))
    return tuple(Segment(part) for part in parts)


def tokenize(s: str) -> SegmentString:
    """Segment an IPA string into its unique sequence of segments.

    Normalizes first, so raw input is accepted. Raises
    :class:`~allokit.errors.InvalidIPAError` on codepoints outside the IPA
    repertoire (including whitespace and suprasegmentals) and on marks with
    no preceding base.
    """
    return SegmentString(_tokenize_cached(normalize(s)))


# Longest X-SAMPA source symbol; conversion probes lengths from here down.
_MAX_XSAMPA_LEN = 4


def xsampa_to_ipa(s: str) -> str:
    """Convert an X-SAMPA string to canonical IPA by greedy longest match.

    Raises :class:`~allokit.errors.UnknownXSampaError` (with the offending
    offset) when no table entry matches.
    """
    table = _xsampa_table()
    out: list[str] = []
    i = 0
    while i < len(s):
        for length in range(_MAX_XSAMPA_LEN, 0, -1):
            chunk = s[i : i + length]
            target = table.get(chunk)
            if target is not None:
                out.append(target)
                i += length
                break
        else:
            raise UnknownXSampaError(
                f"unknown X-SAMPA symbol starting at offset {i}: {s[i:i+4]!r}", offset=i
            )
    return normalize("".join(out))
