"""Loading, validation, and summary statistics for phoneme-allophone mapping files.

A mapping file is a JSON object with the keys ``iso``, ``glottocode``,
``primary src``, ``secondary srcs``, exactly one G2P engine key (``epitran``
or another engine identifier used as the key itself), and ``mappings``: an
array of ``{"phone", "phoneme"}`` objects with optional ``environment``,
``source``, ``glottocodes``, and ``notes`` fields.
"""

from __future__ import annotations

import json
import re
from dataclasses import dataclass, field
from importlib import resources
from pathlib import Path
from typing import Any, Mapping, Sequence, Union

from .errors import BadNError, ParseError
from .ipa import SegmentString, normalize, tokenize

__all__ = [
    "AlloEntry",
    "LanguageMapping",
    "AlloDb",
    "DbStats",
    "Issue",
    "ValidationReport",
    "load_language",
    "validate_language",
    "serialize_language",
    "load_db",
    "load_db_report",
    "stats",
    "phoible_coverage",
    "load_ranking",
    "bundled_fixture_dir",
]

_ISO_RE = re.compile(r"^[a-z]{3}$")
_GLOTTOCODE_RE = re.compile(r"^[a-z]{4}[0-9]{4}$")
# BibTeX-ish citation key: no whitespace, braces, or commas.
_CITE_KEY_RE = re.compile(r"^[^\s{},]+$")

_METADATA_KEYS = frozenset({"iso", "glottocode", "primary src", "secondary srcs", "mappings"})
_ENTRY_KEYS = frozenset({"phone", "phoneme", "environment", "source", "glottocodes", "notes"})

# BibTeX entry opener, enough to harvest the defined keys.
_BIB_ENTRY_RE = re.compile(r"@\w+\s*\{\s*([^,\s}]+)\s*,")


@dataclass(frozen=True)
class AlloEntry:
    """One phone-phoneme pair with optional free-text annotations."""

    phone: SegmentString
    phoneme: SegmentString
    environment: str | None = None
    source: str | None = None
    glottocodes: tuple[str, ...] | None = None
    notes: str | None = None


@dataclass(frozen=True)
class LanguageMapping:
    """One language's mapping file: metadata plus its phone-phoneme entries."""

    iso: str
    glottocodes: tuple[str, ...]
    primary_src: str
    secondary_srcs: tuple[str, ...]
    g2p_engine: str  # JSON key naming the G2P engine, e.g. "epitran"
    g2p: str         # engine-specific identifier, e.g. "spa-Latn"
    entries: tuple[AlloEntry, ...]

    @property
    def key(self) -> tuple[str, str]:
        return (self.iso, self.g2p)

    def phone_set(self) -> frozenset[str]:
        return frozenset(str(e.phone) for e in self.entries)

    def phoneme_set(self) -> frozenset[str]:
        return frozenset(str(e.phoneme) for e in self.entries)

    def phones_of(self, phoneme: str) -> tuple[str, ...]:
        """Allophones of one phoneme symbol, in canonical order."""
        target = normalize(phoneme)
        return tuple(sorted({str(e.phone) for e in self.entries if str(e.phoneme) == target}))

    def phonemes_of(self, phone: str) -> tuple[str, ...]:
        """Phoneme symbols that the given phone realizes, in canonical order."""
        target = normalize(phone)
        return tuple(sorted({str(e.phoneme) for e in self.entries if str(e.phone) == target}))


@dataclass(frozen=True)
class AlloDb:
    """An immutable set of language mappings keyed by (iso, g2p identifier)."""

    languages: tuple[LanguageMapping, ...]

    def __post_init__(self) -> None:
        keys = [lang.key for lang in self.languages]
        if len(keys) != len(set(keys)):
            raise ParseError("duplicate (iso, g2p) keys in database")
        ordered = tuple(sorted(self.languages, key=lambda lang: lang.key))
        object.__setattr__(self, "languages", ordered)

    def __len__(self) -> int:
        return len(self.languages)

    def by_iso(self, iso: str) -> tuple[LanguageMapping, ...]:
        return tuple(lang for lang in self.languages if lang.iso == iso)

    def get(self, iso: str, g2p: str | None = None) -> LanguageMapping:
        for lang in self.languages:
            if lang.iso == iso and (g2p is None or lang.g2p == g2p):
                return lang
        raise KeyError(f"no language {iso!r} (g2p={g2p!r}) in database")

    def phone_set(self) -> frozenset[str]:
        out: set[str] = set()
        for lang in self.languages:
            out |= lang.phone_set()
        return frozenset(out)

    def phoneme_symbol_set(self) -> frozenset[str]:
        out: set[str] = set()
        for lang in self.languages:
            out |= lang.phoneme_set()
        return frozenset(out)


@dataclass(frozen=True)
class DbStats:
    """Per-language and database-wide phone/phoneme counts over distinct symbols."""

    per_language: dict[str, tuple[int, int]]  # iso -> (phoneme count, phone count)
    total_phones: int
    total_phoneme_symbols: int


@dataclass(frozen=True)
class Issue:
    file: str
    path: str
    code: str
    message: str

    def __str__(self) -> str:
        return f"{self.file}:{self.path}: {self.code}: {self.message}"


@dataclass
class ValidationReport:
    errors: list[Issue] = field(default_factory=list)
    warnings: list[Issue] = field(default_factory=list)

    @property
    def ok(self) -> bool:
        return not self.errors

    def error(self, file: str, path: str, code: str, message: str) -> None:
        self.errors.append(Issue(file, path, code, message))

    def warn(self, file: str, path: str, code: str, message: str) -> None:
        self.warnings.append(Issue(file, path, code, message))

    def extend(self, other: "ValidationReport") -> None:
        self.errors.extend(other.errors)
        self.warnings.extend(other.warnings)


Document = Union[str, bytes, Mapping[str, Any]]


def _as_object(document: Document, filename: str) -> Mapping[str, Any]:
    if isinstance(document, Mapping):
        return document
    try:
        obj = json.loads(document)
    except json.JSONDecodeError as exc:
        raise ParseError(f"{filename}: malformed JSON: {exc}") from exc
    if not isinstance(obj, dict):
        raise ParseError(f"{filename}: top-level value must be an object")
    return obj


def _check_cite_key(value: Any, report: ValidationReport, filename: str, path: str) -> str:
    if not isinstance(value, str):
        report.error(filename, path, "BadType", f"expected string, got {type(value).__name__}")
        return ""
    if not _CITE_KEY_RE.match(value):
        report.warn(filename, path, "BadCitationKey", f"odd citation key shape: {value!r}")
    return value


def _parse_segments(
    value: Any, report: ValidationReport, filename: str, path: str
) -> SegmentString | None:
    if not isinstance(value, str):
        report.error(filename, path, "BadType", f"expected string, got {type(value).__name__}")
        return None
    if not value:
        report.error(filename, path, "UntokenizableSymbol", "empty symbol string")
        return None
    try:
        return tokenize(value)
    except Exception as exc:
        report.error(filename, path, "UntokenizableSymbol", str(exc))
        return None


def _parse_language(
    document: Document, filename: str
) -> tuple[LanguageMapping | None, ValidationReport]:
    report = ValidationReport()
    obj = _as_object(document, filename)

    iso = obj.get("iso")
    if iso is None:
        report.error(filename, "/iso", "MissingField", "required field 'iso' is missing")
    elif not isinstance(iso, str) or not _ISO_RE.match(iso):
        report.error(filename, "/iso", "BadIso", f"not a 3-letter lowercase ISO 639-3 code: {iso!r}")

    glottocodes: tuple[str, ...] = ()
    raw_glotto = obj.get("glottocode")
    if raw_glotto is None:
        report.error(filename, "/glottocode", "MissingField", "required field 'glottocode' is missing")
    elif not isinstance(raw_glotto, list) or not raw_glotto:
        report.error(filename, "/glottocode", "BadGlottocode", "must be a non-empty array of codes")
    else:
        for i, code in enumerate(raw_glotto):
            if not isinstance(code, str) or not _GLOTTOCODE_RE.match(code):
                report.error(
                    filename, f"/glottocode/{i}", "BadGlottocode",
                    f"not a 4-letter + 4-digit lect code: {code!r}",
                )
        glottocodes = tuple(code for code in raw_glotto if isinstance(code, str))

    if "primary src" in obj:
        primary_src = _check_cite_key(obj["primary src"], report, filename, "/primary src")
    else:
        primary_src = ""
        report.error(filename, "/primary src", "MissingField", "required field 'primary src' is missing")

    secondary: tuple[str, ...] = ()
    if "secondary srcs" in obj:
        raw_secondary = obj["secondary srcs"]
        if not isinstance(raw_secondary, list):
            report.error(filename, "/secondary srcs", "BadType", "must be an array of citation keys")
        else:
            secondary = tuple(
                _check_cite_key(v, report, filename, f"/secondary srcs/{i}")
                for i, v in enumerate(raw_secondary)
            )
    else:
        report.warn(filename, "/secondary srcs", "MissingField",
                    "'secondary srcs' missing; assuming no secondary sources")

    engine_keys = [
        k for k, v in obj.items()
        if k not in _METADATA_KEYS and isinstance(v, str)
    ]
    for k in obj:
        if k not in _METADATA_KEYS and k not in engine_keys:
            report.warn(filename, f"/{k}", "UnknownField", "unrecognized non-string field ignored")
    g2p_engine = ""
    g2p = ""
    if not engine_keys:
        report.error(filename, "/", "MissingField",
                     "no G2P engine key ('epitran' or another engine identifier)")
    elif len(engine_keys) > 1:
        report.error(filename, "/", "DuplicateG2P",
                     f"multiple G2P engine keys: {sorted(engine_keys)}")
    else:
        g2p_engine = engine_keys[0]
        g2p = obj[g2p_engine]

    entries: list[AlloEntry] = []
    raw_mappings = obj.get("mappings")
    if raw_mappings is None:
        report.error(filename, "/mappings", "MissingField", "required field 'mappings' is missing")
    elif not isinstance(raw_mappings, list):
        report.error(filename, "/mappings", "BadType", "must be an array of mapping objects")
    elif not raw_mappings:
        report.error(filename, "/mappings", "EmptyMappings", "mappings array is empty")
    else:
        for i, raw in enumerate(raw_mappings):
            path = f"/mappings/{i}"
            if not isinstance(raw, dict):
                report.error(filename, path, "BadType", "mapping entry must be an object")
                continue
            for k in raw:
                if k not in _ENTRY_KEYS:
                    report.warn(filename, f"{path}/{k}", "UnknownField", "unrecognized field ignored")
            phone = phoneme = None
            if "phone" not in raw:
                report.error(filename, f"{path}/phone", "MissingField", "entry lacks 'phone'")
            else:
                phone = _parse_segments(raw["phone"], report, filename, f"{path}/phone")
            if "phoneme" not in raw:
                report.error(filename, f"{path}/phoneme", "MissingField", "entry lacks 'phoneme'")
            else:
                phoneme = _parse_segments(raw["phoneme"], report, filename, f"{path}/phoneme")

            entry_glotto: tuple[str, ...] | None = None
            if "glottocodes" in raw:
                raw_eg = raw["glottocodes"]
                if not isinstance(raw_eg, list) or not raw_eg:
                    report.error(filename, f"{path}/glottocodes", "BadGlottocode",
                                 "entry glottocodes must be a non-empty array")
                else:
                    unknown = [c for c in raw_eg if c not in glottocodes]
                    if unknown:
                        report.error(filename, f"{path}/glottocodes", "UnknownGlottocodeSubset",
                                     f"not in the file's global glottocode list: {unknown}")
                    entry_glotto = tuple(str(c) for c in raw_eg)

            source = raw.get("source")
            if source is not None:
                source = _check_cite_key(source, report, filename, f"{path}/source")

            if phone is not None and phoneme is not None:
                entries.append(AlloEntry(
                    phone=phone,
                    phoneme=phoneme,
                    environment=raw.get("environment"),
                    source=source,
                    glottocodes=entry_glotto,
                    notes=raw.get("notes"),
                ))

    if report.errors:
        return None, report
    mapping = LanguageMapping(
        iso=iso,
        glottocodes=glottocodes,
        primary_src=primary_src,
        secondary_srcs=secondary,
        g2p_engine=g2p_engine,
        g2p=g2p,
        entries=tuple(entries),
    )
    return mapping, report


def load_language(
    document: Document, *, filename: str = "<memory>"
) -> LanguageMapping | ValidationReport:
    """Parse and validate one mapping file.

    Returns the :class:`LanguageMapping` when all error-level checks pass,
    otherwise the :class:`ValidationReport` describing what failed. Raises
    :class:`~allokit.errors.ParseError` only for malformed JSON.
    """
    mapping, report = _parse_language(document, filename)
    return mapping if mapping is not None else report


def validate_language(document: Document, *, filename: str = "<memory>") -> ValidationReport:
    """Validate one mapping file, returning errors and warnings."""
    try:
        _, report = _parse_language(document, filename)
    except ParseError as exc:
        report = ValidationReport()
        report.error(filename, "/", "ParseError", str(exc))
    return report


def serialize_language(mapping: LanguageMapping) -> str:
    """Write a mapping back to canonical JSON text (the round-trip writer)."""
    doc: dict[str, Any] = {
        "iso": mapping.iso,
        "glottocode": list(mapping.glottocodes),
        "primary src": mapping.primary_src,
        "secondary srcs": list(mapping.secondary_srcs),
        mapping.g2p_engine: mapping.g2p,
    }
    out_entries: list[dict[str, Any]] = []
    for entry in mapping.entries:
        raw: dict[str, Any] = {"phone": str(entry.phone), "phoneme": str(entry.phoneme)}
        if entry.environment is not None:
            raw["environment"] = entry.environment
        if entry.source is not None:
            raw["source"] = entry.source
        if entry.glottocodes is not None:
            raw["glottocodes"] = list(entry.glottocodes)
        if entry.notes is not None:
            raw["notes"] = entry.notes
        out_entries.append(raw)
    doc["mappings"] = out_entries
    return json.dumps(doc, ensure_ascii=False, indent=4) + "\n"


def load_db_report(directory: str | Path) -> tuple[AlloDb | None, ValidationReport]:
    """Load a mapping directory, returning both outcomes.

    The database (None when any error-level check failed) and the full
    report with every error and warning across all files.
    """
    directory = Path(directory)
    if not directory.is_dir():
        raise FileNotFoundError(f"not a directory: {directory}")
    report = ValidationReport()
    files = sorted(directory.glob("*.json"))
    if not files:
        report.error(str(directory), "/", "EmptyDb", "no .json mapping files found")
        return None, report

    accepted: list[LanguageMapping] = []
    seen: dict[tuple[str, str], str] = {}
    for path in files:
        name = path.name
        try:
            text = path.read_text("utf-8")
        except OSError as exc:
            report.error(name, "/", "IoError", str(exc))
            continue
        try:
            mapping, file_report = _parse_language(text, name)
        except ParseError as exc:
            report.error(name, "/", "ParseError", str(exc))
            continue
        report.extend(file_report)
        if mapping is None:
            continue
        if mapping.key in seen:
            report.error(name, "/", "DuplicateLanguageKey",
                         f"key {mapping.key} already used by {seen[mapping.key]}")
            continue
        seen[mapping.key] = name
        accepted.append(mapping)

    _check_bibliography(directory, accepted, seen, report)
    if report.errors:
        return None, report
    return AlloDb(languages=tuple(accepted)), report


def _check_bibliography(
    directory: Path,
    mappings: list[LanguageMapping],
    filenames: dict[tuple[str, str], str],
    report: ValidationReport,
) -> None:
    """Warn about citation keys absent from a sibling ``.bib`` file.

    The bibliography ships separately from the mapping files, so a missing
    ``.bib`` is normal (no check) and unknown keys are warnings, not errors.
    """
    bib_files = sorted(directory.glob("*.bib"))
    if not bib_files:
        return
    known: set[str] = set()
    for path in bib_files:
        try:
            known |= set(_BIB_ENTRY_RE.findall(path.read_text("utf-8")))
        except OSError as exc:
            report.warn(path.name, "/", "IoError", str(exc))
    for mapping in mappings:
        name = filenames[mapping.key]

        def check(key: str, path: str) -> None:
            if key and key not in known:
                report.warn(name, path, "UnknownCitationKey",
                            f"{key!r} not defined in the bibliography")

        check(mapping.primary_src, "/primary src")
        for i, key in enumerate(mapping.secondary_srcs):
            check(key, f"/secondary srcs/{i}")
        for i, entry in enumerate(mapping.entries):
            if entry.source is not None:
                check(entry.source, f"/mappings/{i}/source")


def load_db(directory: str | Path) -> AlloDb | ValidationReport:
    """Load every ``*.json`` mapping file in a directory.

    Returns the database when every file is accepted; otherwise a report
    aggregating all failures (including per-file parse errors, duplicate
    (iso, g2p) keys, and an ``EmptyDb`` error for a directory with no
    mapping files). Raises :class:`FileNotFoundError` if the directory
    does not exist.
    """
    db, report = load_db_report(directory)
    return db if db is not None else report


def stats(db: AlloDb) -> DbStats:
    """Distinct phoneme/phone counts per language and over the whole database.

    Counts are over normalized segment strings, so a symbol shared by several
    languages counts once in the totals. Mappings sharing an ISO code are
    merged for the per-language row.
    """
    per_iso: dict[str, tuple[set[str], set[str]]] = {}
    for lang in db.languages:
        phonemes, phones = per_iso.setdefault(lang.iso, (set(), set()))
        phonemes |= lang.phoneme_set()
        phones |= lang.phone_set()
    per_language = {
        iso: (len(phonemes), len(phones))
        for iso, (phonemes, phones) in sorted(per_iso.items())
    }
    return DbStats(
        per_language=per_language,
        total_phones=len(db.phone_set()),
        total_phoneme_symbols=len(db.phoneme_symbol_set()),
    )


def phoible_coverage(db: AlloDb, ranked_phones: Sequence[str], n: int) -> int:
    """How many of the first ``n`` ranked phones appear in the database.

    Both sides are normalized before intersecting. Raises
    :class:`~allokit.errors.BadNError` when ``n`` is negative or exceeds the
    ranking length.
    """
    if n < 0 or n > len(ranked_phones):
        raise BadNError(f"n={n} out of range for ranking of length {len(ranked_phones)}")
    top = {normalize(p) for p in ranked_phones[:n]}
    return len(top & db.phone_set())


def load_ranking(path: str | Path) -> list[str]:
    """Read a phone ranking file: one phone per line, most common first."""
    out: list[str] = []
    for line in Path(path).read_text("utf-8").splitlines():
        line = line.strip()
        if line and not line.startswith("#"):
            out.append(normalize(line))
    return out


def bundled_fixture_dir() -> Path:
    """Directory holding the small mapping files shipped for demos and tests."""
    return Path(str(resources.files("allokit.data").joinpath("fixtures")))
