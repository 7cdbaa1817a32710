"""Command-line entry point wiring all toolkit operations.

Exit codes: 0 success, 1 validation/data errors, 2 usage errors. Text
output is human-oriented and unstable; ``--output json`` emits one sorted,
machine-readable document and is the compatibility contract.
"""

from __future__ import annotations

import argparse
import json
import os
import sys
from fractions import Fraction
from pathlib import Path
from typing import Any

import numpy as np

from . import __version__
from .allophone import (
    PosteriorFrames,
    build_allophone_matrix,
    build_universal_inventory,
)
from .db import (
    ValidationReport,
    load_db_report,
    load_ranking,
    phoible_coverage,
    stats,
)
from .decode import corpus_per, ctc_greedy_decode, edit_distance
from .errors import AlloKitError
from .ipa import SegmentString
from .search import index_build, load_corpus, search
from .sim import MODEL_NAMES, Scenario, load_scenario, run_scenario

__all__ = ["main"]


class CliError(Exception):
    """Data-level failure; message printed, exit status 1."""

    def __init__(self, message: str, payload: dict[str, Any] | None = None) -> None:
        super().__init__(message)
        self.payload = payload or {}


def _emit(args: argparse.Namespace, payload: dict[str, Any], text: str) -> None:
    if args.output == "json":
        doc = dict(payload)
        doc.setdefault("ok", True)
        print(json.dumps(doc, ensure_ascii=False, sort_keys=True, indent=2))
    else:
        print(text)


def _report_lines(report: ValidationReport) -> str:
    lines = [f"error: {issue}" for issue in report.errors]
    lines += [f"warning: {issue}" for issue in report.warnings]
    return "\n".join(lines)


def _report_payload(report: ValidationReport) -> dict[str, Any]:
    def issues(items):
        return [
            {"file": i.file, "path": i.path, "code": i.code, "message": i.message}
            for i in items
        ]

    return {"errors": issues(report.errors), "warnings": issues(report.warnings)}


def _resolve_db_dir(args: argparse.Namespace) -> Path:
    for value in (getattr(args, "dir", None), args.db, os.environ.get("ALLOKIT_DB")):
        if value:
            return Path(value)
    raise CliError("no database directory: pass a directory, --db, or set ALLOKIT_DB")


def _load_db_or_fail(args: argparse.Namespace):
    directory = _resolve_db_dir(args)
    try:
        db, report = load_db_report(directory)
    except FileNotFoundError as exc:
        raise CliError(str(exc)) from exc
    if db is None:
        raise CliError(_report_lines(report), payload=_report_payload(report))
    return db, report


def _fraction_payload(value: Fraction) -> dict[str, Any]:
    return {
        "value": float(value),
        "numerator": value.numerator,
        "denominator": value.denominator,
    }


def _cmd_validate(args: argparse.Namespace) -> int:
    directory = _resolve_db_dir(args)
    try:
        db, report = load_db_report(directory)
    except FileNotFoundError as exc:
        raise CliError(str(exc)) from exc
    payload = _report_payload(report)
    payload["ok"] = db is not None
    if db is None:
        _emit_error_or(args, payload, _report_lines(report))
        return 1
    lines = _report_lines(report)
    summary = f"OK: {len(db)} language(s) accepted"
    _emit(args, payload | {"languages": [list(lang.key) for lang in db.languages]},
          f"{lines}\n{summary}" if lines else summary)
    return 0


def _emit_error_or(args: argparse.Namespace, payload: dict[str, Any], text: str) -> None:
    if args.output == "json":
        payload = dict(payload)
        payload["ok"] = False
        print(json.dumps(payload, ensure_ascii=False, sort_keys=True, indent=2))
    else:
        print(text)


def _cmd_stats(args: argparse.Namespace) -> int:
    db, _ = _load_db_or_fail(args)
    result = stats(db)
    rows = [f"{'iso':<6}{'phonemes':>10}{'phones':>8}"]
    for iso, (phonemes, phones) in result.per_language.items():
        rows.append(f"{iso:<6}{phonemes:>10}{phones:>8}")
    rows.append(
        f"total phones: {result.total_phones}; "
        f"total phoneme symbols: {result.total_phoneme_symbols}"
    )
    _emit(
        args,
        {
            "per_language": {
                iso: {"phonemes": p, "phones": f}
                for iso, (p, f) in result.per_language.items()
            },
            "total_phones": result.total_phones,
            "total_phoneme_symbols": result.total_phoneme_symbols,
        },
        "\n".join(rows),
    )
    return 0


def _cmd_phoible(args: argparse.Namespace) -> int:
    db, _ = _load_db_or_fail(args)
    try:
        ranking = load_ranking(args.ranking)
        coverage = phoible_coverage(db, ranking, args.top)
    except (OSError, AlloKitError) as exc:
        raise CliError(str(exc)) from exc
    _emit(
        args,
        {"top": args.top, "coverage": coverage, "ranking_size": len(ranking)},
        f"top {args.top}: {coverage} in database",
    )
    return 0


def _cmd_inventory(args: argparse.Namespace) -> int:
    db, _ = _load_db_or_fail(args)
    inventory = build_universal_inventory(db)
    _emit(args, {"phones": list(inventory.phones)}, "\n".join(inventory.phones))
    return 0


def _cmd_matrix(args: argparse.Namespace) -> int:
    db, _ = _load_db_or_fail(args)
    candidates = db.by_iso(args.lang)
    if not candidates:
        raise CliError(f"no language {args.lang!r} in database")
    lang = candidates[0]
    matrix = build_allophone_matrix(lang, build_universal_inventory(db))
    rows: dict[str, list[str]] = {}
    for p, phoneme in enumerate(matrix.phonemes):
        cols = np.nonzero(matrix.incidence[p])[0]
        rows[phoneme] = [matrix.inventory.phones[c] for c in cols]
    text = "\n".join(f"{phoneme}\t{','.join(phones)}" for phoneme, phones in rows.items())
    _emit(args, {"language": list(lang.key), "rows": rows}, text)
    return 0


def _read_frames_file(path: Path) -> PosteriorFrames:
    try:
        text = path.read_text("utf-8")
    except OSError as exc:
        raise CliError(str(exc)) from exc
    lines = [line for line in text.splitlines() if line.strip()]
    if not lines:
        raise CliError(f"{path}: empty frames file (expected a header line)")
    try:
        labels = tuple(seg.text for seg in SegmentString.from_spaced(lines[0]))
    except AlloKitError as exc:
        raise CliError(f"{path}:1: bad header symbol: {exc}") from exc
    rows = []
    for lineno, line in enumerate(lines[1:], start=2):
        try:
            values = [float(tok) for tok in line.split()]
        except ValueError as exc:
            raise CliError(f"{path}:{lineno}: {exc}") from exc
        if len(values) != len(labels) + 1:
            raise CliError(
                f"{path}:{lineno}: expected {len(labels) + 1} probabilities "
                f"(blank + {len(labels)} symbols), got {len(values)}"
            )
        rows.append(values)
    try:
        return PosteriorFrames(
            frames=np.array(rows).reshape(len(rows), len(labels) + 1), labels=labels
        )
    except AlloKitError as exc:
        raise CliError(f"{path}: {exc}") from exc


def _cmd_decode(args: argparse.Namespace) -> int:
    frames = _read_frames_file(Path(args.frames))
    try:
        decoded = ctc_greedy_decode(frames)
    except AlloKitError as exc:
        raise CliError(str(exc)) from exc
    _emit(args, {"segments": list(decoded.texts())}, decoded.spaced())
    return 0


def _read_utterances(path: Path) -> list[SegmentString]:
    try:
        return [
            SegmentString.from_spaced(line)
            for line in path.read_text("utf-8").splitlines()
        ]
    except (OSError, AlloKitError) as exc:
        raise CliError(f"{path}: {exc}") from exc


def _cmd_per(args: argparse.Namespace) -> int:
    refs = _read_utterances(Path(args.ref))
    hyps = _read_utterances(Path(args.hyp))
    if len(refs) != len(hyps):
        raise CliError(
            f"line count mismatch: {len(refs)} references vs {len(hyps)} hypotheses"
        )
    results = [edit_distance(r, h) for r, h in zip(refs, hyps)]
    try:
        overall = corpus_per(list(zip(refs, hyps)))
    except AlloKitError as exc:
        raise CliError(str(exc)) from exc
    lines = [
        f"utt {i}: distance {res.distance} ref_len {res.ref_len} per {float(res.per):.4f}"
        for i, res in enumerate(results, start=1)
    ]
    lines.append(f"corpus PER: {overall} ({float(overall):.4f})")
    _emit(
        args,
        {
            "utterances": [
                {
                    "distance": res.distance,
                    "substitutions": res.substitutions,
                    "insertions": res.insertions,
                    "deletions": res.deletions,
                    "ref_len": res.ref_len,
                }
                for res in results
            ],
            "corpus_per": _fraction_payload(overall),
        },
        "\n".join(lines),
    )
    return 0


def _cmd_simulate(args: argparse.Namespace) -> int:
    try:
        scenario = load_scenario(args.scenario)
    except (OSError, KeyError, ValueError, AlloKitError) as exc:
        raise CliError(f"{args.scenario}: {exc}") from exc
    if args.seed is not None:
        scenario = Scenario(
            languages=scenario.languages,
            noise=scenario.noise,
            frames_per_segment=scenario.frames_per_segment,
            seed=args.seed,
        )
    db, _ = _load_db_or_fail(args)
    try:
        report = run_scenario(scenario, db)
    except (KeyError, AlloKitError) as exc:
        raise CliError(str(exc)) from exc
    isos = [iso for iso, _ in scenario.languages]
    header = f"{'model':<16}" + "".join(f"{iso:>8}" for iso in isos) + f"{'overall':>9}"
    lines = [header]
    for model in MODEL_NAMES:
        score = report.per_model[model]
        cells = "".join(f"{float(score.per_language[iso]):>8.4f}" for iso in isos)
        lines.append(f"{model:<16}{cells}{float(score.overall):>9.4f}")
    _emit(
        args,
        {
            "noise": scenario.noise,
            "frames_per_segment": scenario.frames_per_segment,
            "seed": scenario.seed,
            "models": {
                model: {
                    "overall": _fraction_payload(report.per_model[model].overall),
                    "per_language": {
                        iso: _fraction_payload(per)
                        for iso, per in report.per_model[model].per_language.items()
                    },
                }
                for model in MODEL_NAMES
            },
        },
        "\n".join(lines),
    )
    return 0


def _cmd_search(args: argparse.Namespace) -> int:
    try:
        docs = load_corpus(args.corpus)
        idx = index_build(docs)
        query = SegmentString.from_spaced(args.query)
        hits = search(idx, query, k=args.k, max_normalized=args.max_norm)
    except (OSError, AlloKitError) as exc:
        raise CliError(str(exc)) from exc
    lines = [
        f"{h.doc_id}\t[{h.span[0]}:{h.span[1]}]\tdistance {h.distance}\t"
        f"normalized {h.normalized:.4f}"
        for h in hits
    ] or ["no hits"]
    _emit(
        args,
        {
            "hits": [
                {
                    "doc_id": h.doc_id,
                    "start": h.span[0],
                    "end": h.span[1],
                    "distance": h.distance,
                    "normalized": h.normalized,
                }
                for h in hits
            ]
        },
        "\n".join(lines),
    )
    return 0


def _add_global_flags(parser: argparse.ArgumentParser, *, suppress: bool) -> None:
    # Registered on the main parser and on every subparser so the flags work
    # in either position; SUPPRESS keeps subparsers from clobbering values
    # already parsed before the subcommand.
    default = argparse.SUPPRESS if suppress else None
    parser.add_argument("--db", default=default, help="database directory (or set ALLOKIT_DB)")
    parser.add_argument(
        "--output", choices=("text", "json"),
        default=argparse.SUPPRESS if suppress else "text",
        help="output mode; json emits one machine-readable document",
    )
    parser.add_argument("--seed", type=int, default=default, help="override the scenario seed")


def _build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="allokit",
        description="Phoneme-allophone mapping toolkit",
    )
    parser.add_argument("--version", action="version", version=f"allokit {__version__}")
    _add_global_flags(parser, suppress=False)
    sub = parser.add_subparsers(dest="command", metavar="command")

    def add(name: str, func, help_text: str, *, with_dir: bool = False):
        p = sub.add_parser(name, help=help_text)
        p.set_defaults(func=func)
        _add_global_flags(p, suppress=True)
        if with_dir:
            p.add_argument("dir", nargs="?", help="database directory")
        return p

    add("validate", _cmd_validate, "validate a mapping directory", with_dir=True)
    add("stats", _cmd_stats, "phoneme/phone counts per language and overall", with_dir=True)
    p = add("phoible", _cmd_phoible, "coverage of a ranked phone list", with_dir=True)
    p.add_argument("--ranking", required=True, help="one phone per line, most common first")
    p.add_argument("--top", required=True, type=int, help="how many top phones to intersect")
    add("inventory", _cmd_inventory, "print the ordered universal phone list", with_dir=True)
    p = add("matrix", _cmd_matrix, "print one language's phoneme-phone incidence", with_dir=True)
    p.add_argument("--lang", required=True, help="ISO 639-3 code")
    p = add("decode", _cmd_decode, "greedy-decode a posterior frames file")
    p.add_argument("--frames", required=True,
                   help="header line of symbols, then one line of probabilities per frame")
    p = add("per", _cmd_per, "phoneme error rate between two utterance files")
    p.add_argument("--ref", required=True, help="reference utterances, one per line")
    p.add_argument("--hyp", required=True, help="hypothesis utterances, one per line")
    p = add("simulate", _cmd_simulate, "score the three architectures on a scenario file")
    p.add_argument("--scenario", required=True, help="scenario JSON file")
    p = add("search", _cmd_search, "approximate phonetic search over a corpus file")
    p.add_argument("--corpus", required=True, help="doc_id<TAB>segments per line")
    p.add_argument("--query", required=True, help="space-separated query segments")
    p.add_argument("-k", type=int, default=5, help="maximum hits to return")
    p.add_argument("--max-norm", type=float, default=0.34,
                   help="maximum normalized distance (distance / query length)")
    return parser


def main(argv: list[str] | None = None) -> int:
    parser = _build_parser()
    args = parser.parse_args(argv)
    if not getattr(args, "func", None):
        parser.print_usage(sys.stderr)
        return 2
    try:
        return args.func(args)
    except CliError as exc:
        if args.output == "json":
            doc = dict(exc.payload)
            doc["ok"] = False
            doc.setdefault("error", str(exc))
            print(json.dumps(doc, ensure_ascii=False, sort_keys=True, indent=2))
        else:
            print(str(exc))
        return 1


if __name__ == "__main__":
    sys.exit(main())
