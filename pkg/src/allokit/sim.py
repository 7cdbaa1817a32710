"""Synthetic-emission simulator contrasting three phone/phoneme architectures.

Stands in for a trained acoustic encoder: each ground-truth phone emits a
few frames of probability mass concentrated on itself, with a controlled
noise floor spread over the competing symbols. Three decoding routes are
then scored against the phonemic reference:

- ``allophone``: decode universal-phone emissions through the language's
  allophone matrix into its phoneme space;
- ``private_phoneme``: decode emissions synthesized directly in the
  language's own phoneme space;
- ``shared_phoneme``: like private, but labels come from a single global
  phone-to-phoneme map (majority vote across the scenario languages), which
  models the cross-language label collisions that make a pooled phoneme
  space noisy.

Noise stays argmax-preserving below a guard threshold, so differences in
PER isolate the label-collision effect rather than decoder luck.
"""

from __future__ import annotations

import json
from collections import Counter, defaultdict
from dataclasses import dataclass
from fractions import Fraction
from pathlib import Path
from typing import Any, Mapping

import numpy as np

from .allophone import (
    AllophoneMatrix,
    PosteriorFrames,
    UniversalInventory,
    build_allophone_matrix,
    build_universal_inventory,
    project_frames,
)
from .db import AlloDb, LanguageMapping
from .decode import corpus_per, ctc_greedy_decode
from .errors import BadNoiseError, PhoneNotInInventoryError, UnknownPhoneError
from .ipa import Segment, SegmentString

__all__ = [
    "MODEL_NAMES",
    "Utterance",
    "Scenario",
    "ModelScore",
    "ScenarioReport",
    "synthesize_emissions",
    "run_scenario",
    "load_scenario",
    "parse_scenario",
]

MODEL_NAMES = ("shared_phoneme", "private_phoneme", "allophone")

# Spread of the per-frame jitter weights over the competing symbols. The
# noise pool is redistributed with weights in [1, 1 + _JITTER_SPREAD), so a
# competitor's mass never exceeds noise * (1 + _JITTER_SPREAD) / (F - 1)
# and the true symbol keeps the argmax whenever that stays below 1 - noise.
_JITTER_SPREAD = 0.5


@dataclass(frozen=True)
class Utterance:
    """A phone-level realization paired with its phonemic reference."""

    phones: SegmentString
    phonemes: SegmentString


@dataclass(frozen=True)
class Scenario:
    """Languages with utterances, plus the emission parameters."""

    languages: tuple[tuple[str, tuple[Utterance, ...]], ...]
    noise: float = 0.0
    frames_per_segment: int = 3
    seed: int = 0


@dataclass(frozen=True)
class ModelScore:
    per_language: dict[str, Fraction]
    overall: Fraction


@dataclass(frozen=True)
class ScenarioReport:
    per_model: dict[str, ModelScore]


def synthesize_emissions(
    truth: SegmentString,
    inv: UniversalInventory,
    noise: float,
    frames_per_segment: int,
    seed: int | np.random.Generator,
) -> PosteriorFrames:
    """Emit probability frames for a ground-truth symbol sequence.

    Each symbol yields ``frames_per_segment`` frames with ``1 - noise`` on
    itself and the noise pool spread over the other non-blank symbols
    (jittered deterministically by ``seed``); a pure-blank frame separates
    consecutive symbols. With a single-symbol inventory the pool has nowhere
    to go and the symbol keeps all its mass.
    """
    if not 0.0 <= noise < 1.0:
        raise BadNoiseError(f"noise must be in [0, 1), got {noise}")
    if frames_per_segment < 1:
        raise ValueError(f"frames_per_segment must be >= 1, got {frames_per_segment}")
    rng = seed if isinstance(seed, np.random.Generator) else np.random.default_rng(seed)

    num_symbols = len(inv.phones)
    dim = num_symbols + 1
    total = len(truth) * frames_per_segment + max(0, len(truth) - 1)
    frames = np.zeros((total, dim))
    row = 0
    for k, seg in enumerate(truth):
        if k:
            frames[row, 0] = 1.0  # separator
            row += 1
        try:
            idx = inv.index_of(seg.text)
        except PhoneNotInInventoryError:
            raise UnknownPhoneError(seg.text) from None
        others = [i for i in range(1, dim) if i != idx]
        for _ in range(frames_per_segment):
            if noise > 0.0 and others:
                weights = 1.0 + _JITTER_SPREAD * rng.random(len(others))
                weights /= weights.sum()
                frames[row, others] = noise * weights
                frames[row, idx] = 1.0 - noise
            else:
                frames[row, idx] = 1.0
            row += 1
    return PosteriorFrames(frames=frames, labels=inv.phones)


def _pick_mapping(db: AlloDb, iso: str) -> LanguageMapping:
    candidates = db.by_iso(iso)
    if not candidates:
        raise KeyError(f"scenario language {iso!r} not in database")
    return candidates[0]  # db order is sorted by key, so this is stable


def _first_phoneme(lang: LanguageMapping, phone: str) -> str:
    phonemes = lang.phonemes_of(phone)
    if not phonemes:
        raise UnknownPhoneError(f"{phone!r} has no phoneme in {lang.iso}")
    return phonemes[0]


def _majority_phone_map(mappings: list[LanguageMapping]) -> dict[str, str]:
    """One global phone-to-phoneme label per phone, by cross-language vote.

    Each language votes for its own (canonically-first) phoneme of the
    phone; ties go to the canonically-first candidate.
    """
    votes: dict[str, Counter[str]] = defaultdict(Counter)
    for lang in mappings:
        for phone in lang.phone_set():
            votes[phone][_first_phoneme(lang, phone)] += 1
    return {
        phone: min(counts.items(), key=lambda kv: (-kv[1], kv[0]))[0]
        for phone, counts in votes.items()
    }


def _relabel(truth: SegmentString, label_of: Mapping[str, str]) -> SegmentString:
    try:
        return SegmentString(tuple(Segment(label_of[seg.text]) for seg in truth))
    except KeyError as exc:
        raise UnknownPhoneError(str(exc)) from None


def run_scenario(scenario: Scenario, db: AlloDb) -> ScenarioReport:
    """Score the three architectures on every utterance of a scenario.

    Per-utterance randomness derives from (seed, language index, utterance
    index), so results do not depend on evaluation order.
    """
    inv = build_universal_inventory(db)
    mappings = {iso: _pick_mapping(db, iso) for iso, _ in scenario.languages}
    matrices: dict[str, AllophoneMatrix] = {
        iso: build_allophone_matrix(lang, inv) for iso, lang in mappings.items()
    }
    private_invs = {
        iso: UniversalInventory.from_symbols(lang.phoneme_set())
        for iso, lang in mappings.items()
    }
    scenario_langs = [mappings[iso] for iso, _ in scenario.languages]
    global_map = _majority_phone_map(scenario_langs)
    shared_inv = UniversalInventory.from_symbols(
        symbol for lang in scenario_langs for symbol in lang.phoneme_set()
    )

    pairs: dict[tuple[str, str], list[tuple[SegmentString, SegmentString]]] = defaultdict(list)
    for li, (iso, utterances) in enumerate(scenario.languages):
        lang = mappings[iso]
        matrix = matrices[iso]
        private_inv = private_invs[iso]
        private_map = {phone: _first_phoneme(lang, phone) for phone in lang.phone_set()}
        for ui, utt in enumerate(utterances):
            streams = np.random.SeedSequence(entropy=(scenario.seed, li, ui)).spawn(3)
            rngs = [np.random.default_rng(s) for s in streams]

            shared_truth = _relabel(utt.phones, global_map)
            shared_frames = synthesize_emissions(
                shared_truth, shared_inv, scenario.noise, scenario.frames_per_segment, rngs[0]
            )
            pairs[("shared_phoneme", iso)].append(
                (utt.phonemes, ctc_greedy_decode(shared_frames))
            )

            private_truth = _relabel(utt.phones, private_map)
            private_frames = synthesize_emissions(
                private_truth, private_inv, scenario.noise, scenario.frames_per_segment, rngs[1]
            )
            pairs[("private_phoneme", iso)].append(
                (utt.phonemes, ctc_greedy_decode(private_frames))
            )

            phone_frames = synthesize_emissions(
                utt.phones, inv, scenario.noise, scenario.frames_per_segment, rngs[2]
            )
            projected = project_frames(phone_frames, matrix)
            pairs[("allophone", iso)].append(
                (utt.phonemes, ctc_greedy_decode(projected))
            )

    per_model: dict[str, ModelScore] = {}
    for model in MODEL_NAMES:
        per_language = {
            iso: corpus_per(pairs[(model, iso)]) for iso, _ in scenario.languages
        }
        overall = corpus_per(
            [pair for iso, _ in scenario.languages for pair in pairs[(model, iso)]]
        )
        per_model[model] = ModelScore(per_language=per_language, overall=overall)
    return ScenarioReport(per_model=per_model)


def parse_scenario(doc: Mapping[str, Any]) -> Scenario:
    """Build a scenario from its JSON object form (see ``load_scenario``)."""
    languages = []
    for lang in doc["languages"]:
        utterances = tuple(
            Utterance(
                phones=SegmentString.from_spaced(u["phones"]),
                phonemes=SegmentString.from_spaced(u["phonemes"]),
            )
            for u in lang["utterances"]
        )
        languages.append((lang["iso"], utterances))
    return Scenario(
        languages=tuple(languages),
        noise=float(doc.get("noise", 0.0)),
        frames_per_segment=int(doc.get("frames_per_segment", 3)),
        seed=int(doc.get("seed", 0)),
    )


def load_scenario(path: str | Path) -> Scenario:
    """Read a scenario file: JSON with ``languages`` (each ``iso`` plus
    ``utterances`` of space-separated ``phones``/``phonemes``), ``noise``,
    ``frames_per_segment``, and ``seed``."""
    return parse_scenario(json.loads(Path(path).read_text("utf-8")))
