"""Shared fixtures: the bundled database and in-memory mapping builders."""

from __future__ import annotations

import pytest

from allokit.db import AlloDb, LanguageMapping, bundled_fixture_dir, load_db, load_language
from allokit.ipa import SegmentString
from allokit.sim import Scenario, Utterance


def make_language(
    iso: str,
    pairs: list[tuple[str, str]],
    *,
    glottocodes: list[str] | None = None,
    g2p: str = "test-Latn",
) -> LanguageMapping:
    """Build a validated LanguageMapping from (phone, phoneme) pairs."""
    doc = {
        "iso": iso,
        "glottocode": glottocodes or ["test1234"],
        "primary src": "Test:2020-fixture",
        "secondary srcs": [],
        "epitran": g2p,
        "mappings": [{"phone": phone, "phoneme": phoneme} for phone, phoneme in pairs],
    }
    result = load_language(doc, filename=f"{iso}.json")
    assert isinstance(result, LanguageMapping), result
    return result


def make_db(*languages: LanguageMapping) -> AlloDb:
    return AlloDb(languages=tuple(languages))


def restricted_eng() -> LanguageMapping:
    """English reduced to the two-word demo: /p/ with two allophones."""
    return make_language("eng", [("p", "p"), ("pʰ", "p"), ("i", "i"), ("k", "k")])


def scenario_eng() -> LanguageMapping:
    """Like restricted_eng plus /s/, enough to transcribe 'speak'."""
    return make_language(
        "eng", [("p", "p"), ("pʰ", "p"), ("i", "i"), ("k", "k"), ("s", "s")]
    )


def restricted_cmn() -> LanguageMapping:
    """Mandarin demo slice: /pʰ/ and /p/ each with one identical allophone."""
    return make_language("cmn", [("pʰ", "pʰ"), ("p", "p"), ("i", "i"), ("ŋ", "ŋ")])


def two_word_scenario(noise: float = 0.0, seed: int = 0) -> Scenario:
    """peak/speak vs ping/bing: the aspirated-p collision scenario."""

    def utt(phones: str, phonemes: str) -> Utterance:
        return Utterance(
            phones=SegmentString.from_spaced(phones),
            phonemes=SegmentString.from_spaced(phonemes),
        )

    return Scenario(
        languages=(
            ("eng", (utt("pʰ i k", "p i k"), utt("s p i k", "s p i k"))),
            ("cmn", (utt("pʰ i ŋ", "pʰ i ŋ"), utt("p i ŋ", "p i ŋ"))),
        ),
        noise=noise,
        seed=seed,
    )


@pytest.fixture(scope="session")
def fixture_db() -> AlloDb:
    db = load_db(bundled_fixture_dir())
    assert isinstance(db, AlloDb)
    return db
