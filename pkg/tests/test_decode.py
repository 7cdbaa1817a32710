"""Greedy CTC decoding and edit-distance scoring with independent oracles."""

from __future__ import annotations

import itertools
import random
from fractions import Fraction
from functools import lru_cache

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from allokit.allophone import PosteriorFrames, UniversalInventory
from allokit.decode import collapse_path, corpus_per, ctc_greedy_decode, edit_distance
from allokit.errors import EmptyReferenceError
from allokit.ipa import SegmentString


@lru_cache(maxsize=None)
def oracle_distance(a: tuple[str, ...], b: tuple[str, ...]) -> int:
    """Textbook recursive Levenshtein, memoized across suffix pairs."""
    if not a:
        return len(b)
    if not b:
        return len(a)
    return min(
        oracle_distance(a[1:], b[1:]) + (a[0] != b[0]),
        oracle_distance(a[1:], b) + 1,
        oracle_distance(a, b[1:]) + 1,
    )


def frames_for(path: list[str | None], labels: tuple[str, ...]) -> PosteriorFrames:
    """One-hot frames for a symbol path; None marks a blank frame."""
    rows = np.zeros((len(path), len(labels) + 1))
    for t, symbol in enumerate(path):
        rows[t, 0 if symbol is None else labels.index(symbol) + 1] = 1.0
    return PosteriorFrames(frames=rows, labels=labels)


LABELS = ("i", "k", "p")


class TestGreedyDecode:
    def test_repeats_collapse_and_blanks_drop(self):
        frames = frames_for(["p", "p", None, "i", "i", "k"], LABELS)
        assert ctc_greedy_decode(frames).texts() == ("p", "i", "k")

    def test_all_blank_path(self):
        frames = frames_for([None, None, None], LABELS)
        assert ctc_greedy_decode(frames).texts() == ()

    def test_blank_separates_repeats(self):
        frames = frames_for(["p", None, "p"], LABELS)
        assert ctc_greedy_decode(frames).texts() == ("p", "p")

    def test_zero_frames(self):
        frames = PosteriorFrames(frames=np.zeros((0, 4)), labels=LABELS)
        assert ctc_greedy_decode(frames).texts() == ()

    def test_blank_wins_ties(self):
        # equal probability on blank and 'i': lowest index (blank) wins
        rows = np.array([[0.5, 0.5, 0.0, 0.0]])
        frames = PosteriorFrames(frames=rows, labels=LABELS)
        assert ctc_greedy_decode(frames).texts() == ()

    def test_symbol_ties_break_to_lowest_index(self):
        rows = np.array([[0.0, 0.5, 0.5, 0.0]])
        frames = PosteriorFrames(frames=rows, labels=LABELS)
        assert ctc_greedy_decode(frames).texts() == ("i",)

    def test_invariant_under_argmax_preserving_perturbation(self):
        rng = np.random.default_rng(5)
        path = ["p", None, "i", "i", None, "k", "k"]
        exact = frames_for(path, LABELS)
        decoded = ctc_greedy_decode(exact).texts()
        for _ in range(20):
            noise = rng.random(exact.frames.shape) * 0.2
            perturbed = exact.frames * 0.7 + noise * 0.3 / noise.sum(axis=1, keepdims=True)
            perturbed /= perturbed.sum(axis=1, keepdims=True)
            if np.array_equal(np.argmax(perturbed, axis=1), np.argmax(exact.frames, axis=1)):
                frames = PosteriorFrames(frames=perturbed, labels=LABELS)
                assert ctc_greedy_decode(frames).texts() == decoded

    def test_collapse_path_directly(self):
        assert collapse_path([1, 1, 0, 2, 2, 3]) == [1, 2, 3]
        assert collapse_path([0, 0]) == []
        assert collapse_path([1, 0, 1]) == [1, 1]


class TestCtcLaw:
    def expand(self, symbols: tuple[str, ...], rng: random.Random) -> list[str | None]:
        """Repeat each segment >= 1 times, blank between equal neighbors."""
        path: list[str | None] = []
        prev: str | None = None
        for symbol in symbols:
            if symbol == prev:
                path.append(None)
            path.extend([symbol] * rng.randint(1, 3))
            prev = symbol
        return path

    def test_expansion_round_trip(self):
        rng = random.Random(99)
        for _ in range(300):
            symbols = tuple(rng.choice(LABELS) for _ in range(rng.randint(0, 8)))
            frames = frames_for(self.expand(symbols, rng), LABELS)
            assert ctc_greedy_decode(frames).texts() == symbols


class TestEditDistance:
    def test_substitution_on_multi_codepoint_segment(self):
        ref = SegmentString.from_spaced("p i k")
        hyp = SegmentString.from_spaced("pʰ i k")
        result = edit_distance(ref, hyp)
        assert result.distance == 1
        assert result.substitutions == 1
        assert result.insertions == 0
        assert result.deletions == 0
        assert result.per == Fraction(1, 3)

    def test_identical_strings(self):
        ref = SegmentString.from_spaced("p i k")
        result = edit_distance(ref, ref)
        assert result.distance == 0
        assert result.per == 0

    def test_empty_reference_all_insertions(self):
        result = edit_distance((), ("p", "i", "k"))
        assert result.distance == 3
        assert result.insertions == 3
        with pytest.raises(EmptyReferenceError):
            _ = result.per

    def test_empty_hypothesis_all_deletions(self):
        result = edit_distance(("p", "i"), ())
        assert result.distance == 2
        assert result.deletions == 2
        assert result.per == Fraction(1)

    def test_counts_sum_to_distance(self):
        rng = random.Random(7)
        for _ in range(200):
            a = tuple(rng.choice(LABELS) for _ in range(rng.randint(0, 8)))
            b = tuple(rng.choice(LABELS) for _ in range(rng.randint(0, 8)))
            result = edit_distance(a, b)
            assert result.substitutions + result.insertions + result.deletions == result.distance

    def test_exhaustive_small_oracle(self):
        alphabet = ("p", "pʰ", "k")
        strings = [
            tuple(s)
            for length in range(0, 5)
            for s in itertools.product(alphabet, repeat=length)
        ]
        for a in strings:
            for b in strings:
                assert edit_distance(a, b).distance == oracle_distance(a, b)

    @given(
        st.lists(st.sampled_from(LABELS), max_size=10),
        st.lists(st.sampled_from(LABELS), max_size=10),
        st.lists(st.sampled_from(LABELS), max_size=10),
    )
    @settings(max_examples=200)
    def test_metric_properties(self, a, b, c):
        a, b, c = tuple(a), tuple(b), tuple(c)
        d_ab = edit_distance(a, b).distance
        d_ba = edit_distance(b, a).distance
        assert d_ab == d_ba
        assert (d_ab == 0) == (a == b)
        d_ac = edit_distance(a, c).distance
        d_cb = edit_distance(c, b).distance
        assert d_ab <= d_ac + d_cb


class TestCorpusPer:
    def test_single_pair_matches_edit_distance(self):
        ref = SegmentString.from_spaced("p i k")
        hyp = SegmentString.from_spaced("pʰ i k")
        assert corpus_per([(ref, hyp)]) == edit_distance(ref, hyp).per

    def test_duplication_invariance(self):
        ref = SegmentString.from_spaced("p i k")
        hyp = SegmentString.from_spaced("pʰ i")
        once = corpus_per([(ref, hyp)])
        twice = corpus_per([(ref, hyp), (ref, hyp)])
        assert once == twice

    def test_micro_average(self):
        pairs = [
            (SegmentString.from_spaced("p i k"), SegmentString.from_spaced("pʰ i k")),
            (SegmentString.from_spaced("p i"), SegmentString.from_spaced("p i")),
        ]
        assert corpus_per(pairs) == Fraction(1, 5)

    def test_empty_reference_rejected(self):
        with pytest.raises(EmptyReferenceError):
            corpus_per([(SegmentString(()), SegmentString.from_spaced("p"))])

    def test_empty_corpus_rejected(self):
        with pytest.raises(EmptyReferenceError):
            corpus_per([])
