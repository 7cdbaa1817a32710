"""Normalization, segmentation, and X-SAMPA conversion."""

from __future__ import annotations

import unicodedata

import pytest
from hypothesis import given
from hypothesis import strategies as st

from allokit.errors import InvalidIPAError, UnknownXSampaError
from allokit.ipa import (
    Segment,
    SegmentString,
    UnknownDiacriticWarning,
    normalize,
    tokenize,
    xsampa_to_ipa,
)

# Segment pool used by the property tests: plain, modifier-carrying,
# tie-bar, and combining-diacritic segments.
SEGMENT_POOL = ["p", "pʰ", "t͡ʃ", "i", "iː", "k", "s", "ŋ", "χ", "ã", "n̩", "ɡ", "d͡ʒ", "ʔ"]


class TestNormalize:
    def test_already_canonical_is_unchanged(self):
        assert normalize("pʰik") == "pʰik"

    def test_latin_g_becomes_ipa_g(self):
        assert normalize("g") == "ɡ"

    def test_empty_string(self):
        assert normalize("") == ""

    def test_ascii_colon_becomes_length_mark(self):
        assert normalize("a:") == "aː"

    def test_tie_bar_below_unified(self):
        assert normalize("t͜ʃ") == "t͡ʃ"

    def test_composes_to_nfc(self):
        assert normalize("ã") == "ã"

    def test_substitutes_under_composed_diacritics(self):
        # g + breve composes to ğ; the base must still become IPA ɡ
        assert normalize("ğ") == "ɡ̆"

    @given(st.text(max_size=30))
    def test_idempotent_on_arbitrary_text(self, s):
        once = normalize(s)
        assert normalize(once) == once


class TestTokenize:
    def test_aspirated_stop_binds_modifier(self):
        assert tokenize("pʰik").texts() == ("pʰ", "i", "k")

    def test_empty_input(self):
        assert tokenize("").texts() == ()

    def test_tie_bar_joins_bases(self):
        assert tokenize("t͡ʃa").texts() == ("t͡ʃ", "a")

    def test_combining_diacritic_attaches(self):
        assert tokenize("n̩a").texts() == ("n̩", "a")

    def test_precomposed_vowel_is_one_segment(self):
        assert tokenize("pã").texts() == ("p", "ã")

    def test_length_mark_attaches(self):
        assert tokenize("iːk").texts() == ("iː", "k")

    def test_normalizes_before_segmenting(self):
        assert tokenize("ga").texts() == ("ɡ", "a")

    def test_rejects_unknown_codepoint(self):
        with pytest.raises(InvalidIPAError):
            tokenize("p3k")

    def test_rejects_whitespace(self):
        with pytest.raises(InvalidIPAError):
            tokenize("p i k")

    def test_rejects_modifier_without_base(self):
        with pytest.raises(InvalidIPAError):
            tokenize("ʰpik")

    def test_rejects_combining_mark_without_base(self):
        with pytest.raises(InvalidIPAError):
            tokenize("̥pik")

    def test_rejects_dangling_tie_bar(self):
        with pytest.raises(InvalidIPAError):
            tokenize("t͡")

    def test_rejects_stress_mark(self):
        with pytest.raises(InvalidIPAError):
            tokenize("ˈpik")

    def test_rejects_tone_letter(self):
        with pytest.raises(InvalidIPAError):
            tokenize("pa˥")

    def test_unknown_diacritic_warns_but_attaches(self):
        with pytest.warns(UnknownDiacriticWarning):
            assert tokenize("p͔a").texts() == ("p͔", "a")


class TestSegmentType:
    def test_valid_segment(self):
        assert Segment("pʰ").text == "pʰ"

    def test_leading_modifier_allowed_in_direct_construction(self):
        assert Segment("ⁿd").text == "ⁿd"

    def test_rejects_two_segments(self):
        with pytest.raises(InvalidIPAError):
            Segment("pi")

    def test_rejects_empty(self):
        with pytest.raises(InvalidIPAError):
            Segment("")

    def test_rejects_non_canonical_text(self):
        with pytest.raises(InvalidIPAError):
            Segment("g")  # Latin g; canonical form is ɡ

    def test_rejects_bare_modifier(self):
        with pytest.raises(InvalidIPAError):
            Segment("ʰ")

    def test_from_spaced(self):
        assert SegmentString.from_spaced("pʰ i k").texts() == ("pʰ", "i", "k")


@st.composite
def ipa_strings(draw):
    segments = draw(st.lists(st.sampled_from(SEGMENT_POOL), max_size=12))
    return "".join(segments)


class TestInvariants:
    @given(ipa_strings())
    def test_round_trip(self, s):
        assert str(tokenize(s)) == normalize(s)

    @given(ipa_strings())
    def test_tokenize_deterministic(self, s):
        assert tokenize(s).texts() == tokenize(s).texts()

    @given(ipa_strings())
    def test_unique_segmentation(self, s):
        for seg in tokenize(s):
            again = tokenize(seg.text)
            assert again.texts() == (seg.text,)

    @given(ipa_strings())
    def test_segments_are_nfc(self, s):
        for seg in tokenize(s):
            assert unicodedata.is_normalized("NFC", seg.text)


class TestXSampa:
    def test_aspirated_p(self):
        assert xsampa_to_ipa("p_h") == "pʰ"

    def test_shared_symbol(self):
        assert xsampa_to_ipa("x") == "x"

    def test_velar_nasal(self):
        assert xsampa_to_ipa("N") == "ŋ"

    # Spot checks against the published correspondence chart.
    @pytest.mark.parametrize(
        "xsampa,ipa",
        [
            ("t`", "ʈ"),
            ("J\\", "ɟ"),
            ("g", "ɡ"),
            ("?", "ʔ"),
            ("S", "ʃ"),
            ("Z", "ʒ"),
            ("T", "θ"),
            ("D", "ð"),
            ("X", "χ"),
            ("R", "ʁ"),
            ("@", "ə"),
            ("E", "ɛ"),
            ("{", "æ"),
            ("2", "ø"),
            ("9", "œ"),
            ("A", "ɑ"),
            ("O", "ɔ"),
            ("U", "ʊ"),
            ("I", "ɪ"),
            ("V", "ʌ"),
            ("r\\", "ɹ"),
            ("h\\", "ɦ"),
            ("s\\", "ɕ"),
            ("b_<", "ɓ"),
            ("|\\|\\", "ǁ"),
        ],
    )
    def test_published_table_entries(self, xsampa, ipa):
        assert xsampa_to_ipa(xsampa) == ipa

    def test_longest_match_wins(self):
        # t_s is the tie-bar affricate, not t + unknown "_s"
        assert xsampa_to_ipa("t_s") == "t͡s"

    def test_word_level_conversion(self):
        assert xsampa_to_ipa("p_hik") == "pʰik"
        assert xsampa_to_ipa("swa:") == "swaː"

    def test_output_tokenizes(self):
        for src in ("p_h", "t_S", "N", "i:", "a~", "n_d"):
            converted = xsampa_to_ipa(src)
            assert len(tokenize(converted)) >= 1

    def test_unknown_symbol_offset(self):
        with pytest.raises(UnknownXSampaError) as exc:
            xsampa_to_ipa('pik"a')
        assert exc.value.offset == 3

    def test_stress_codes_unsupported(self):
        with pytest.raises(UnknownXSampaError):
            xsampa_to_ipa('"pik')
