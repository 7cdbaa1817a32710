"""allokit: phoneme-allophone mapping toolkit.

Parse and validate phoneme-to-allophone mapping databases, build universal
phone inventories and per-language projection matrices, decode and score
phone/phoneme sequences, simulate the shared-phoneme confusion effect, and
run approximate phonetic search over phone-string corpora.
"""

from .ipa import Segment, SegmentString, normalize, tokenize, xsampa_to_ipa

__version__ = "0.1.0"

__all__ = [
    "Segment",
    "SegmentString",
    "normalize",
    "tokenize",
    "xsampa_to_ipa",
    "__version__",
]
