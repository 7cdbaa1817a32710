"""Approximate phonetic search over phone-transcribed documents.

Queries run as semi-global alignments: the query must be consumed in full,
while the document prefix and suffix outside the matched span cost nothing.
An n-gram (default trigram) index prunes candidate documents first; when the
allowed edit budget is too large for the n-gram count bound to hold, the
engine falls back to scanning every document, so results always equal the
exhaustive scan.
"""

from __future__ import annotations

import json
from collections import Counter
from dataclasses import dataclass
from pathlib import Path
from typing import Iterable, Sequence

from .errors import (
    DuplicateDocIdError,
    EmptyDocError,
    EmptyQueryError,
    ParseError,
)
from .ipa import SegmentString

__all__ = [
    "PhoneDoc",
    "SearchHit",
    "SearchIndex",
    "index_build",
    "search",
    "save_index",
    "load_index",
    "load_corpus",
]

SNAPSHOT_VERSION = 1


@dataclass(frozen=True)
class PhoneDoc:
    """One phone-transcribed document."""

    doc_id: str
    phones: SegmentString
    meta: str | None = None


@dataclass(frozen=True)
class SearchHit:
    """One match: document, matched span (end-exclusive), and its cost."""

    doc_id: str
    span: tuple[int, int]
    distance: int
    normalized: float


@dataclass(frozen=True)
class SearchIndex:
    """Immutable corpus index with per-document n-gram counts for pruning."""

    docs: tuple[PhoneDoc, ...]
    ngram: int = 3

    def __post_init__(self) -> None:
        seen: set[str] = set()
        for doc in self.docs:
            if doc.doc_id in seen:
                raise DuplicateDocIdError(doc.doc_id)
            seen.add(doc.doc_id)
            if len(doc.phones) == 0:
                raise EmptyDocError(doc.doc_id)
        grams: dict[str, Counter[tuple[str, ...]]] = {}
        texts: dict[str, tuple[str, ...]] = {}
        for doc in self.docs:
            segs = doc.phones.texts()
            texts[doc.doc_id] = segs
            grams[doc.doc_id] = _gram_counts(segs, self.ngram)
        object.__setattr__(self, "_texts", texts)
        object.__setattr__(self, "_grams", grams)

    def __len__(self) -> int:
        return len(self.docs)

    def segments_of(self, doc_id: str) -> tuple[str, ...]:
        return self._texts[doc_id]  # type: ignore[attr-defined]


def _gram_counts(segments: Sequence[str], n: int) -> Counter[tuple[str, ...]]:
    return Counter(
        tuple(segments[i : i + n]) for i in range(len(segments) - n + 1)
    )


def index_build(docs: Iterable[PhoneDoc], *, ngram: int = 3) -> SearchIndex:
    """Build the immutable search index over a document list."""
    if ngram < 1:
        raise ValueError(f"ngram must be >= 1, got {ngram}")
    return SearchIndex(docs=tuple(docs), ngram=ngram)


def _within(distance: int, query_len: int, max_normalized: float) -> bool:
    return distance <= max_normalized * query_len


def _max_edits(query_len: int, max_normalized: float) -> int:
    """Largest distance passing the normalized threshold; -1 when none do."""
    k = int(max_normalized * query_len)
    while _within(k + 1, query_len, max_normalized):
        k += 1
    while k >= 0 and not _within(k, query_len, max_normalized):
        k -= 1
    return k


def _semi_global(query: Sequence[str], doc: Sequence[str]) -> tuple[int, int, int]:
    """Best (distance, start, end) placing the full query inside the document.

    Ties prefer the smaller start, then the smaller end, so results are
    deterministic and an exact substring match reports its first occurrence.
    """
    m, n = len(query), len(doc)
    prev_cost = [0] * (n + 1)
    prev_start = list(range(n + 1))
    for i in range(1, m + 1):
        qi = query[i - 1]
        cur_cost = [i] + [0] * n
        cur_start = [0] * (n + 1)
        for j in range(1, n + 1):
            best_c = prev_cost[j - 1] + (qi != doc[j - 1])
            best_s = prev_start[j - 1]
            c = prev_cost[j] + 1
            if c < best_c or (c == best_c and prev_start[j] < best_s):
                best_c, best_s = c, prev_start[j]
            c = cur_cost[j - 1] + 1
            if c < best_c or (c == best_c and cur_start[j - 1] < best_s):
                best_c, best_s = c, cur_start[j - 1]
            cur_cost[j] = best_c
            cur_start[j] = best_s
        prev_cost, prev_start = cur_cost, cur_start
    end = min(range(n + 1), key=lambda j: (prev_cost[j], prev_start[j], j))
    return prev_cost[end], prev_start[end], end


def _candidates(idx: SearchIndex, query_texts: tuple[str, ...], budget: int) -> list[str]:
    """Document ids that can possibly hold a match within the edit budget.

    Uses the n-gram count bound: a full-query match with at most ``budget``
    edits shares at least (m - n + 1) - budget*n query n-grams (counted with
    multiplicity) with the document. When that bound is vacuous the whole
    corpus is returned (exhaustive fallback).
    """
    n = idx.ngram
    m = len(query_texts)
    threshold = (m - n + 1) - budget * n
    if m < n or threshold <= 0:
        return [doc.doc_id for doc in idx.docs]
    query_grams = _gram_counts(query_texts, n)
    out: list[str] = []
    for doc in idx.docs:
        doc_grams: Counter[tuple[str, ...]] = idx._grams[doc.doc_id]  # type: ignore[attr-defined]
        shared = sum(min(c, doc_grams[g]) for g, c in query_grams.items())
        if shared >= threshold:
            out.append(doc.doc_id)
    return out


def search(
    idx: SearchIndex,
    query: SegmentString | Sequence[str],
    k: int = 10,
    max_normalized: float = 0.34,
) -> list[SearchHit]:
    """Top-k approximate matches for a query, best first.

    Returns at most one hit (its best span) per document, keeping those with
    ``distance / len(query) <= max_normalized``, ranked by (normalized,
    doc_id, span start).
    """
    query_texts = query.texts() if isinstance(query, SegmentString) else tuple(query)
    if not query_texts:
        raise EmptyQueryError("query has no segments")
    if k < 1:
        raise ValueError(f"k must be >= 1, got {k}")
    m = len(query_texts)
    if not max_normalized >= 0.0:  # also catches NaN
        return []
    budget = _max_edits(m, max_normalized)
    if budget < 0:
        return []
    hits: list[SearchHit] = []
    for doc_id in _candidates(idx, query_texts, budget):
        distance, start, end = _semi_global(query_texts, idx.segments_of(doc_id))
        if distance <= budget:
            hits.append(
                SearchHit(
                    doc_id=doc_id,
                    span=(start, end),
                    distance=distance,
                    normalized=distance / m,
                )
            )
    hits.sort(key=lambda h: (h.normalized, h.doc_id, h.span[0]))
    return hits[:k]


def save_index(idx: SearchIndex, path: str | Path) -> None:
    """Write an index snapshot (versioned JSON)."""
    doc = {
        "format_version": SNAPSHOT_VERSION,
        "ngram": idx.ngram,
        "docs": [
            {
                "id": d.doc_id,
                "segments": list(d.phones.texts()),
                "meta": d.meta,
            }
            for d in idx.docs
        ],
    }
    Path(path).write_text(json.dumps(doc, ensure_ascii=False, indent=2) + "\n", "utf-8")


def load_index(path: str | Path) -> SearchIndex:
    """Read an index snapshot written by :func:`save_index`."""
    try:
        doc = json.loads(Path(path).read_text("utf-8"))
    except json.JSONDecodeError as exc:
        raise ParseError(f"{path}: malformed snapshot: {exc}") from exc
    version = doc.get("format_version")
    if version != SNAPSHOT_VERSION:
        raise ParseError(f"{path}: unsupported snapshot version {version!r}")
    docs = [
        PhoneDoc(
            doc_id=d["id"],
            phones=SegmentString.from_spaced(" ".join(d["segments"])),
            meta=d.get("meta"),
        )
        for d in doc["docs"]
    ]
    return index_build(docs, ngram=int(doc["ngram"]))


def load_corpus(path: str | Path) -> list[PhoneDoc]:
    """Read a corpus file: one ``doc_id<TAB>segment segment ...`` per line."""
    docs: list[PhoneDoc] = []
    for lineno, line in enumerate(Path(path).read_text("utf-8").splitlines(), start=1):
        if not line.strip():
            continue
        if "\t" not in line:
            raise ParseError(f"{path}:{lineno}: expected 'doc_id<TAB>segments'")
        doc_id, phones = line.split("\t", 1)
        docs.append(PhoneDoc(doc_id=doc_id, phones=SegmentString.from_spaced(phones)))
    return docs
