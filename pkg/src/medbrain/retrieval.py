"""Term-matching retrieval.

Documents are split into equal token sections sized to fit the model's
context window; sections are ranked purely by keyword hit counts. No
stemming, no stop words, no learned weights — every score is auditable
by counting.
"""

from __future__ import annotations

import re
from dataclasses import dataclass
from typing import Sequence

from .kb import Document

# Maximal runs of alphanumeric characters (underscore excluded).
_TOKEN_RE = re.compile(r"[^\W_]+", re.UNICODE)


def tokenize(text: str) -> list[str]:
    """Lowercase tokens, split on every maximal run of non-alphanumeric
    characters."""
    return [m.group(0).lower() for m in _TOKEN_RE.finditer(text)]


def _token_spans(text: str) -> list[tuple[str, int, int]]:
    """(token, start, end) with offsets into the original text."""
    return [(m.group(0).lower(), m.start(), m.end()) for m in _TOKEN_RE.finditer(text)]


@dataclass(frozen=True)
class DocumentChunk:
    """An equal-sized token section of one document, the retrieval unit.

    raw_text is the body slice from the first to the last token of the
    section, so a chunk can be shown to a reader verbatim.
    """

    doc_id: str
    section_index: int
    tokens: tuple[str, ...]
    raw_text: str


@dataclass(frozen=True)
class RetrievalConfig:
    section_size: int = 256
    top_n: int = 5
    drop_zero_scores: bool = True

    def __post_init__(self):
        if self.section_size < 1:
            raise ValueError("section_size must be >= 1")
        if self.top_n < 1:
            raise ValueError("top_n must be >= 1")


@dataclass(frozen=True)
class RetrievalResult:
    chunk: DocumentChunk
    score: int
    rank: int


def chunk_document(doc: Document, section_size: int) -> list[DocumentChunk]:
    """Partition the document's token stream into sections of exactly
    section_size tokens (the last may be shorter)."""
    if section_size < 1:
        raise ValueError("section_size must be >= 1")
    spans = _token_spans(doc.body)
    chunks = []
    for index, at in enumerate(range(0, len(spans), section_size)):
        part = spans[at:at + section_size]
        chunks.append(
            DocumentChunk(
                doc_id=doc.doc_id,
                section_index=index,
                tokens=tuple(tok for tok, _, _ in part),
                raw_text=doc.body[part[0][1]:part[-1][2]],
            )
        )
    return chunks


def _count_occurrences(tokens: Sequence[str], needle: Sequence[str]) -> int:
    """Contiguous occurrences of needle in tokens, overlaps included."""
    if len(needle) == 1:
        return tokens.count(needle[0])
    n, k = len(tokens), len(needle)
    first = needle[0]
    needle = tuple(needle)
    hits = 0
    for i in range(n - k + 1):
        if tokens[i] == first and tuple(tokens[i:i + k]) == needle:
            hits += 1
    return hits


def score_chunk(chunk: DocumentChunk, keywords: Sequence[str]) -> int:
    """Total keyword hits in the chunk. Each keyword is tokenized; a hit is
    a contiguous occurrence of its token sequence, and every occurrence
    counts. Case-insensitive by construction."""
    score = 0
    for keyword in keywords:
        if not keyword:
            raise ValueError("keywords must be non-empty")
        needle = tokenize(keyword)
        if needle:
            score += _count_occurrences(chunk.tokens, needle)
    return score


def retrieve_top_n(
    corpus: Sequence[Document],
    keywords: Sequence[str],
    cfg: RetrievalConfig = RetrievalConfig(),
) -> list[RetrievalResult]:
    """Rank all sections of all documents by keyword hits and return at most
    cfg.top_n of them.

    Ordering is (score desc, corpus order asc, section index asc); chunks
    scoring zero are dropped when cfg.drop_zero_scores. An empty result
    means no knowledge was found for the keywords.
    """
    if not corpus:
        raise ValueError("corpus must be non-empty")
    scored: list[tuple[int, DocumentChunk]] = []
    for doc in corpus:
        for chunk in chunk_document(doc, cfg.section_size):
            scored.append((score_chunk(chunk, keywords), chunk))
    if cfg.drop_zero_scores:
        scored = [(s, c) for s, c in scored if s > 0]
    # stable sort keeps (corpus order, section index) inside equal scores
    scored.sort(key=lambda pair: -pair[0])
    return [
        RetrievalResult(chunk=chunk, score=score, rank=rank)
        for rank, (score, chunk) in enumerate(scored[:cfg.top_n], start=1)
    ]
