"""Build structured documents from raw extracted text.

Paragraphs are split on newlines (blank lines collapse), each paragraph is
segmented into sentences by a pluggable rule, and hierarchical ids are
assigned.  The default segmenter is a deterministic rule-based splitter; it
stands in for heavier SRX-style engines while honoring the same interface.
"""

from __future__ import annotations

import json
import re
from dataclasses import dataclass
from typing import Callable, Iterable, Iterator

from .model import StructuredDocument, SentenceId, make_doc_id


class EmptyDocumentError(ValueError):
    """Raised when the input text contains no non-whitespace content."""


@dataclass(frozen=True)
class SegmenterRule:
    """Named paragraph -> sentences function.

    The returned sentences, joined by single spaces and whitespace-normalized,
    must equal the whitespace-normalized input; no sentence may be empty.
    """

    name: str
    segment: Callable[[str], list[str]]


# Common sentence-final abbreviations that must not end a sentence mid-text.
DEFAULT_ABBREVIATIONS = frozenset(
    """
    Dr. Mr. Mrs. Ms. Prof. Rev. Gen. Sen. Rep. St. Jr. Sr. Lt. Col. Capt. Sgt.
    vs. etc. e.g. i.e. cf. al. Inc. Ltd. Co. Corp. No. Vol. Fig. Eq. pp. Jan.
    Feb. Mar. Apr. Jun. Jul. Aug. Sep. Sept. Oct. Nov. Dec. approx. est.
    """.split()
)

# Sentence-final punctuation optionally followed by closing quotes/brackets,
# then the whitespace that separates it from the next sentence.
_BOUNDARY_RE = re.compile(r"[.!?…]+[\"'”’)\]]*\s+")


def _is_starter(ch: str) -> bool:
    return ch.isupper() or ch.isdigit()


def _rule_segment(paragraph: str, abbreviations: frozenset[str]) -> list[str]:
    text = " ".join(paragraph.split())
    if not text:
        return []
    sentences = []
    start = 0
    for match in _BOUNDARY_RE.finditer(text):
        end = match.end()
        if end >= len(text) or not _is_starter(text[end]):
            continue
        candidate = text[start:end].rstrip()
        last_word = candidate.rsplit(" ", 1)[-1]
        if last_word in abbreviations:
            continue
        sentences.append(candidate)
        start = end
    tail = text[start:].strip()
    if tail:
        sentences.append(tail)
    return sentences


def default_segmenter(abbreviations: Iterable[str] = DEFAULT_ABBREVIATIONS) -> SegmenterRule:
    """Rule-based splitter: break after ., !, ?, or an ellipsis (plus closing
    quotes/brackets) when followed by whitespace and an uppercase letter or
    digit, except after a known abbreviation.  Decimal points never match
    because they are not followed by whitespace."""
    frozen = frozenset(abbreviations)
    return SegmenterRule("rule-v1", lambda paragraph: _rule_segment(paragraph, frozen))


def build_document(
    raw_text: str,
    url: str,
    lang: str,
    collection: str,
    segmenter: SegmenterRule | None = None,
) -> StructuredDocument:
    """Split raw text into paragraphs and sentences with consecutive ids."""
    if segmenter is None:
        segmenter = default_segmenter()
    if not raw_text.strip():
        raise EmptyDocumentError(f"document from {url!r} is empty after trimming")

    paragraphs = []
    pid = 0
    for line in raw_text.split("\n"):
        sentences = segmenter.segment(line)
        if not sentences:
            continue
        pid += 1
        paragraphs.append(
            (pid, tuple((SentenceId(pid, i), s) for i, s in enumerate(sentences, start=1)))
        )
    if not paragraphs:
        raise EmptyDocumentError(f"document from {url!r} has no segmentable content")

    probe = StructuredDocument(
        doc_id="pending", url=url, lang=lang, collection=collection, paragraphs=tuple(paragraphs)
    )
    doc_id = make_doc_id(url, lang, probe.content_fingerprint())
    return StructuredDocument(
        doc_id=doc_id, url=url, lang=lang, collection=collection, paragraphs=tuple(paragraphs)
    )


def read_raw_jsonl(lines: Iterable[str]) -> Iterator[dict]:
    """Yield {url, lang, collection, text} records from a JSONL stream."""
    for i, line in enumerate(lines, start=1):
        line = line.strip()
        if not line:
            continue
        record = json.loads(line)
        missing = {"url", "lang", "collection", "text"} - record.keys()
        if missing:
            raise ValueError(f"line {i}: missing fields {sorted(missing)}")
        yield record
