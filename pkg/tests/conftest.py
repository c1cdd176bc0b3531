"""Shared synthetic-corpus builders for the test suite."""

from __future__ import annotations

import random

import pytest

from docbitext.alignment import build_pair
from docbitext.model import (
    AlignmentLink,
    AlignmentScoreSet,
    SentenceId,
    StructuredDocument,
    make_doc_id,
)

WORDS = (
    "the a of to and in for on with this that house river market road stone "
    "green early letter window music garden winter summer report question "
    "answer twelve hundred people water light night morning paper silver"
).split()


def make_text(rng: random.Random, n_sentences: int, min_words: int = 4, max_words: int = 12) -> list[str]:
    sentences = []
    for _ in range(n_sentences):
        words = [rng.choice(WORDS) for _ in range(rng.randint(min_words, max_words))]
        sentences.append(" ".join(words).capitalize() + ".")
    return sentences


def make_document(
    rng: random.Random,
    lang: str = "en",
    url: str | None = None,
    n_sentences: int | None = None,
    collection: str = "test",
    sentences: list[str] | None = None,
) -> StructuredDocument:
    if sentences is None:
        sentences = make_text(rng, n_sentences or rng.randint(1, 12))
    if url is None:
        url = f"https://example.org/{lang}/{rng.randrange(10**9)}"
    paragraphs = []
    pid = 0
    remaining = list(sentences)
    while remaining:
        pid += 1
        take = min(len(remaining), rng.randint(1, 4))
        chunk = remaining[:take]
        remaining = remaining[take:]
        paragraphs.append(
            (pid, tuple((SentenceId(pid, i), s) for i, s in enumerate(chunk, start=1)))
        )
    probe = StructuredDocument("probe", url, lang, collection, tuple(paragraphs))
    return StructuredDocument(
        make_doc_id(url, lang, probe.content_fingerprint()),
        url,
        lang,
        collection,
        tuple(paragraphs),
    )


def one_to_one_links(
    src: StructuredDocument,
    tgt: StructuredDocument,
    rng: random.Random | None = None,
    fraction: float = 1.0,
    scores: bool = True,
) -> list[AlignmentLink]:
    """1:1 links over the shorter document's positions, optionally thinned."""
    src_ids = [sid for sid, _ in src.sentences()]
    tgt_ids = [sid for sid, _ in tgt.sentences()]
    n = min(len(src_ids), len(tgt_ids))
    links = []
    for i in range(n):
        if rng is not None and rng.random() > fraction:
            continue
        score_set = AlignmentScoreSet()
        if scores:
            r = rng or random.Random(i)
            score_set = AlignmentScoreSet(
                bleualign=round(r.uniform(0.1, 1.0), 3),
                bicleaner=round(r.uniform(0.1, 1.0), 3),
            )
        links.append(AlignmentLink((src_ids[i],), (tgt_ids[i],), score_set))
    return links


def make_pair(rng: random.Random, src_lang: str = "en", tgt_lang: str = "fi", fraction: float = 1.0):
    src = make_document(rng, lang=src_lang, n_sentences=rng.randint(2, 15))
    tgt = make_document(rng, lang=tgt_lang, n_sentences=rng.randint(2, 15))
    links = one_to_one_links(src, tgt, rng, fraction)
    if not links:
        links = one_to_one_links(src, tgt, None, 1.0)[:1]
    pair, _ = build_pair(src, tgt, links)
    return pair


@pytest.fixture
def rng() -> random.Random:
    return random.Random(42)
