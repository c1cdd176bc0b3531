"""Derive non-English document pairs by pivoting through shared English docs.

If document X (language xx) and document Y (language yy) are both aligned to
the same English document E, then (X, Y) forms a derived pair.  Sentence-level
link composition is an optional extension on top of the document-level
pivoting; composed links carry the per-field minimum of their two legs'
scores.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Optional, Sequence

from .model import (
    AlignmentLink,
    AlignmentScoreSet,
    DocPairAlignment,
    SCORE_FIELDS,
    StructuredDocument,
)


class NonCanonicalEnglishError(ValueError):
    """Both inputs must use the consolidated English collection; run English
    consolidation before pivoting."""


@dataclass(frozen=True)
class PivotedPair:
    xx_doc: StructuredDocument
    yy_doc: StructuredDocument
    en_doc: StructuredDocument


def _english_side(pair: DocPairAlignment) -> tuple[StructuredDocument, StructuredDocument]:
    """Return (english doc, other doc) of an English-centric pair."""
    if pair.src_doc.lang == "en":
        return pair.src_doc, pair.tgt_doc
    if pair.tgt_doc.lang == "en":
        return pair.tgt_doc, pair.src_doc
    raise ValueError(f"pair {pair.pair_id} has no English side")


def pivot_doc_pairs(
    en_xx: Sequence[DocPairAlignment],
    en_yy: Sequence[DocPairAlignment],
    canonical_en_ids: Optional[set[str]] = None,
) -> list[PivotedPair]:
    """Cross-product the two pair sets over their shared English documents.

    When ``canonical_en_ids`` is given, any English reference outside it is
    rejected: pivoting over an unconsolidated collection would silently miss
    shared documents.
    """
    by_en_xx: dict[str, list[tuple[StructuredDocument, StructuredDocument]]] = {}
    by_en_yy: dict[str, list[tuple[StructuredDocument, StructuredDocument]]] = {}
    for pairs, index in ((en_xx, by_en_xx), (en_yy, by_en_yy)):
        for pair in pairs:
            en_doc, other = _english_side(pair)
            if canonical_en_ids is not None and en_doc.doc_id not in canonical_en_ids:
                raise NonCanonicalEnglishError(
                    f"English document {en_doc.doc_id!r} is not in the consolidated "
                    "collection; run English consolidation before pivoting"
                )
            index.setdefault(en_doc.doc_id, []).append((en_doc, other))

    result = []
    for en_id in sorted(set(by_en_xx) & set(by_en_yy)):
        for en_doc, xx_doc in sorted(by_en_xx[en_id], key=lambda t: t[1].doc_id):
            for _, yy_doc in sorted(by_en_yy[en_id], key=lambda t: t[1].doc_id):
                result.append(PivotedPair(xx_doc=xx_doc, yy_doc=yy_doc, en_doc=en_doc))
    return result


def _min_scores(a: AlignmentScoreSet, b: AlignmentScoreSet) -> AlignmentScoreSet:
    # A composed pair is at most as reliable as its weaker leg.
    values = {}
    for name in SCORE_FIELDS:
        va, vb = getattr(a, name), getattr(b, name)
        if va is not None and vb is not None:
            values[name] = min(va, vb)
    return AlignmentScoreSet(**values)


def compose_sentence_links(
    links_en_xx: Sequence[AlignmentLink],
    links_en_yy: Sequence[AlignmentLink],
) -> list[AlignmentLink]:
    """Compose xx<->yy links through shared English sentence ids.

    ``links_en_xx`` has English on the source side and xx on the target side;
    likewise for ``links_en_yy``.  Every pair of input links sharing an
    English id yields one composed link; side-disjointness is re-enforced
    afterwards (first composition wins).
    """
    composed: list[AlignmentLink] = []
    used_xx: set = set()
    used_yy: set = set()
    for link_x in links_en_xx:
        en_x = set(link_x.src_ids)
        for link_y in links_en_yy:
            if not en_x & set(link_y.src_ids):
                continue
            if any(s in used_xx for s in link_x.tgt_ids):
                continue
            if any(s in used_yy for s in link_y.tgt_ids):
                continue
            used_xx.update(link_x.tgt_ids)
            used_yy.update(link_y.tgt_ids)
            composed.append(
                AlignmentLink(
                    src_ids=link_x.tgt_ids,
                    tgt_ids=link_y.tgt_ids,
                    scores=_min_scores(link_x.scores, link_y.scores),
                )
            )
    return composed
