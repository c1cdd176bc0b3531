"""Link verification, alignment density, and per-pair score averages.

A link survives verification iff every sentence id it references resolves in
its document and no sentence already belongs to an earlier link on the same
side.  Density is the number of links over the longer document's sentence
count, so verified link sets always land in [0, 1].
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Sequence

from .model import (
    AlignmentLink,
    AlignmentScoreSet,
    DocPairAlignment,
    SCORE_FIELDS,
    SentenceId,
    StructuredDocument,
)


class UndefinedDensityError(ZeroDivisionError):
    """Density requested for a pair with a zero-length document."""


@dataclass
class VerificationReport:
    """Per-pair counts of dropped links, bucketed by reason."""

    kept: int = 0
    dropped: dict[str, int] = field(default_factory=dict)

    def record_drop(self, reason: str) -> None:
        self.dropped[reason] = self.dropped.get(reason, 0) + 1

    @property
    def total_dropped(self) -> int:
        return sum(self.dropped.values())


def verify_links(
    src: StructuredDocument,
    tgt: StructuredDocument,
    links: Sequence[AlignmentLink],
) -> tuple[list[AlignmentLink], VerificationReport]:
    """Keep links that fully resolve and are side-disjoint (first link wins)."""
    report = VerificationReport()
    kept: list[AlignmentLink] = []
    used_src: set[SentenceId] = set()
    used_tgt: set[SentenceId] = set()
    for link in links:
        if not all(src.has_sentence(s) for s in link.src_ids):
            report.record_drop("unresolved-source-id")
            continue
        if not all(tgt.has_sentence(s) for s in link.tgt_ids):
            report.record_drop("unresolved-target-id")
            continue
        if any(s in used_src for s in link.src_ids):
            report.record_drop("duplicate-source-id")
            continue
        if any(s in used_tgt for s in link.tgt_ids):
            report.record_drop("duplicate-target-id")
            continue
        used_src.update(link.src_ids)
        used_tgt.update(link.tgt_ids)
        kept.append(link)
    report.kept = len(kept)
    return kept, report


def alignment_density(pair: DocPairAlignment) -> float:
    """Links over the longer document's sentence count."""
    return density_from_counts(len(pair.links), len(pair.src_doc), len(pair.tgt_doc))


def density_from_counts(n_links: int, src_len: int, tgt_len: int) -> float:
    longer = max(src_len, tgt_len)
    if longer == 0:
        raise UndefinedDensityError("density undefined for zero-length documents")
    return n_links / longer


def summarize_scores(links: Sequence[AlignmentLink]) -> AlignmentScoreSet:
    """Arithmetic mean per score field over the links that carry it."""
    means = {}
    for name in SCORE_FIELDS:
        values = [
            getattr(link.scores, name)
            for link in links
            if getattr(link.scores, name) is not None
        ]
        if values:
            means[name] = sum(values) / len(values)
    return AlignmentScoreSet(**means)


def pair_score_summary(pair: DocPairAlignment) -> AlignmentScoreSet:
    return summarize_scores(pair.links)


def build_pair(
    src: StructuredDocument,
    tgt: StructuredDocument,
    links: Sequence[AlignmentLink],
) -> tuple[DocPairAlignment, VerificationReport]:
    """Verify links and assemble a pair with cached density and averages."""
    verified, report = verify_links(src, tgt, links)
    pair = DocPairAlignment(
        src_doc=src,
        tgt_doc=tgt,
        links=tuple(verified),
        density=density_from_counts(len(verified), len(src), len(tgt)),
        avg_scores=summarize_scores(verified),
    )
    return pair, report
