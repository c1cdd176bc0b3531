"""Per-language-pair alignment statistics and per-language totals.

One row per language pair: document-pair and alignment counts plus averaged
length ratio, per-document sentence counts, scores, and density.  Averages
are means over pairs of pair-level values (density is the mean of per-pair
densities, never the density of summed counts).  Rendering rounds the same
way the report tables do: one decimal for per-document averages, two for the
length ratio, three for scores and density.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Optional, Sequence

from .model import DocPairAlignment, StructuredDocument


@dataclass(frozen=True)
class StatsRow:
    pair_label: str
    doc_pairs: int
    alignments: int
    avg_aligns_per_doc: Optional[float]
    avg_len_ratio_en_over_xx: Optional[float]
    sents_per_doc_en: Optional[float]
    sents_per_doc_xx: Optional[float]
    avg_bleualign: Optional[float]
    avg_bicleaner: Optional[float]
    avg_density: Optional[float]


@dataclass(frozen=True)
class LanguageTotals:
    lang: str
    sentences: int
    docs: int


def _mean(values: Sequence[float]) -> Optional[float]:
    return sum(values) / len(values) if values else None


def _en_xx(pair: DocPairAlignment) -> tuple[StructuredDocument, StructuredDocument]:
    if pair.src_doc.lang == "en":
        return pair.src_doc, pair.tgt_doc
    if pair.tgt_doc.lang == "en":
        return pair.tgt_doc, pair.src_doc
    # Pivoted pairs have no English side; ratio columns then read src/tgt.
    return pair.src_doc, pair.tgt_doc


def pair_label(pair: DocPairAlignment) -> str:
    en, xx = _en_xx(pair)
    if en.lang == "en":
        return f"{xx.lang}-en"
    return f"{pair.src_doc.lang}-{pair.tgt_doc.lang}"


def pair_stats(pairs: Sequence[DocPairAlignment], label: Optional[str] = None) -> StatsRow:
    if not pairs:
        return StatsRow(label or "", 0, 0, None, None, None, None, None, None, None)
    labels = {pair_label(p) for p in pairs}
    if label is None:
        if len(labels) != 1:
            raise ValueError(f"pairs span multiple language pairs: {sorted(labels)}")
        label = labels.pop()
    alignments = sum(len(p.links) for p in pairs)
    en_lens, xx_lens, ratios = [], [], []
    for pair in pairs:
        en, xx = _en_xx(pair)
        en_lens.append(len(en))
        xx_lens.append(len(xx))
        ratios.append(len(en) / len(xx))
    return StatsRow(
        pair_label=label,
        doc_pairs=len(pairs),
        alignments=alignments,
        avg_aligns_per_doc=alignments / len(pairs),
        avg_len_ratio_en_over_xx=_mean(ratios),
        sents_per_doc_en=_mean(en_lens),
        sents_per_doc_xx=_mean(xx_lens),
        avg_bleualign=_mean(
            [p.avg_scores.bleualign for p in pairs if p.avg_scores.bleualign is not None]
        ),
        avg_bicleaner=_mean(
            [p.avg_scores.bicleaner for p in pairs if p.avg_scores.bicleaner is not None]
        ),
        avg_density=_mean([p.density for p in pairs]),
    )


def stats_row_from_counts(
    label: str, doc_pairs: int, alignments: int
) -> tuple[int, int, Optional[float]]:
    """Count-only consistency helper: (doc_pairs, alignments, aligns/doc)."""
    avg = alignments / doc_pairs if doc_pairs else None
    return doc_pairs, alignments, avg


def language_totals(docs: Sequence[StructuredDocument]) -> list[LanguageTotals]:
    """Per-language document and sentence sums plus a grand-total row."""
    by_lang: dict[str, tuple[int, int]] = {}
    for doc in docs:
        sentences, count = by_lang.get(doc.lang, (0, 0))
        by_lang[doc.lang] = (sentences + len(doc), count + 1)
    rows = [
        LanguageTotals(lang, sentences, count)
        for lang, (sentences, count) in sorted(by_lang.items())
    ]
    if rows:
        rows.append(
            LanguageTotals(
                "total",
                sum(r.sentences for r in rows),
                sum(r.docs for r in rows),
            )
        )
    return rows


def totals_from_counts(groups: Sequence[tuple[str, int, int]]) -> list[LanguageTotals]:
    """Aggregate pre-counted (lang, sentences, docs) groups; used when the
    documents themselves are too large to hold."""
    rows = [LanguageTotals(lang, sentences, docs) for lang, sentences, docs in groups if docs]
    if rows:
        rows.append(
            LanguageTotals(
                "total", sum(r.sentences for r in rows), sum(r.docs for r in rows)
            )
        )
    return rows


def mean_sentences_per_doc(totals: Sequence[LanguageTotals]) -> float:
    grand = next(row for row in totals if row.lang == "total")
    return grand.sentences / grand.docs


# ---------------------------------------------------------------------------
# Display rendering
# ---------------------------------------------------------------------------

def _fmt(value: Optional[float], decimals: int) -> str:
    return "" if value is None else f"{value:.{decimals}f}"


PAIR_COLUMNS = [
    "pair",
    "doc_pairs",
    "alignments",
    "avg_aligns_per_doc",
    "avg_sents_en_over_xx",
    "sents_per_doc_en",
    "sents_per_doc_xx",
    "avg_bleualign",
    "avg_bicleaner",
    "avg_density",
]


def render_pair_row(row: StatsRow) -> list[str]:
    return [
        row.pair_label,
        str(row.doc_pairs),
        str(row.alignments),
        _fmt(row.avg_aligns_per_doc, 1),
        _fmt(row.avg_len_ratio_en_over_xx, 2),
        _fmt(row.sents_per_doc_en, 1),
        _fmt(row.sents_per_doc_xx, 1),
        _fmt(row.avg_bleualign, 3),
        _fmt(row.avg_bicleaner, 3),
        _fmt(row.avg_density, 3),
    ]


def pair_stats_tsv(rows: Sequence[StatsRow]) -> str:
    lines = ["\t".join(PAIR_COLUMNS)]
    lines.extend("\t".join(render_pair_row(row)) for row in rows)
    return "\n".join(lines) + "\n"


def pair_stats_markdown(rows: Sequence[StatsRow]) -> str:
    cells = [PAIR_COLUMNS] + [render_pair_row(row) for row in rows]
    widths = [max(len(row[i]) for row in cells) for i in range(len(PAIR_COLUMNS))]
    out = []
    for index, row in enumerate(cells):
        out.append("| " + " | ".join(c.ljust(w) for c, w in zip(row, widths)) + " |")
        if index == 0:
            out.append("|" + "|".join("-" * (w + 2) for w in widths) + "|")
    return "\n".join(out) + "\n"


def language_totals_tsv(rows: Sequence[LanguageTotals]) -> str:
    lines = ["lang\tsentences\tdocs"]
    lines.extend(f"{r.lang}\t{r.sentences}\t{r.docs}" for r in rows)
    return "\n".join(lines) + "\n"


def language_totals_markdown(rows: Sequence[LanguageTotals]) -> str:
    cells = [["lang", "sentences", "docs"]] + [
        [r.lang, str(r.sentences), str(r.docs)] for r in rows
    ]
    widths = [max(len(row[i]) for row in cells) for i in range(3)]
    out = []
    for index, row in enumerate(cells):
        out.append("| " + " | ".join(c.ljust(w) for c, w in zip(row, widths)) + " |")
        if index == 0:
            out.append("|" + "|".join("-" * (w + 2) for w in widths) + "|")
    return "\n".join(out) + "\n"
