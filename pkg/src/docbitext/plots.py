"""Figure rendering for the statistics report path.

Every chart is written to a file next to the delimited output; nothing is
shown interactively, so the Agg backend is forced before pyplot loads.
"""

from __future__ import annotations

from pathlib import Path
from typing import Sequence

import matplotlib

matplotlib.use("Agg")

import matplotlib.pyplot as plt

from .stats import LanguageTotals, StatsRow


def _bar(ax, labels, values, title, ylabel):
    ax.bar(range(len(labels)), values, color="#4878a8")
    ax.set_xticks(range(len(labels)))
    ax.set_xticklabels(labels, rotation=45, ha="right", fontsize=8)
    ax.set_title(title)
    ax.set_ylabel(ylabel)


def render_pair_stats_figures(rows: Sequence[StatsRow], out_dir: str | Path) -> list[Path]:
    """Density, score, and volume bar charts per language pair.

    Returns the written paths; empty input renders nothing.
    """
    rows = [r for r in rows if r.doc_pairs > 0]
    out_dir = Path(out_dir)
    out_dir.mkdir(parents=True, exist_ok=True)
    if not rows:
        return []
    labels = [r.pair_label for r in rows]
    written = []

    fig, ax = plt.subplots(figsize=(max(4, 0.5 * len(rows)), 4))
    _bar(ax, labels, [r.avg_density or 0.0 for r in rows],
         "Average alignment density", "density")
    fig.tight_layout()
    path = out_dir / "alignment_density.png"
    fig.savefig(path, dpi=150)
    plt.close(fig)
    written.append(path)

    fig, ax = plt.subplots(figsize=(max(4, 0.5 * len(rows)), 4))
    _bar(ax, labels, [r.doc_pairs for r in rows], "Aligned document pairs", "pairs")
    fig.tight_layout()
    path = out_dir / "doc_pairs.png"
    fig.savefig(path, dpi=150)
    plt.close(fig)
    written.append(path)

    scored = [r for r in rows if r.avg_bicleaner is not None]
    if scored:
        fig, ax = plt.subplots(figsize=(max(4, 0.5 * len(scored)), 4))
        _bar(ax, [r.pair_label for r in scored],
             [r.avg_bicleaner for r in scored],
             "Doc-averaged bicleaner score", "score")
        fig.tight_layout()
        path = out_dir / "bicleaner_scores.png"
        fig.savefig(path, dpi=150)
        plt.close(fig)
        written.append(path)
    return written


def render_language_totals_figure(
    rows: Sequence[LanguageTotals], out_dir: str | Path
) -> list[Path]:
    rows = [r for r in rows if r.lang != "total"]
    out_dir = Path(out_dir)
    out_dir.mkdir(parents=True, exist_ok=True)
    if not rows:
        return []
    fig, ax = plt.subplots(figsize=(max(4, 0.5 * len(rows)), 4))
    _bar(ax, [r.lang for r in rows], [r.sentences for r in rows],
         "Sentences per language", "sentences")
    fig.tight_layout()
    path = out_dir / "language_totals.png"
    fig.savefig(path, dpi=150)
    plt.close(fig)
    return [path]
