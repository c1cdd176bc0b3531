"""Training-corpus curation: hard thresholds, windowed quality scoring, and
per-language top-percentile selection.

Thresholds run first (they are cheap), then each surviving pair is scored on
overlapping windows of consecutive aligned sentence pairs, and finally the
top fraction per language is kept.  The quality estimator itself is external;
it is abstracted as a (src_text, tgt_text) -> [0, 1] callable, with a
deterministic longest-common-subsequence stub for tests and an external
JSONL-process adapter for real models.
"""

from __future__ import annotations

import json
import math
import subprocess
from dataclasses import dataclass
from typing import Callable, Iterable, Sequence

from .model import AlignmentLink, DocPairAlignment


class ScorerError(RuntimeError):
    """Quality scorer failed; carries the window index when applicable."""


@dataclass(frozen=True)
class QualityScorer:
    """Named (src_text, tgt_text) -> real in [0, 1]; must be deterministic."""

    name: str
    score: Callable[[str, str], float]


@dataclass(frozen=True)
class FilterConfig:
    min_density: float = 0.3
    min_doc_score: float = 0.3
    window: int = 3
    slide: int = 1
    keep_top_fraction: float = 0.25

    def __post_init__(self) -> None:
        if not 0.0 <= self.min_density <= 1.0 or not 0.0 <= self.min_doc_score <= 1.0:
            raise ValueError("thresholds must be in [0, 1]")
        if self.window < 1 or self.slide < 1 or self.slide > self.window:
            raise ValueError("need 1 <= slide <= window")
        if not 0.0 < self.keep_top_fraction <= 1.0:
            raise ValueError("keep_top_fraction must be in (0, 1]")


def threshold_filter(
    pairs: Sequence[DocPairAlignment],
    config: FilterConfig = FilterConfig(),
) -> tuple[list[DocPairAlignment], list[tuple[DocPairAlignment, str]]]:
    """Keep pairs with density and doc-averaged bicleaner both at or above
    their thresholds; return (kept, dropped-with-reason)."""
    kept = []
    dropped = []
    for pair in pairs:
        if pair.density < config.min_density:
            dropped.append((pair, "density"))
        elif pair.avg_scores.bicleaner is None:
            dropped.append((pair, "unscored"))
        elif pair.avg_scores.bicleaner < config.min_doc_score:
            dropped.append((pair, "score"))
        else:
            kept.append(pair)
    return kept, dropped


def _link_text(doc, ids) -> str:
    return " ".join(doc.sentence_text(sid) for sid in ids)


def window_count(n_links: int, window: int, slide: int) -> int:
    if n_links <= window:
        return 1
    return (n_links - window) // slide + 1


def window_scores(
    pair: DocPairAlignment,
    scorer: QualityScorer,
    window: int = 3,
    slide: int = 1,
) -> list[float]:
    """Score overlapping runs of ``window`` consecutive links, stepped by
    ``slide``; fewer links than a window yields one truncated window."""
    if not pair.links:
        raise ValueError(f"pair {pair.pair_id} has no links to score")
    links = sorted(pair.links, key=lambda l: l.src_ids[0])
    windows: list[Sequence[AlignmentLink]] = []
    if len(links) <= window:
        windows.append(links)
    else:
        for start in range(0, len(links) - window + 1, slide):
            windows.append(links[start : start + window])
    scores = []
    for index, run in enumerate(windows):
        src_text = " ".join(_link_text(pair.src_doc, link.src_ids) for link in run)
        tgt_text = " ".join(_link_text(pair.tgt_doc, link.tgt_ids) for link in run)
        try:
            scores.append(scorer.score(src_text, tgt_text))
        except Exception as exc:
            raise ScorerError(f"scorer {scorer.name!r} failed on window {index}") from exc
    return scores


def document_score(pair: DocPairAlignment, scorer: QualityScorer, window: int = 3, slide: int = 1) -> float:
    """Mean of the pair's window scores."""
    scores = window_scores(pair, scorer, window, slide)
    return sum(scores) / len(scores)


def percentile_filter(
    scored_by_lang: dict[str, Sequence[tuple[DocPairAlignment, float]]],
    keep_top_fraction: float = 0.25,
) -> dict[str, list[DocPairAlignment]]:
    """Per language, keep the pairs scoring at or above the nearest-rank
    cutoff for the top fraction; ties at the cutoff are kept."""
    if not 0.0 < keep_top_fraction <= 1.0:
        raise ValueError("keep_top_fraction must be in (0, 1]")
    kept: dict[str, list[DocPairAlignment]] = {}
    for lang, scored in scored_by_lang.items():
        if not scored:
            kept[lang] = []
            continue
        ordered = sorted((score for _, score in scored), reverse=True)
        rank = math.ceil(keep_top_fraction * len(ordered))
        cutoff = ordered[rank - 1]
        kept[lang] = [pair for pair, score in scored if score >= cutoff]
    return kept


# ---------------------------------------------------------------------------
# Scorers
# ---------------------------------------------------------------------------

def _lcs_length(a: Sequence[str], b: Sequence[str]) -> int:
    if not a or not b:
        return 0
    previous = [0] * (len(b) + 1)
    for token_a in a:
        current = [0]
        for j, token_b in enumerate(b, start=1):
            if token_a == token_b:
                current.append(previous[j - 1] + 1)
            else:
                current.append(max(previous[j], current[j - 1]))
        previous = current
    return previous[-1]


def lcs_stub_scorer() -> QualityScorer:
    """Deterministic test stand-in: token-level LCS length over the longer
    token count.  Not a translation quality estimate; only its determinism
    and [0, 1] range matter."""

    def score(src_text: str, tgt_text: str) -> float:
        a, b = src_text.split(), tgt_text.split()
        longest = max(len(a), len(b))
        if longest == 0:
            return 1.0
        return _lcs_length(a, b) / longest

    return QualityScorer("lcs-stub", score)


def external_process_scorer(command: list[str], name: str = "external") -> QualityScorer:
    """Adapter for an external quality model: the command reads JSONL
    {"src", "tgt"} records on stdin and writes JSONL {"score"} on stdout,
    one line per input line."""

    def score(src_text: str, tgt_text: str) -> float:
        payload = json.dumps({"src": src_text, "tgt": tgt_text}) + "\n"
        proc = subprocess.run(
            command, input=payload, capture_output=True, text=True, check=False
        )
        if proc.returncode != 0:
            raise ScorerError(
                f"scorer command {command} exited {proc.returncode}: {proc.stderr.strip()}"
            )
        return float(json.loads(proc.stdout.splitlines()[0])["score"])

    return QualityScorer(name, score)


def decision_log_tsv(rows: Iterable[tuple[str, str, str, float]]) -> str:
    """Render filter decisions as TSV: pair_id, stage, decision, value."""
    return "".join(
        f"{pair_id}\t{stage}\t{decision}\t{value:g}\n"
        for pair_id, stage, decision, value in rows
    )
