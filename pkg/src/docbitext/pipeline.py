"""Manifest-driven pipeline: build -> dedup -> verify -> density -> filter ->
split -> decontam -> chunk -> stats over one language pair.

Each stage reads and writes files under the manifest's work directory, so a
run is resumable at stage granularity and two runs over identical inputs are
byte-identical.  A JSON run report records per-stage counts and the effective
configuration.
"""

from __future__ import annotations

import json
from dataclasses import dataclass, field
from pathlib import Path
from typing import Optional

from . import alignment, chunker, decontam, dedup, docbuild, filtering, stats
from .model import (
    DocPairAlignment,
    LinkGroup,
    StructuredDocument,
    parse_cesalign,
    parse_corpus_xml,
    serialize_cesalign,
    serialize_corpus_xml,
)

STAGE_ORDER = [
    "build",
    "dedup",
    "verify",
    "density",
    "filter",
    "split",
    "decontam",
    "chunk",
    "stats",
]


class ManifestError(ValueError):
    """Manifest fails validation (unknown stage, bad order, missing paths)."""


class StageError(RuntimeError):
    """A stage failed mid-run; carries the stage name."""

    def __init__(self, stage: str, cause: Exception):
        super().__init__(f"stage {stage!r} failed: {cause}")
        self.stage = stage


@dataclass
class PipelineManifest:
    workdir: Path
    raw_src: Path
    raw_en: Path
    links: Path
    stages: list[str]
    seed: int = 13
    test_size: int = 500
    decontam_threshold: float = 0.8
    use_lsh: bool = False
    chunk_mode: str = "chunk-10"
    token_budget: Optional[int] = None
    filter_config: filtering.FilterConfig = field(default_factory=filtering.FilterConfig)

    @classmethod
    def from_file(cls, path: str | Path) -> "PipelineManifest":
        path = Path(path)
        try:
            data = json.loads(path.read_text(encoding="utf-8"))
        except json.JSONDecodeError as exc:
            raise ManifestError(f"manifest is not valid JSON: {exc}") from exc
        try:
            base = path.parent
            manifest = cls(
                workdir=base / data["workdir"],
                raw_src=base / data["raw_src"],
                raw_en=base / data["raw_en"],
                links=base / data["links"],
                stages=list(data["stages"]),
                seed=data.get("seed", 13),
                test_size=data.get("test_size", 500),
                decontam_threshold=data.get("decontam_threshold", 0.8),
                use_lsh=data.get("use_lsh", False),
                chunk_mode=data.get("chunk_mode", "chunk-10"),
                token_budget=data.get("token_budget"),
                filter_config=filtering.FilterConfig(**data.get("filter", {})),
            )
        except (KeyError, TypeError, ValueError) as exc:
            raise ManifestError(f"invalid manifest: {exc}") from exc
        manifest.validate()
        return manifest

    def validate(self) -> None:
        unknown = [s for s in self.stages if s not in STAGE_ORDER]
        if unknown:
            raise ManifestError(f"unknown stages: {unknown}")
        indices = [STAGE_ORDER.index(s) for s in self.stages]
        if indices != sorted(indices) or len(set(indices)) != len(indices):
            raise ManifestError(
                f"stages must follow the dependency order {STAGE_ORDER}, got {self.stages}"
            )
        for name in ("raw_src", "raw_en", "links"):
            if not getattr(self, name).exists():
                raise ManifestError(f"{name} path {getattr(self, name)} does not exist")
        if self.chunk_mode not in chunker.ALL_MODES:
            raise ManifestError(f"chunk_mode must be one of {chunker.ALL_MODES}")


# ---------------------------------------------------------------------------
# I/O helpers shared by the CLI subcommands
# ---------------------------------------------------------------------------

def load_documents(path: str | Path) -> list[StructuredDocument]:
    return parse_corpus_xml(Path(path).read_text(encoding="utf-8"))


def save_documents(path: str | Path, docs: list[StructuredDocument]) -> None:
    Path(path).write_text(serialize_corpus_xml(docs), encoding="utf-8")


def load_link_groups(path: str | Path) -> list[LinkGroup]:
    return parse_cesalign(Path(path).read_text(encoding="utf-8"))


def save_link_groups(path: str | Path, groups: list[LinkGroup]) -> None:
    Path(path).write_text(serialize_cesalign(groups), encoding="utf-8")


def build_pairs(
    groups: list[LinkGroup], documents: dict[str, StructuredDocument]
) -> tuple[list[DocPairAlignment], dict[str, int]]:
    """Assemble verified pairs from link groups; returns aggregate drop counts."""
    pairs = []
    drop_counts: dict[str, int] = {}
    for grp in groups:
        try:
            src = documents[grp.from_doc]
            tgt = documents[grp.to_doc]
        except KeyError as exc:
            raise dedup.DanglingReferenceError(
                f"link group references unknown document {exc.args[0]!r}"
            ) from exc
        pair, report = alignment.build_pair(src, tgt, grp.links)
        pairs.append(pair)
        for reason, count in report.dropped.items():
            drop_counts[reason] = drop_counts.get(reason, 0) + count
    return pairs, drop_counts


def pairs_to_groups(pairs: list[DocPairAlignment]) -> list[LinkGroup]:
    return [
        LinkGroup(p.src_doc.doc_id, p.tgt_doc.doc_id, p.links) for p in pairs
    ]


def build_documents_from_jsonl(path: str | Path) -> list[StructuredDocument]:
    segmenter = docbuild.default_segmenter()
    with open(path, encoding="utf-8") as handle:
        records = list(docbuild.read_raw_jsonl(handle))
    return [
        docbuild.build_document(
            r["text"], r["url"], r["lang"], r["collection"], segmenter
        )
        for r in records
    ]


# ---------------------------------------------------------------------------
# The end-to-end run
# ---------------------------------------------------------------------------

def run_pipeline(manifest: PipelineManifest) -> dict:
    """Execute the manifest's stages in order; returns the run report dict."""
    manifest.validate()
    work = manifest.workdir
    work.mkdir(parents=True, exist_ok=True)
    report: dict = {
        "seed": manifest.seed,
        "config": {
            "test_size": manifest.test_size,
            "decontam_threshold": manifest.decontam_threshold,
            "use_lsh": manifest.use_lsh,
            "chunk_mode": manifest.chunk_mode,
            "token_budget": manifest.token_budget,
            "filter": {
                "min_density": manifest.filter_config.min_density,
                "min_doc_score": manifest.filter_config.min_doc_score,
                "window": manifest.filter_config.window,
                "slide": manifest.filter_config.slide,
                "keep_top_fraction": manifest.filter_config.keep_top_fraction,
            },
        },
        "stages": {},
    }

    docs: list[StructuredDocument] = []
    groups: list[LinkGroup] = []
    pairs: list[DocPairAlignment] = []
    kept_pairs: list[DocPairAlignment] = []
    test_pairs: list[DocPairAlignment] = []
    train_pairs: list[DocPairAlignment] = []

    for stage in manifest.stages:
        try:
            if stage == "build":
                src_docs = build_documents_from_jsonl(manifest.raw_src)
                en_docs = build_documents_from_jsonl(manifest.raw_en)
                docs = src_docs + en_docs
                save_documents(work / "documents.xml", docs)
                report["stages"]["build"] = {
                    "src_docs": len(src_docs),
                    "en_docs": len(en_docs),
                }
            elif stage == "dedup":
                if not docs:
                    docs = load_documents(work / "documents.xml")
                by_lang: dict[str, list[StructuredDocument]] = {}
                for doc in docs:
                    by_lang.setdefault(doc.lang, []).append(doc)
                kept_docs: list[StructuredDocument] = []
                table = dedup.RemapTable()
                for lang in sorted(by_lang):
                    lang_kept, lang_table = dedup.dedup_by_url(by_lang[lang])
                    kept_docs.extend(lang_kept)
                    table = table.merge(lang_table)
                docs = kept_docs
                save_documents(work / "documents.dedup.xml", docs)
                (work / "remap.tsv").write_text(table.to_tsv(), encoding="utf-8")
                report["stages"]["dedup"] = {
                    "kept": len(docs),
                    "dropped": len(table.mapping),
                }
            elif stage == "verify":
                if not docs:
                    docs = load_documents(work / "documents.dedup.xml")
                index = {d.doc_id: d for d in docs}
                table = dedup.RemapTable.from_tsv(
                    (work / "remap.tsv").read_text(encoding="utf-8")
                ) if (work / "remap.tsv").exists() else dedup.RemapTable()
                raw_groups = load_link_groups(manifest.links)
                remapped = [
                    LinkGroup(
                        table.resolve(g.from_doc), table.resolve(g.to_doc), g.links, g.pivot
                    )
                    for g in raw_groups
                ]
                pairs, drop_counts = build_pairs(remapped, index)
                groups = pairs_to_groups(pairs)
                save_link_groups(work / "links.verified.xml", groups)
                report["stages"]["verify"] = {
                    "pairs": len(pairs),
                    "links_kept": sum(len(p.links) for p in pairs),
                    "links_dropped": drop_counts,
                }
            elif stage == "density":
                lines = ["pair_id\tdensity\tbleualign\tbicleaner\tbifixer"]
                for pair in pairs:
                    s = pair.avg_scores
                    lines.append(
                        f"{pair.pair_id}\t{pair.density:.6f}"
                        + "".join(
                            "\t" + ("" if v is None else f"{v:.6f}")
                            for v in (s.bleualign, s.bicleaner, s.bifixer)
                        )
                    )
                (work / "density.tsv").write_text("\n".join(lines) + "\n", encoding="utf-8")
                report["stages"]["density"] = {"pairs": len(pairs)}
            elif stage == "filter":
                config = manifest.filter_config
                thresholded, dropped = filtering.threshold_filter(pairs, config)
                scorer = filtering.lcs_stub_scorer()
                scored_by_lang: dict[str, list] = {}
                log_rows = []
                for pair, reason in dropped:
                    log_rows.append((pair.pair_id, "threshold", f"drop:{reason}", pair.density))
                for pair in thresholded:
                    score = filtering.document_score(
                        pair, scorer, config.window, config.slide
                    )
                    lang = pair.tgt_doc.lang if pair.src_doc.lang == "en" else pair.src_doc.lang
                    scored_by_lang.setdefault(lang, []).append((pair, score))
                kept_by_lang = filtering.percentile_filter(
                    scored_by_lang, config.keep_top_fraction
                )
                kept_ids = {
                    p.pair_id for kept in kept_by_lang.values() for p in kept
                }
                kept_pairs = [p for p in thresholded if p.pair_id in kept_ids]
                for lang, scored in scored_by_lang.items():
                    for pair, score in scored:
                        decision = "keep" if pair.pair_id in kept_ids else "drop:percentile"
                        log_rows.append((pair.pair_id, "percentile", decision, score))
                (work / "filter.log.tsv").write_text(
                    filtering.decision_log_tsv(log_rows), encoding="utf-8"
                )
                save_link_groups(work / "links.filtered.xml", pairs_to_groups(kept_pairs))
                report["stages"]["filter"] = {
                    "in": len(pairs),
                    "kept": len(kept_pairs),
                    "dropped": len(pairs) - len(kept_pairs),
                }
            elif stage == "split":
                test_pairs, train_pairs = decontam.sample_test(
                    kept_pairs, manifest.test_size, manifest.seed
                )
                save_link_groups(work / "links.test.xml", pairs_to_groups(test_pairs))
                save_link_groups(work / "links.train.xml", pairs_to_groups(train_pairs))
                report["stages"]["split"] = {
                    "test": len(test_pairs),
                    "train": len(train_pairs),
                }
            elif stage == "decontam":
                index = None
                if manifest.use_lsh:
                    index = decontam.build_lsh_index(
                        [decontam.english_doc(p) for p in train_pairs]
                    )
                result = decontam.decontaminate(
                    test_pairs, train_pairs, manifest.decontam_threshold, index
                )
                test_pairs = result.kept
                save_link_groups(work / "links.test.clean.xml", pairs_to_groups(test_pairs))
                (work / "decontam.tsv").write_text(
                    "".join(row.as_tsv() for row in result.report), encoding="utf-8"
                )
                report["stages"]["decontam"] = {
                    "kept": len(result.kept),
                    "removed": len(result.report) - len(result.kept),
                    "exact_comparisons": result.exact_comparisons,
                }
            elif stage == "chunk":
                if manifest.token_budget is not None:
                    budget = chunker.budget_sample(
                        train_pairs,
                        manifest.chunk_mode,
                        manifest.token_budget,
                        manifest.seed,
                    )
                    records = budget.records
                    emitted_tokens = budget.emitted_tokens
                else:
                    records = [
                        r
                        for p in train_pairs
                        for r in chunker.records_for_mode(p, manifest.chunk_mode)
                    ]
                    emitted_tokens = sum(r.token_count() for r in records)
                (work / "sft.jsonl").write_text(
                    chunker.write_jsonl(records), encoding="utf-8"
                )
                report["stages"]["chunk"] = {
                    "records": len(records),
                    "tokens": emitted_tokens,
                }
            elif stage == "stats":
                rows = []
                if train_pairs or test_pairs or kept_pairs or pairs:
                    pool = train_pairs + test_pairs if (train_pairs or test_pairs) else (
                        kept_pairs or pairs
                    )
                    rows = [stats.pair_stats(pool)]
                (work / "pair_stats.tsv").write_text(
                    stats.pair_stats_tsv(rows), encoding="utf-8"
                )
                (work / "pair_stats.md").write_text(
                    stats.pair_stats_markdown(rows), encoding="utf-8"
                )
                from . import plots

                figures = plots.render_pair_stats_figures(rows, work / "figures")
                report["stages"]["stats"] = {
                    "rows": len(rows),
                    "figures": [p.name for p in figures],
                }
        except Exception as exc:  # noqa: BLE001 - report which stage failed
            report["error"] = {"stage": stage, "message": str(exc)}
            (work / "run-report.json").write_text(
                json.dumps(report, indent=2, sort_keys=True) + "\n", encoding="utf-8"
            )
            raise StageError(stage, exc) from exc

    (work / "run-report.json").write_text(
        json.dumps(report, indent=2, sort_keys=True) + "\n", encoding="utf-8"
    )
    return report
