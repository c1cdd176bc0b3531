"""Command-line entry point: one subcommand per pipeline stage plus a
manifest-driven end-to-end ``run`` mode.

Exit codes: 0 success, 1 validation error, 2 stage failure.
"""

from __future__ import annotations

import argparse
import json
import os
import sys
from pathlib import Path

from . import (
    alignment,
    chunker,
    decontam,
    dedup,
    docbuild,
    filtering,
    metrics,
    pipeline,
    pivot,
    stats,
)
from .model import LinkGroup, serialize_cesalign

EXIT_OK = 0
EXIT_VALIDATION = 1
EXIT_STAGE = 2


def _cmd_build(args) -> int:
    docs = pipeline.build_documents_from_jsonl(args.input)
    pipeline.save_documents(args.output, docs)
    print(f"built {len(docs)} documents -> {args.output}")
    return EXIT_OK


def _cmd_dedup(args) -> int:
    docs = pipeline.load_documents(args.input)
    langs = {d.lang for d in docs}
    if len(langs) > 1:
        print(f"error: input mixes languages {sorted(langs)}", file=sys.stderr)
        return EXIT_VALIDATION
    kept, table = dedup.dedup_by_url(docs)
    pipeline.save_documents(args.output, kept)
    Path(args.remap).write_text(table.to_tsv(), encoding="utf-8")
    print(f"kept {len(kept)} of {len(docs)} documents; remap -> {args.remap}")
    return EXIT_OK


def _cmd_consolidate(args) -> int:
    collections = []
    for item in args.inputs:
        label, path = item.split("=", 1) if "=" in item else (item, item)
        collections.append((label, pipeline.load_documents(path)))
    unified, table = dedup.consolidate_english(collections)
    pipeline.save_documents(args.output, unified)
    Path(args.remap).write_text(table.to_tsv(), encoding="utf-8")
    total = sum(len(docs) for _, docs in collections)
    print(f"consolidated {total} English docs into {len(unified)}")
    return EXIT_OK


def _cmd_verify(args) -> int:
    docs = {d.doc_id: d for d in pipeline.load_documents(args.docs)}
    if args.more_docs:
        for path in args.more_docs:
            docs.update({d.doc_id: d for d in pipeline.load_documents(path)})
    groups = pipeline.load_link_groups(args.links)
    if args.remap:
        table = dedup.RemapTable.from_tsv(Path(args.remap).read_text(encoding="utf-8"))
        groups = [
            LinkGroup(table.resolve(g.from_doc), table.resolve(g.to_doc), g.links, g.pivot)
            for g in groups
        ]
    pairs, drop_counts = pipeline.build_pairs(groups, docs)
    pipeline.save_link_groups(args.output, pipeline.pairs_to_groups(pairs))
    if args.report:
        with open(args.report, "w", encoding="utf-8") as handle:
            for pair in pairs:
                handle.write(
                    json.dumps({"pair": pair.pair_id, "links": len(pair.links)}) + "\n"
                )
    print(
        f"verified {len(pairs)} pairs, kept {sum(len(p.links) for p in pairs)} links, "
        f"dropped {drop_counts or 0}"
    )
    return EXIT_OK


def _load_pairs(docs_paths, links_path):
    docs = {}
    for path in docs_paths:
        docs.update({d.doc_id: d for d in pipeline.load_documents(path)})
    groups = pipeline.load_link_groups(links_path)
    pairs, _ = pipeline.build_pairs(groups, docs)
    return pairs


def _cmd_density(args) -> int:
    pairs = _load_pairs(args.docs, args.links)
    print("pair_id\tdensity\tbleualign\tbicleaner\tbifixer")
    for pair in pairs:
        s = pair.avg_scores
        cells = [pair.pair_id, f"{pair.density:.6f}"] + [
            "" if v is None else f"{v:.6f}" for v in (s.bleualign, s.bicleaner, s.bifixer)
        ]
        print("\t".join(cells))
    return EXIT_OK


def _cmd_pivot(args) -> int:
    docs = {}
    for path in args.docs:
        docs.update({d.doc_id: d for d in pipeline.load_documents(path)})
    en_xx = pipeline.build_pairs(pipeline.load_link_groups(args.left), docs)[0]
    en_yy = pipeline.build_pairs(pipeline.load_link_groups(args.right), docs)[0]
    pivoted = pivot.pivot_doc_pairs(en_xx, en_yy)
    groups = [
        LinkGroup(p.xx_doc.doc_id, p.yy_doc.doc_id, (), pivot=p.en_doc.doc_id)
        for p in pivoted
    ]
    Path(args.output).write_text(serialize_cesalign(groups), encoding="utf-8")
    print(f"derived {len(pivoted)} pivoted document pairs")
    return EXIT_OK


def _scorer_from_env():
    command = os.environ.get("DOCBITEXT_SCORER_CMD")
    if command:
        return filtering.external_process_scorer(command.split())
    return filtering.lcs_stub_scorer()


def _cmd_filter(args) -> int:
    config = filtering.FilterConfig(
        min_density=args.min_density,
        min_doc_score=args.min_doc_score,
        window=args.window,
        slide=args.slide,
        keep_top_fraction=args.keep_top_fraction,
    )
    pairs = _load_pairs(args.docs, args.links)
    kept, dropped = filtering.threshold_filter(pairs, config)
    scorer = _scorer_from_env()
    scored_by_lang = {}
    for pair in kept:
        lang = pair.tgt_doc.lang if pair.src_doc.lang == "en" else pair.src_doc.lang
        score = filtering.document_score(pair, scorer, config.window, config.slide)
        scored_by_lang.setdefault(lang, []).append((pair, score))
    kept_by_lang = filtering.percentile_filter(scored_by_lang, config.keep_top_fraction)
    final = [p for lang_kept in kept_by_lang.values() for p in lang_kept]
    pipeline.save_link_groups(args.output, pipeline.pairs_to_groups(final))
    print(f"kept {len(final)} of {len(pairs)} pairs")
    return EXIT_OK


def _cmd_split(args) -> int:
    pairs = _load_pairs(args.docs, args.links)
    test, train = decontam.sample_test(pairs, args.n, args.seed)
    pipeline.save_link_groups(args.test_output, pipeline.pairs_to_groups(test))
    pipeline.save_link_groups(args.train_output, pipeline.pairs_to_groups(train))
    print(f"split {len(pairs)} pairs into {len(test)} test / {len(train)} train")
    return EXIT_OK


def _cmd_decontam(args) -> int:
    test = _load_pairs(args.docs, args.test)
    train = _load_pairs(args.docs, args.train)
    index = None
    if args.lsh:
        index = decontam.build_lsh_index([decontam.english_doc(p) for p in train])
    result = decontam.decontaminate(test, train, args.threshold, index)
    pipeline.save_link_groups(args.output, pipeline.pairs_to_groups(result.kept))
    if args.report:
        Path(args.report).write_text(
            "".join(row.as_tsv() for row in result.report), encoding="utf-8"
        )
    print(
        f"kept {len(result.kept)} of {len(test)} test pairs "
        f"({result.exact_comparisons} exact comparisons)"
    )
    return EXIT_OK


def _cmd_chunk(args) -> int:
    if args.history:
        print(
            "error: --history (cross-chunk prompt context) is reserved and not "
            "implemented; chunk prompts carry within-chunk context only",
            file=sys.stderr,
        )
        return EXIT_VALIDATION
    pairs = _load_pairs(args.docs, args.links)
    mode = args.mode if args.mode == "doc2doc" else f"chunk-{args.mode}"
    template = chunker.PromptTemplate.from_file(args.template_file) if args.template_file else None
    if args.budget is not None:
        result = chunker.budget_sample(pairs, mode, args.budget, args.seed, template)
        records = result.records
        print(f"emitted {len(records)} records, {result.emitted_tokens} tokens")
    else:
        records = [r for p in pairs for r in chunker.records_for_mode(p, mode, template)]
        print(f"emitted {len(records)} records")
    Path(args.output).write_text(chunker.write_jsonl(records), encoding="utf-8")
    return EXIT_OK


def _read_doc_lines(path: str) -> list[str]:
    with open(path, encoding="utf-8") as handle:
        return [line.rstrip("\n").replace("\\n", "\n") for line in handle]


def _cmd_eval(args) -> int:
    hyps = _read_doc_lines(args.hyp)
    refs = _read_doc_lines(args.ref)
    result = {}
    if args.metric in ("bleu", "both"):
        scores = metrics.doc_bleu(hyps, refs)
        result["bleu"] = {
            "score": round(scores.macro_average, 4),
            "per_doc": [round(s, 4) for s in scores.per_doc],
            "signature": scores.signature,
        }
    if args.metric in ("chrfpp", "both"):
        scores = metrics.doc_chrf_pp(hyps, refs)
        result["chrfpp"] = {
            "score": round(scores.macro_average, 4),
            "per_doc": [round(s, 4) for s in scores.per_doc],
            "signature": scores.signature,
        }
    if args.json:
        print(json.dumps(result, indent=2, sort_keys=True))
    else:
        for name, data in result.items():
            print(f"{name}\t{data['score']:.2f}\t{data['signature']}")
    return EXIT_OK


def _cmd_stats(args) -> int:
    pairs = _load_pairs(args.docs, args.links)
    by_label = {}
    for pair in pairs:
        by_label.setdefault(stats.pair_label(pair), []).append(pair)
    rows = [stats.pair_stats(group) for _, group in sorted(by_label.items())]
    tsv = stats.pair_stats_tsv(rows)
    Path(args.output).write_text(tsv, encoding="utf-8")
    if args.markdown:
        Path(args.markdown).write_text(stats.pair_stats_markdown(rows), encoding="utf-8")
    if args.figures:
        from . import plots

        written = plots.render_pair_stats_figures(rows, args.figures)
        print(f"wrote {len(written)} figures to {args.figures}")
    print(tsv, end="")
    return EXIT_OK


def _cmd_run(args) -> int:
    try:
        manifest = pipeline.PipelineManifest.from_file(args.manifest)
    except pipeline.ManifestError as exc:
        print(f"manifest error: {exc}", file=sys.stderr)
        return EXIT_VALIDATION
    try:
        report = pipeline.run_pipeline(manifest)
    except pipeline.StageError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_STAGE
    print(json.dumps(report, indent=2, sort_keys=True))
    return EXIT_OK


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="docbitext",
        description="Document-level parallel corpus construction and curation",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("build", help="build structured documents from raw JSONL")
    p.add_argument("--input", required=True, help="JSONL of {url, lang, collection, text}")
    p.add_argument("--output", required=True, help="corpus XML output")
    p.set_defaults(func=_cmd_build)

    p = sub.add_parser("dedup", help="per-URL exact dedup within one language")
    p.add_argument("--input", required=True)
    p.add_argument("--output", required=True)
    p.add_argument("--remap", required=True, help="TSV remap table output")
    p.set_defaults(func=_cmd_dedup)

    p = sub.add_parser("consolidate", help="global English dedup across pairs")
    p.add_argument("--inputs", nargs="+", required=True, metavar="LABEL=PATH")
    p.add_argument("--output", required=True)
    p.add_argument("--remap", required=True)
    p.set_defaults(func=_cmd_consolidate)

    p = sub.add_parser("verify", help="verify links against documents")
    p.add_argument("--docs", required=True)
    p.add_argument("--more-docs", nargs="*", default=[])
    p.add_argument("--links", required=True)
    p.add_argument("--remap", default=None)
    p.add_argument("--output", required=True)
    p.add_argument("--report", default=None, help="JSONL verification report")
    p.set_defaults(func=_cmd_verify)

    p = sub.add_parser("density", help="print per-pair density and score averages")
    p.add_argument("--docs", nargs="+", required=True)
    p.add_argument("--links", required=True)
    p.set_defaults(func=_cmd_density)

    p = sub.add_parser("pivot", help="derive non-English pairs via shared English docs")
    p.add_argument("--docs", nargs="+", required=True)
    p.add_argument("--left", required=True, help="cesAlign of en-xx pairs")
    p.add_argument("--right", required=True, help="cesAlign of en-yy pairs")
    p.add_argument("--output", required=True)
    p.set_defaults(func=_cmd_pivot)

    p = sub.add_parser("filter", help="thresholds + windowed scoring + percentile cut")
    p.add_argument("--docs", nargs="+", required=True)
    p.add_argument("--links", required=True)
    p.add_argument("--output", required=True)
    p.add_argument("--min-density", type=float, default=0.3)
    p.add_argument("--min-doc-score", type=float, default=0.3)
    p.add_argument("--window", type=int, default=3)
    p.add_argument("--slide", type=int, default=1)
    p.add_argument("--keep-top-fraction", type=float, default=0.25)
    p.set_defaults(func=_cmd_filter)

    p = sub.add_parser("split", help="random test/train split")
    p.add_argument("--docs", nargs="+", required=True)
    p.add_argument("--links", required=True)
    p.add_argument("--n", type=int, default=500)
    p.add_argument("--seed", type=int, default=13)
    p.add_argument("--test-output", required=True)
    p.add_argument("--train-output", required=True)
    p.set_defaults(func=_cmd_split)

    p = sub.add_parser("decontam", help="bigram-Jaccard decontamination of the test split")
    p.add_argument("--docs", nargs="+", required=True)
    p.add_argument("--test", required=True)
    p.add_argument("--train", required=True)
    p.add_argument("--output", required=True)
    p.add_argument("--threshold", type=float, default=0.8)
    group = p.add_mutually_exclusive_group()
    group.add_argument("--exact", dest="lsh", action="store_false", default=False)
    group.add_argument("--lsh", dest="lsh", action="store_true")
    p.add_argument("--report", default=None)
    p.set_defaults(func=_cmd_decontam)

    p = sub.add_parser("chunk", help="emit SFT records")
    p.add_argument("--docs", nargs="+", required=True)
    p.add_argument("--links", required=True)
    p.add_argument("--mode", choices=["1", "2", "5", "10", "doc2doc"], required=True)
    p.add_argument("--budget", type=int, default=None)
    p.add_argument("--seed", type=int, default=13)
    p.add_argument("--template-file", default=None)
    p.add_argument("--history", action="store_true",
                   help="reserved: cross-chunk prompt context (not implemented)")
    p.add_argument("--output", required=True)
    p.set_defaults(func=_cmd_chunk)

    p = sub.add_parser("eval", help="document-level BLEU / chrF++")
    p.add_argument("--hyp", required=True, help="one document per line, \\n-escaped")
    p.add_argument("--ref", required=True)
    p.add_argument("--metric", choices=["bleu", "chrfpp", "both"], default="both")
    p.add_argument("--json", action="store_true")
    p.set_defaults(func=_cmd_eval)

    p = sub.add_parser("stats", help="per-pair statistics tables and figures")
    p.add_argument("--docs", nargs="+", required=True)
    p.add_argument("--links", required=True)
    p.add_argument("--output", required=True, help="TSV output")
    p.add_argument("--markdown", default=None)
    p.add_argument("--figures", default=None, help="directory for rendered charts")
    p.set_defaults(func=_cmd_stats)

    p = sub.add_parser("run", help="manifest-driven end-to-end pipeline")
    p.add_argument("--manifest", required=True)
    p.set_defaults(func=_cmd_run)

    return parser


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        return args.func(args)
    except (ValueError, KeyError, OSError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_VALIDATION


if __name__ == "__main__":
    sys.exit(main())
