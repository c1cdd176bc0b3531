"""SFT record construction: chunk-k and doc2doc modes with token budgeting.

Chunk mode groups consecutive aligned sentence pairs into runs of k and emits
one prompt/completion record per run; doc2doc emits one record per document
pair, including target sentences that participate in no link.  Prompts and
completions are stored separately so a trainer can mask the prompt and put
loss on the target only.
"""

from __future__ import annotations

import json
import random
from dataclasses import dataclass, asdict
from typing import Iterator, Sequence

from .model import DocPairAlignment

CHUNK_MODES = ("chunk-1", "chunk-2", "chunk-5", "chunk-10")
ALL_MODES = CHUNK_MODES + ("doc2doc",)

LANGUAGE_NAMES = {
    "ar": "Arabic",
    "ca": "Catalan",
    "de": "German",
    "en": "English",
    "es": "Spanish",
    "et": "Estonian",
    "eu": "Basque",
    "fa": "Persian",
    "fi": "Finnish",
    "fr": "French",
    "hi": "Hindi",
    "is": "Icelandic",
    "ko": "Korean",
    "ml": "Malayalam",
    "ur": "Urdu",
}


def language_name(code: str) -> str:
    return LANGUAGE_NAMES.get(code, code)


@dataclass(frozen=True)
class PromptTemplate:
    """Slot-substitution templates for segment and document prompts.

    The prompt ends with the target-language label so the completion is
    exactly the target text.
    """

    segment_template: str = (
        "Translate the following source segment from {src_lang_name} into {tgt_lang_name}.\n"
        "{src_lang_name}: {src_text}\n"
        "{tgt_lang_name}: "
    )
    document_template: str = (
        "Translate the following source document from {src_lang_name} into {tgt_lang_name}.\n"
        "{src_lang_name}: {src_text}\n"
        "{tgt_lang_name}: "
    )

    def render(self, mode: str, src_lang: str, tgt_lang: str, src_text: str) -> str:
        template = self.document_template if mode == "doc2doc" else self.segment_template
        return template.format(
            src_lang_name=language_name(src_lang),
            tgt_lang_name=language_name(tgt_lang),
            src_text=src_text,
        )

    @classmethod
    def from_file(cls, path) -> "PromptTemplate":
        with open(path, encoding="utf-8") as handle:
            data = json.load(handle)
        return cls(**data)


@dataclass(frozen=True)
class SftRecord:
    pair_id: str
    lang_src: str
    lang_tgt: str
    mode: str
    prompt: str
    completion: str
    source_span: tuple[int, ...]

    def __post_init__(self) -> None:
        if not self.completion:
            raise ValueError(f"record for {self.pair_id} has an empty completion")

    def token_count(self) -> int:
        return len(self.prompt.split()) + len(self.completion.split())

    def to_json(self) -> str:
        record = asdict(self)
        record["source_span"] = list(self.source_span)
        return json.dumps(record, ensure_ascii=False)


class BudgetError(ValueError):
    """Token budget is non-positive or too small for a single pair."""


def _span_text(doc, links, side: str) -> str:
    ids_attr = "src_ids" if side == "src" else "tgt_ids"
    return " ".join(
        doc.sentence_text(sid) for link in links for sid in getattr(link, ids_attr)
    )


def make_chunks(
    pair: DocPairAlignment,
    k: int,
    template: PromptTemplate | None = None,
) -> list[SftRecord]:
    """Group links (in source order) into consecutive runs of k; the last run
    may be shorter.  k=1 reproduces sentence-level records."""
    if k < 1:
        raise ValueError("chunk size must be positive")
    template = template or PromptTemplate()
    links = sorted(range(len(pair.links)), key=lambda i: pair.links[i].src_ids[0])
    records = []
    for start in range(0, len(links), k):
        span = tuple(links[start : start + k])
        run = [pair.links[i] for i in span]
        src_text = _span_text(pair.src_doc, run, "src")
        prompt = template.render("chunk", pair.src_doc.lang, pair.tgt_doc.lang, src_text)
        records.append(
            SftRecord(
                pair_id=pair.pair_id,
                lang_src=pair.src_doc.lang,
                lang_tgt=pair.tgt_doc.lang,
                mode=f"chunk-{k}",
                prompt=prompt,
                completion=_span_text(pair.tgt_doc, run, "tgt"),
                source_span=span,
            )
        )
    return records


def make_doc2doc(pair: DocPairAlignment, template: PromptTemplate | None = None) -> SftRecord:
    """One record over the entire documents, unaligned sentences included;
    paragraphs are joined by newlines and sentences by spaces."""
    template = template or PromptTemplate()
    src_text = pair.src_doc.content_text()
    prompt = template.render("doc2doc", pair.src_doc.lang, pair.tgt_doc.lang, src_text)
    return SftRecord(
        pair_id=pair.pair_id,
        lang_src=pair.src_doc.lang,
        lang_tgt=pair.tgt_doc.lang,
        mode="doc2doc",
        prompt=prompt,
        completion=pair.tgt_doc.content_text(),
        source_span=tuple(range(len(pair.links))),
    )


def records_for_mode(
    pair: DocPairAlignment, mode: str, template: PromptTemplate | None = None
) -> list[SftRecord]:
    if mode == "doc2doc":
        return [make_doc2doc(pair, template)]
    if mode.startswith("chunk-") and mode.split("-", 1)[1].isdigit():
        return make_chunks(pair, int(mode.split("-", 1)[1]), template)
    raise ValueError(f"unknown mode {mode!r}")


@dataclass
class BudgetReport:
    records: list[SftRecord]
    emitted_tokens: int
    pairs_emitted: int


def budget_sample(
    pairs: Sequence[DocPairAlignment],
    mode: str,
    token_budget: int,
    seed: int,
    template: PromptTemplate | None = None,
) -> BudgetReport:
    """Shuffle pairs deterministically, then emit whole pairs until the next
    one would push the whitespace-token total more than 2% over budget."""
    if token_budget <= 0:
        raise BudgetError("token budget must be positive")
    order = list(pairs)
    random.Random(seed).shuffle(order)
    limit = token_budget * 1.02
    emitted: list[SftRecord] = []
    total = 0
    pairs_emitted = 0
    for pair in order:
        records = records_for_mode(pair, mode, template)
        if not records:
            continue
        tokens = sum(r.token_count() for r in records)
        if total + tokens > limit:
            break
        emitted.extend(records)
        total += tokens
        pairs_emitted += 1
    if not emitted and order:
        raise BudgetError(
            f"budget {token_budget} is smaller than the first pair's records"
        )
    return BudgetReport(records=emitted, emitted_tokens=total, pairs_emitted=pairs_emitted)


def write_jsonl(records: Sequence[SftRecord]) -> str:
    return "".join(record.to_json() + "\n" for record in records)


def read_jsonl(lines) -> Iterator[SftRecord]:
    for line in lines:
        line = line.strip()
        if not line:
            continue
        data = json.loads(line)
        data["source_span"] = tuple(data["source_span"])
        yield SftRecord(**data)
