import json
import math
import random

import pytest

from docbitext.alignment import build_pair
from docbitext.chunker import (
    ALL_MODES,
    BudgetError,
    PromptTemplate,
    SftRecord,
    budget_sample,
    language_name,
    make_chunks,
    make_doc2doc,
    read_jsonl,
    records_for_mode,
    write_jsonl,
)
from docbitext.model import AlignmentLink, SentenceId

from conftest import make_document, make_pair, one_to_one_links


def aligned_pair(rng, n, src_lang="en", tgt_lang="fi"):
    src = make_document(rng, lang=src_lang, n_sentences=n)
    tgt = make_document(rng, lang=tgt_lang, n_sentences=n)
    pair, _ = build_pair(src, tgt, one_to_one_links(src, tgt, scores=False))
    return pair


class TestMakeChunks:
    @pytest.mark.parametrize("k", [1, 2, 5, 10])
    def test_source_spans_partition_links(self, k, rng):
        for _ in range(10):
            pair = aligned_pair(rng, rng.randint(1, 23))
            records = make_chunks(pair, k)
            spans = [i for r in records for i in r.source_span]
            assert sorted(spans) == list(range(len(pair.links)))
            assert all(len(r.source_span) <= k for r in records)
            assert len(records) == math.ceil(len(pair.links) / k)

    def test_last_run_may_be_shorter(self, rng):
        pair = aligned_pair(rng, 7)
        records = make_chunks(pair, 5)
        assert [len(r.source_span) for r in records] == [5, 2]

    def test_k1_reproduces_sentence_level(self, rng):
        pair = aligned_pair(rng, 4)
        records = make_chunks(pair, 1)
        src_texts = [pair.src_doc.sentence_text(sid)
                     for sid in sorted(pair.src_doc.sentence_ids())]
        for record, text in zip(records, src_texts):
            assert text in record.prompt

    def test_source_order_even_if_links_shuffled(self, rng):
        src = make_document(rng, n_sentences=5)
        tgt = make_document(rng, lang="fi", n_sentences=5)
        links = one_to_one_links(src, tgt, scores=False)
        shuffled = [links[i] for i in (3, 0, 4, 1, 2)]
        pair, _ = build_pair(src, tgt, shuffled)
        records = make_chunks(pair, 2)
        first_prompt_text = src.sentence_text(sorted(src.sentence_ids())[0])
        assert first_prompt_text in records[0].prompt

    def test_catalan_example_renders_byte_for_byte(self, rng):
        en = make_document(rng, lang="en", sentences=[
            "Online workshops are organized every month.",
            "The results will be shared with the community.",
        ])
        ca = make_document(rng, lang="ca", sentences=[
            "Cada mes s'organitzen tallers en línia.",
            "Els resultats es compartiran amb la comunitat.",
        ])
        pair, _ = build_pair(en, ca, one_to_one_links(en, ca, scores=False))
        (record,) = make_chunks(pair, 2)
        assert record.prompt == (
            "Translate the following source segment from English into Catalan.\n"
            "English: Online workshops are organized every month. "
            "The results will be shared with the community.\n"
            "Catalan: "
        )
        assert record.completion == (
            "Cada mes s'organitzen tallers en línia. "
            "Els resultats es compartiran amb la comunitat."
        )
        assert record.prompt + record.completion == (
            "Translate the following source segment from English into Catalan.\n"
            "English: Online workshops are organized every month. "
            "The results will be shared with the community.\n"
            "Catalan: Cada mes s'organitzen tallers en línia. "
            "Els resultats es compartiran amb la comunitat."
        )

    def test_rejects_nonpositive_k(self, rng):
        with pytest.raises(ValueError):
            make_chunks(aligned_pair(rng, 3), 0)


class TestDoc2Doc:
    def test_prompt_says_document(self, rng):
        pair = aligned_pair(rng, 3, tgt_lang="ca")
        record = make_doc2doc(pair)
        assert record.prompt.startswith(
            "Translate the following source document from English into Catalan.")
        assert record.mode == "doc2doc"

    def test_unaligned_target_sentences_still_in_completion(self, rng):
        src = make_document(rng, n_sentences=3)
        tgt = make_document(rng, lang="fi", n_sentences=5)
        links = one_to_one_links(src, tgt, scores=False)  # covers 3 of 5
        pair, _ = build_pair(src, tgt, links)
        record = make_doc2doc(pair)
        for _, text in tgt.sentences():
            assert text in record.completion

    def test_paragraphs_joined_by_newlines(self, rng):
        src = make_document(rng, n_sentences=8)
        assert src.content_text().count("\n") == len(src.paragraphs) - 1
        pair = aligned_pair(rng, 3)
        assert make_doc2doc(pair).completion == pair.tgt_doc.content_text()


class TestBudgetSample:
    def test_total_within_budget_plus_two_percent(self, rng):
        pairs = [make_pair(rng) for _ in range(60)]
        for mode in ALL_MODES:
            report = budget_sample(pairs, mode, token_budget=2000, seed=5)
            assert report.emitted_tokens <= 2000 * 1.02
            assert report.pairs_emitted > 0

    def test_stops_before_first_overflowing_pair(self, rng):
        pairs = [make_pair(rng) for _ in range(40)]
        report = budget_sample(pairs, "chunk-10", token_budget=500, seed=9)
        order = list(pairs)
        random.Random(9).shuffle(order)
        total = 0
        for i, pair in enumerate(order):
            tokens = sum(r.token_count() for r in records_for_mode(pair, "chunk-10"))
            if total + tokens > 500 * 1.02:
                break
            total += tokens
        assert report.emitted_tokens == total
        assert report.pairs_emitted == i

    def test_deterministic_by_seed(self, rng):
        pairs = [make_pair(rng) for _ in range(30)]
        a = budget_sample(pairs, "chunk-2", 1500, seed=1)
        b = budget_sample(pairs, "chunk-2", 1500, seed=1)
        assert a.records == b.records
        c = budget_sample(pairs, "chunk-2", 1500, seed=2)
        assert a.records != c.records

    def test_budget_too_small_raises(self, rng):
        pairs = [make_pair(rng)]
        with pytest.raises(BudgetError):
            budget_sample(pairs, "doc2doc", token_budget=1, seed=0)

    def test_empty_corpus_is_fine(self):
        report = budget_sample([], "chunk-1", 100, seed=0)
        assert report.records == [] and report.emitted_tokens == 0

    def test_whole_pairs_only(self, rng):
        pairs = [make_pair(rng) for _ in range(20)]
        report = budget_sample(pairs, "chunk-1", 800, seed=3)
        by_pair = {}
        for record in report.records:
            by_pair.setdefault(record.pair_id, []).append(record)
        for pair in pairs:
            if pair.pair_id in by_pair:
                assert len(by_pair[pair.pair_id]) == len(records_for_mode(pair, "chunk-1"))


class TestRecordsAndIo:
    def test_empty_completion_rejected(self):
        with pytest.raises(ValueError):
            SftRecord("p", "en", "fi", "chunk-1", "prompt", "", (0,))

    def test_token_count(self):
        record = SftRecord("p", "en", "fi", "chunk-1", "two words", "three more words", (0,))
        assert record.token_count() == 5

    def test_jsonl_roundtrip(self, rng):
        pair = aligned_pair(rng, 6)
        records = make_chunks(pair, 2) + [make_doc2doc(pair)]
        text = write_jsonl(records)
        assert list(read_jsonl(text.splitlines())) == records
        for line in text.strip().splitlines():
            assert set(json.loads(line)) == {
                "pair_id", "lang_src", "lang_tgt", "mode", "prompt",
                "completion", "source_span"}

    def test_template_from_file(self, tmp_path):
        path = tmp_path / "template.json"
        path.write_text(json.dumps({
            "segment_template": "S {src_lang_name}>{tgt_lang_name}: {src_text} =",
            "document_template": "D: {src_text} =",
        }))
        template = PromptTemplate.from_file(path)
        assert template.render("chunk", "en", "fi", "hi") == "S English>Finnish: hi ="
        assert template.render("doc2doc", "en", "fi", "hi") == "D: hi ="

    def test_language_name_fallback(self):
        assert language_name("en") == "English"
        assert language_name("zz") == "zz"

    def test_unknown_mode_rejected(self, rng):
        with pytest.raises(ValueError, match="mode"):
            records_for_mode(aligned_pair(rng, 2), "chunk-x")
