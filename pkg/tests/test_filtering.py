import math
import random
import sys

import pytest
from hypothesis import given, settings, strategies as st

from docbitext.alignment import build_pair
from docbitext.filtering import (
    FilterConfig,
    QualityScorer,
    ScorerError,
    decision_log_tsv,
    document_score,
    external_process_scorer,
    lcs_stub_scorer,
    percentile_filter,
    threshold_filter,
    window_count,
    window_scores,
)
from docbitext.model import AlignmentLink, AlignmentScoreSet

from conftest import make_document, one_to_one_links


def pair_with(rng, n_sentences, n_links, bicleaner=None, tgt_lang="fi"):
    """Equal-length pair with exactly n_links 1:1 links, uniform bicleaner."""
    src = make_document(rng, n_sentences=n_sentences)
    tgt = make_document(rng, lang=tgt_lang, n_sentences=n_sentences)
    links = [
        AlignmentLink(
            link.src_ids, link.tgt_ids,
            AlignmentScoreSet(bicleaner=bicleaner) if bicleaner is not None else AlignmentScoreSet(),
        )
        for link in one_to_one_links(src, tgt, scores=False)[:n_links]
    ]
    pair, _ = build_pair(src, tgt, links)
    return pair


class TestThresholdFilter:
    def test_density_boundary(self, rng):
        dropped_29 = pair_with(rng, 100, 29, bicleaner=0.9)
        dropped_299 = pair_with(rng, 1000, 299, bicleaner=0.9)
        kept_30 = pair_with(rng, 100, 30, bicleaner=0.9)
        kept, dropped = threshold_filter([dropped_29, dropped_299, kept_30])
        assert kept == [kept_30]
        assert [(p.density, reason) for p, reason in dropped] == [
            (0.29, "density"), (0.299, "density")]

    def test_score_boundary(self, rng):
        at = pair_with(rng, 10, 9, bicleaner=0.30)
        below = pair_with(rng, 10, 9, bicleaner=0.299)
        kept, dropped = threshold_filter([at, below])
        assert kept == [at]
        assert dropped == [(below, "score")]

    def test_unscored_pairs_dropped_with_reason(self, rng):
        unscored = pair_with(rng, 10, 9, bicleaner=None)
        kept, dropped = threshold_filter([unscored])
        assert kept == []
        assert dropped == [(unscored, "unscored")]

    def test_density_checked_before_score(self, rng):
        pair = pair_with(rng, 100, 10, bicleaner=None)
        _, dropped = threshold_filter([pair])
        assert dropped == [(pair, "density")]


class TestWindows:
    @pytest.mark.parametrize("n,expected", [(1, 1), (2, 1), (3, 1), (4, 2), (5, 3), (10, 8)])
    def test_window_count_default(self, n, expected):
        assert window_count(n, 3, 1) == expected
        assert expected == max(1, n - 2)

    def test_window_count_with_slide(self):
        assert window_count(10, 4, 2) == 4
        assert window_count(4, 4, 2) == 1

    def test_number_of_scores_matches_count(self, rng):
        for n in (1, 2, 3, 4, 7):
            pair = pair_with(rng, n + 1, n, bicleaner=0.5)
            scores = window_scores(pair, lcs_stub_scorer(), window=3, slide=1)
            assert len(scores) == window_count(n, 3, 1)

    def test_windows_follow_source_order(self, rng):
        pair = pair_with(rng, 5, 5, bicleaner=0.5)
        seen = []
        recorder = QualityScorer("rec", lambda s, t: seen.append(s) or 0.5)
        window_scores(pair, recorder, window=3, slide=1)
        texts = [pair.src_doc.sentence_text(sid) for sid in sorted(pair.src_doc.sentence_ids())]
        assert seen[0] == " ".join(texts[0:3])
        assert seen[-1] == " ".join(texts[2:5])

    def test_scorer_failure_carries_window_index(self, rng):
        pair = pair_with(rng, 6, 6, bicleaner=0.5)
        calls = iter([0.5, 0.5])

        def flaky(s, t):
            return next(calls)

        with pytest.raises(ScorerError, match="window 2"):
            window_scores(pair, QualityScorer("flaky", flaky))

    def test_document_score_is_mean(self, rng):
        pair = pair_with(rng, 5, 5, bicleaner=0.5)
        values = iter([0.2, 0.4, 0.9])
        scorer = QualityScorer("seq", lambda s, t: next(values))
        assert document_score(pair, scorer) == pytest.approx((0.2 + 0.4 + 0.9) / 3)


class TestPercentileFilter:
    def test_nearest_rank_cutoff(self, rng):
        pairs = [pair_with(rng, 4, 3) for _ in range(8)]
        scored = list(zip(pairs, [0.9, 0.8, 0.7, 0.6, 0.5, 0.4, 0.3, 0.2]))
        kept = percentile_filter({"fi": scored}, keep_top_fraction=0.25)
        # ceil(0.25 * 8) = 2 -> cutoff is the 2nd best score
        assert kept["fi"] == pairs[:2]

    def test_ties_at_cutoff_are_kept(self, rng):
        pairs = [pair_with(rng, 4, 3) for _ in range(8)]
        scored = list(zip(pairs, [0.9, 0.8, 0.8, 0.8, 0.5, 0.4, 0.3, 0.2]))
        kept = percentile_filter({"fi": scored}, keep_top_fraction=0.25)
        assert kept["fi"] == pairs[:4]

    def test_kept_count_lower_bound(self, rng):
        for n in (1, 2, 3, 4, 5, 7, 11):
            pairs = [pair_with(rng, 3, 2) for _ in range(n)]
            scored = [(p, i / n) for i, p in enumerate(pairs)]
            kept = percentile_filter({"fi": scored}, 0.25)["fi"]
            assert len(kept) >= math.ceil(0.25 * n)

    def test_languages_are_independent(self, rng):
        fi = [(pair_with(rng, 3, 2), s) for s in (0.9, 0.1)]
        sv = [(pair_with(rng, 3, 2, tgt_lang="sv"), s) for s in (0.2, 0.8)]
        kept = percentile_filter({"fi": fi, "sv": sv}, 0.5)
        assert kept["fi"] == [fi[0][0]]
        assert kept["sv"] == [sv[1][0]]

    @settings(max_examples=60, deadline=None)
    @given(st.integers(1, 40), st.integers(0, 10**6))
    def test_monotone_in_fraction(self, n, seed):
        r = random.Random(seed)
        scored = [(object(), round(r.random(), 2)) for _ in range(n)]
        previous = set()
        for fraction in (0.1, 0.25, 0.5, 0.75, 1.0):
            kept = {id(p) for p in percentile_filter({"x": scored}, fraction)["x"]}
            assert previous <= kept
            previous = kept


class TestScorers:
    def test_lcs_stub_values(self):
        scorer = lcs_stub_scorer()
        assert scorer.score("a b c", "a b c") == 1.0
        assert scorer.score("a b c d", "a b") == 0.5
        assert scorer.score("a b", "c d") == 0.0
        assert scorer.score("", "") == 1.0

    def test_external_process_scorer(self):
        code = (
            "import sys, json\n"
            "for line in sys.stdin:\n"
            "    rec = json.loads(line)\n"
            "    print(json.dumps({'score': 0.75 if rec['src'] else 0.0}))\n"
        )
        scorer = external_process_scorer([sys.executable, "-c", code])
        assert scorer.score("hello", "bonjour") == 0.75

    def test_external_process_failure(self):
        scorer = external_process_scorer([sys.executable, "-c", "import sys; sys.exit(3)"])
        with pytest.raises(ScorerError, match="exited 3"):
            scorer.score("a", "b")


def test_filter_config_validation():
    with pytest.raises(ValueError):
        FilterConfig(min_density=1.5)
    with pytest.raises(ValueError):
        FilterConfig(window=2, slide=3)
    with pytest.raises(ValueError):
        FilterConfig(keep_top_fraction=0.0)


def test_decision_log_tsv():
    rows = [("a::b", "threshold", "drop:density", 0.25), ("c::d", "percentile", "keep", 0.9)]
    text = decision_log_tsv(rows)
    assert text == "a::b\tthreshold\tdrop:density\t0.25\nc::d\tpercentile\tkeep\t0.9\n"
