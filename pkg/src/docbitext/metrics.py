"""Document-level BLEU and chrF++ on whole-document strings.

Each hypothesis/reference document is scored as one long segment and the
corpus figure is the arithmetic mean over documents (never pooled n-gram
counts).  BLEU uses the WMT 13a tokenizer with exponential smoothing and a
fixed order of 4; chrF++ uses character n-grams up to 6 on
whitespace-stripped text plus word n-grams up to 2, beta 2, with effective
ordering.  Both are on the 0-100 scale.
"""

from __future__ import annotations

import math
import re
import string
from collections import Counter
from dataclasses import dataclass
from typing import Sequence

BLEU_ORDER = 4

BLEU_SIGNATURE = "nrefs:1|case:mixed|eff:no|tok:13a|smooth:exp"
CHRF_PP_SIGNATURE = "nrefs:1|case:mixed|eff:yes|nc:6|nw:2|space:no"


@dataclass(frozen=True)
class BleuConfig:
    tokenization: str = "13a"
    smoothing: str = "exp"
    lowercase: bool = False
    effective_order: bool = False

    @property
    def signature(self) -> str:
        case = "lc" if self.lowercase else "mixed"
        eff = "yes" if self.effective_order else "no"
        return f"nrefs:1|case:{case}|eff:{eff}|tok:{self.tokenization}|smooth:{self.smoothing}"


@dataclass(frozen=True)
class ChrfConfig:
    char_order: int = 6
    word_order: int = 2
    beta: float = 2.0
    effective_order: bool = True
    whitespace_in_char_ngrams: bool = False
    lowercase: bool = False

    @property
    def signature(self) -> str:
        case = "lc" if self.lowercase else "mixed"
        eff = "yes" if self.effective_order else "no"
        space = "yes" if self.whitespace_in_char_ngrams else "no"
        return (
            f"nrefs:1|case:{case}|eff:{eff}|nc:{self.char_order}"
            f"|nw:{self.word_order}|space:{space}"
        )


@dataclass
class DocScores:
    per_doc: list[float]
    macro_average: float
    signature: str


# ---------------------------------------------------------------------------
# 13a tokenization (mteval-v13a compatible)
# ---------------------------------------------------------------------------

_13A_PUNCT_RUN = re.compile(r"([\{-\~\[-\` -\&\(-\+\:-\@\/])")
_13A_PERIOD_COMMA_BEFORE = re.compile(r"([^0-9])([\.,])")
_13A_PERIOD_COMMA_AFTER = re.compile(r"([\.,])([^0-9])")
_13A_DIGIT_DASH = re.compile(r"([0-9])(-)")
_13A_SPACES = re.compile(r"\s+")


def tokenize_13a(line: str) -> list[str]:
    """Minimal WMT tokenization: entity unescaping, punctuation padded away
    from non-digits, dashes split after digits, whitespace collapsed."""
    norm = line
    norm = norm.replace("<skipped>", "")
    norm = norm.replace("-\n", "")
    norm = norm.replace("\n", " ")
    norm = norm.replace("&quot;", '"')
    norm = norm.replace("&amp;", "&")
    norm = norm.replace("&lt;", "<")
    norm = norm.replace("&gt;", ">")
    norm = f" {norm} "
    norm = _13A_PUNCT_RUN.sub(r" \1 ", norm)
    norm = _13A_PERIOD_COMMA_BEFORE.sub(r"\1 \2 ", norm)
    norm = _13A_PERIOD_COMMA_AFTER.sub(r" \1 \2", norm)
    norm = _13A_DIGIT_DASH.sub(r"\1 \2 ", norm)
    norm = _13A_SPACES.sub(" ", norm).strip()
    return norm.split(" ") if norm else []


def _ngram_counts(tokens: Sequence, n: int) -> Counter:
    return Counter(tuple(tokens[i : i + n]) for i in range(len(tokens) - n + 1))


def sentence_bleu(hypothesis: str, reference: str, config: BleuConfig = BleuConfig()) -> float:
    """Single-segment BLEU with exponential smoothing, 0-100."""
    if config.lowercase:
        hypothesis, reference = hypothesis.lower(), reference.lower()
    hyp = tokenize_13a(hypothesis)
    ref = tokenize_13a(reference)

    correct = [0] * BLEU_ORDER
    total = [0] * BLEU_ORDER
    for n in range(1, BLEU_ORDER + 1):
        hyp_counts = _ngram_counts(hyp, n)
        ref_counts = _ngram_counts(ref, n)
        total[n - 1] = sum(hyp_counts.values())
        correct[n - 1] = sum(
            min(count, ref_counts[ngram]) for ngram, count in hyp_counts.items()
        )

    precisions = [0.0] * BLEU_ORDER
    smooth = 1.0
    order = BLEU_ORDER
    for n in range(1, BLEU_ORDER + 1):
        if total[n - 1] == 0:
            break
        if config.effective_order:
            order = n
        if correct[n - 1] == 0:
            # exp smoothing: zero-match precision halves with each miss
            smooth *= 2
            precisions[n - 1] = 100.0 / (smooth * total[n - 1])
        else:
            precisions[n - 1] = 100.0 * correct[n - 1] / total[n - 1]

    if any(p == 0.0 for p in precisions[:order]):
        return 0.0
    brevity = 1.0
    if len(hyp) < len(ref):
        brevity = math.exp(1 - len(ref) / len(hyp)) if hyp else 0.0
    return brevity * math.exp(sum(math.log(p) for p in precisions[:order]) / order)


# ---------------------------------------------------------------------------
# chrF++
# ---------------------------------------------------------------------------

_PUNCTUATION = set(string.punctuation)


def _separate_punctuation(line: str) -> list[str]:
    """Split one leading or trailing punctuation mark off each word, the way
    the original chrF++ tokenization does."""
    tokens = []
    for word in line.split():
        if len(word) == 1:
            tokens.append(word)
        elif word[-1] in _PUNCTUATION:
            tokens.extend([word[:-1], word[-1]])
        elif word[0] in _PUNCTUATION:
            tokens.extend([word[0], word[1:]])
        else:
            tokens.append(word)
    return tokens


def sentence_chrf_pp(hypothesis: str, reference: str, config: ChrfConfig = ChrfConfig()) -> float:
    """Single-segment chrF++ (char order 6, word order 2, beta 2), 0-100."""
    if config.lowercase:
        hypothesis, reference = hypothesis.lower(), reference.lower()

    if config.whitespace_in_char_ngrams:
        hyp_chars, ref_chars = hypothesis, reference
    else:
        hyp_chars = "".join(hypothesis.split())
        ref_chars = "".join(reference.split())
    hyp_words = _separate_punctuation(hypothesis)
    ref_words = _separate_punctuation(reference)

    statistics = []
    for n in range(1, config.char_order + 1):
        statistics.append((_ngram_counts(hyp_chars, n), _ngram_counts(ref_chars, n)))
    for n in range(1, config.word_order + 1):
        statistics.append((_ngram_counts(hyp_words, n), _ngram_counts(ref_words, n)))

    factor = config.beta**2
    score = 0.0
    effective = 0
    total_orders = config.char_order + config.word_order
    for hyp_counts, ref_counts in statistics:
        n_hyp = sum(hyp_counts.values())
        n_ref = sum(ref_counts.values())
        n_match = sum(
            min(count, ref_counts[ngram]) for ngram, count in hyp_counts.items()
        )
        if n_hyp > 0 and n_ref > 0:
            prec = n_match / n_hyp
            rec = n_match / n_ref
            denom = factor * prec + rec
            score += ((1 + factor) * prec * rec / denom) if denom > 0 else 0.0
            effective += 1

    if config.effective_order:
        return 100.0 * score / effective if effective else 0.0
    return 100.0 * score / total_orders


# ---------------------------------------------------------------------------
# Document-level entry points
# ---------------------------------------------------------------------------

def _check_lengths(hypotheses: Sequence[str], references: Sequence[str]) -> None:
    if len(hypotheses) != len(references):
        raise ValueError(
            f"{len(hypotheses)} hypotheses vs {len(references)} references"
        )
    if not hypotheses:
        raise ValueError("no documents to score")


def doc_bleu(
    hypotheses: Sequence[str],
    references: Sequence[str],
    config: BleuConfig = BleuConfig(),
) -> DocScores:
    """Per-document BLEU on whole-document strings, macro-averaged."""
    _check_lengths(hypotheses, references)
    per_doc = [sentence_bleu(h, r, config) for h, r in zip(hypotheses, references)]
    return DocScores(per_doc, sum(per_doc) / len(per_doc), config.signature)


def doc_chrf_pp(
    hypotheses: Sequence[str],
    references: Sequence[str],
    config: ChrfConfig = ChrfConfig(),
) -> DocScores:
    """Per-document chrF++ on whole-document strings, macro-averaged."""
    _check_lengths(hypotheses, references)
    per_doc = [sentence_chrf_pp(h, r, config) for h, r in zip(hypotheses, references)]
    return DocScores(per_doc, sum(per_doc) / len(per_doc), config.signature)
