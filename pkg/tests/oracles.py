"""Independent brute-force oracles used by the test suite.

Everything here is written naively (explicit loops, list scans, no shared
helpers from the package) so it can disagree with the production code when
the production code is wrong.
"""

from __future__ import annotations

import math
import re
import string


# --- WMT 13a tokenization, per the published mteval-v13a rule list ----------

_PAD_SET = set("{|}~[\\]^_` !\"#$%&()*+:;<=>?@/")


def tok13a(line):
    text = line
    text = text.replace("<skipped>", "")
    text = text.replace("-\n", "")
    text = text.replace("\n", " ")
    text = text.replace("&quot;", '"')
    text = text.replace("&amp;", "&")
    text = text.replace("&lt;", "<")
    text = text.replace("&gt;", ">")
    text = " " + text + " "
    padded = []
    for ch in text:
        if ch in _PAD_SET:
            padded.append(" " + ch + " ")
        else:
            padded.append(ch)
    text = "".join(padded)
    text = re.sub(r"([^0-9])([\.,])", r"\1 \2 ", text)
    text = re.sub(r"([\.,])([^0-9])", r" \1 \2", text)
    text = re.sub(r"([0-9])(-)", r"\1 \2 ", text)
    return text.split()


def _count_ngrams(tokens, n):
    counts = {}
    for i in range(len(tokens) - n + 1):
        gram = tuple(tokens[i : i + n])
        counts[gram] = counts.get(gram, 0) + 1
    return counts


def bleu_exp(hypothesis, reference):
    """Single-segment BLEU, 13a tokens, exp smoothing, fixed order 4, 0-100."""
    hyp = tok13a(hypothesis)
    ref = tok13a(reference)
    log_sum = 0.0
    smooth = 1.0
    for n in (1, 2, 3, 4):
        hyp_counts = _count_ngrams(hyp, n)
        ref_counts = _count_ngrams(ref, n)
        total = 0
        for gram in hyp_counts:
            total += hyp_counts[gram]
        if total == 0:
            return 0.0
        matched = 0
        for gram in hyp_counts:
            if gram in ref_counts:
                matched += min(hyp_counts[gram], ref_counts[gram])
        if matched == 0:
            smooth = smooth * 2.0
            precision = 1.0 / (smooth * total)
        else:
            precision = matched / total
        log_sum += math.log(precision)
    if len(hyp) >= len(ref):
        bp = 1.0
    else:
        bp = math.exp(1.0 - len(ref) / len(hyp))
    return 100.0 * bp * math.exp(log_sum / 4.0)


# --- chrF++: char 1..6 on whitespace-stripped text, word 1..2, beta 2 -------


def _split_punct(line):
    tokens = []
    for word in line.split():
        if len(word) > 1 and word[-1] in string.punctuation:
            tokens.append(word[:-1])
            tokens.append(word[-1])
        elif len(word) > 1 and word[0] in string.punctuation:
            tokens.append(word[0])
            tokens.append(word[1:])
        else:
            tokens.append(word)
    return tokens


def chrf_pp(hypothesis, reference, char_order=6, word_order=2, beta=2.0):
    """Effective-order chrF++ on one segment, 0-100."""
    hyp_chars = "".join(hypothesis.split())
    ref_chars = "".join(reference.split())
    hyp_words = _split_punct(hypothesis)
    ref_words = _split_punct(reference)

    per_order = []
    for n in range(1, char_order + 1):
        per_order.append((_count_ngrams(list(hyp_chars), n), _count_ngrams(list(ref_chars), n)))
    for n in range(1, word_order + 1):
        per_order.append((_count_ngrams(hyp_words, n), _count_ngrams(ref_words, n)))

    f_sum = 0.0
    used = 0
    for hyp_counts, ref_counts in per_order:
        n_hyp = sum(hyp_counts.values())
        n_ref = sum(ref_counts.values())
        if n_hyp == 0 or n_ref == 0:
            continue
        matched = 0
        for gram in hyp_counts:
            if gram in ref_counts:
                matched += min(hyp_counts[gram], ref_counts[gram])
        precision = matched / n_hyp
        recall = matched / n_ref
        denominator = beta * beta * precision + recall
        if denominator > 0:
            f_sum += (1 + beta * beta) * precision * recall / denominator
        used += 1
    if used == 0:
        return 0.0
    return 100.0 * f_sum / used
