"""Reference-based MT metrics: corpus BLEU, its 0-100 twin, and chrF.

Everything operates on Unicode code points, never bytes, so non-Latin
scripts are first-class. The "standard" tokenizer splits on whitespace
after padding every punctuation code point (Unicode category P*) with
spaces; it is the tokenizer behind the 0-100 standardized score, which is
exactly 100x the fractional BLEU under the same tokenization.
"""

from __future__ import annotations

import math
import re
import unicodedata
from collections import Counter
from dataclasses import dataclass
from pathlib import Path

from .errors import AlignmentError

DEFAULT_MAX_N = 4
DEFAULT_CHAR_N = 6
DEFAULT_BETA = 2.0

_WHITESPACE = re.compile(r"\s+")


def _separate_punctuation(text: str) -> str:
    out = []
    for ch in text:
        if unicodedata.category(ch).startswith("P"):
            out.append(f" {ch} ")
        else:
            out.append(ch)
    return "".join(out)


def tokenize_standard(text: str) -> list[str]:
    """Whitespace split after isolating punctuation code points."""
    return _separate_punctuation(text).split()


def tokenize_whitespace(text: str) -> list[str]:
    return text.split()


TOKENIZERS = {
    "standard": tokenize_standard,
    "whitespace": tokenize_whitespace,
}


@dataclass(frozen=True)
class SegmentPair:
    """One hypothesis/reference segment; empty strings contribute zero matches."""

    hypothesis: str
    reference: str


@dataclass(frozen=True)
class MetricReport:
    bleu: float
    sacrebleu_style: float
    chrf: float
    n_segments: int

    def to_dict(self) -> dict:
        return {
            "bleu": self.bleu,
            "sacrebleu_style": self.sacrebleu_style,
            "chrf": self.chrf,
            "n_segments": self.n_segments,
        }


def _ngram_counts(tokens: list[str], n: int) -> Counter:
    return Counter(tuple(tokens[i : i + n]) for i in range(len(tokens) - n + 1))


def corpus_bleu(
    pairs: list[SegmentPair],
    max_n: int = DEFAULT_MAX_N,
    tokenizer: str = "standard",
    smooth_add_one: bool = False,
) -> float:
    """Corpus-level BLEU in [0,1].

    Clipped modified n-gram precisions are aggregated over the whole corpus,
    combined by geometric mean over n=1..max_n, and multiplied by the
    brevity penalty min(1, e^(1-r/c)). Orders with no hypothesis n-grams
    anywhere in the corpus are vacuous and drop out of the mean, so
    identical short texts still score 1. No smoothing by default: any
    realized corpus-level precision of zero yields 0. ``smooth_add_one``
    applies add-one smoothing to every realized order, for tiny fixtures.
    """
    if max_n < 1:
        raise ValueError(f"max_n must be >= 1, got {max_n}")
    if not pairs:
        raise ValueError("pairs must be non-empty")
    tok = TOKENIZERS[tokenizer]

    correct = [0] * max_n
    total = [0] * max_n
    hyp_len = 0
    ref_len = 0
    for pair in pairs:
        hyp_tokens = tok(pair.hypothesis)
        ref_tokens = tok(pair.reference)
        hyp_len += len(hyp_tokens)
        ref_len += len(ref_tokens)
        for n in range(1, max_n + 1):
            hyp_ngrams = _ngram_counts(hyp_tokens, n)
            if not hyp_ngrams:
                continue
            ref_ngrams = _ngram_counts(ref_tokens, n)
            total[n - 1] += sum(hyp_ngrams.values())
            correct[n - 1] += sum((hyp_ngrams & ref_ngrams).values())

    if hyp_len == 0:
        return 0.0

    log_sum = 0.0
    effective_orders = 0
    for n in range(max_n):
        c, t = correct[n], total[n]
        if t == 0:
            continue
        if smooth_add_one:
            c, t = c + 1, t + 1
        if c == 0:
            return 0.0
        log_sum += math.log(c / t)
        effective_orders += 1

    brevity_penalty = 1.0 if hyp_len >= ref_len else math.exp(1.0 - ref_len / hyp_len)
    return brevity_penalty * math.exp(log_sum / effective_orders)


def sacrebleu_style(
    pairs: list[SegmentPair],
    max_n: int = DEFAULT_MAX_N,
    tokenizer: str = "standard",
    smooth_add_one: bool = False,
) -> float:
    """Corpus BLEU reported on the conventional 0-100 scale."""
    return 100.0 * corpus_bleu(pairs, max_n=max_n, tokenizer=tokenizer, smooth_add_one=smooth_add_one)


def _char_ngrams(text: str, n: int) -> Counter:
    return Counter(text[i : i + n] for i in range(len(text) - n + 1))


def chrf(pairs: list[SegmentPair], char_n: int = DEFAULT_CHAR_N, beta: float = DEFAULT_BETA) -> float:
    """Character n-gram F-score in [0,100], recall-weighted by ``beta``.

    Whitespace is removed before extracting n-grams. Statistics are summed
    over the corpus per order; precision and recall are then averaged over
    the orders that have n-grams on both sides, so identical texts score
    exactly 100 even when shorter than ``char_n``.
    """
    if char_n < 1:
        raise ValueError(f"char_n must be >= 1, got {char_n}")
    if not pairs:
        raise ValueError("pairs must be non-empty")

    hyp_total = [0] * char_n
    ref_total = [0] * char_n
    matched = [0] * char_n
    for pair in pairs:
        hyp = _WHITESPACE.sub("", pair.hypothesis)
        ref = _WHITESPACE.sub("", pair.reference)
        for n in range(1, char_n + 1):
            hyp_ngrams = _char_ngrams(hyp, n)
            ref_ngrams = _char_ngrams(ref, n)
            hyp_total[n - 1] += sum(hyp_ngrams.values())
            ref_total[n - 1] += sum(ref_ngrams.values())
            matched[n - 1] += sum((hyp_ngrams & ref_ngrams).values())

    precision_sum = 0.0
    recall_sum = 0.0
    effective_orders = 0
    for n in range(char_n):
        if hyp_total[n] > 0 and ref_total[n] > 0:
            precision_sum += matched[n] / hyp_total[n]
            recall_sum += matched[n] / ref_total[n]
            effective_orders += 1
    if effective_orders == 0:
        return 0.0
    precision = precision_sum / effective_orders
    recall = recall_sum / effective_orders
    if precision + recall == 0.0:
        return 0.0
    beta_sq = beta * beta
    return 100.0 * (1 + beta_sq) * precision * recall / (beta_sq * precision + recall)


def metric_report(
    pairs: list[SegmentPair],
    max_n: int = DEFAULT_MAX_N,
    tokenizer: str = "standard",
    char_n: int = DEFAULT_CHAR_N,
    beta: float = DEFAULT_BETA,
) -> MetricReport:
    bleu = corpus_bleu(pairs, max_n=max_n, tokenizer=tokenizer)
    return MetricReport(
        bleu=bleu,
        sacrebleu_style=100.0 * bleu,
        chrf=chrf(pairs, char_n=char_n, beta=beta),
        n_segments=len(pairs),
    )


def read_segments(path: str | Path) -> list[str]:
    text = Path(path).read_text(encoding="utf-8")
    if text.endswith("\n"):
        text = text[:-1]
    return text.split("\n") if text else []


def evaluate_dataset(
    hyp_file: str | Path,
    ref_file: str | Path,
    tokenizer: str = "standard",
) -> MetricReport:
    """Score two line-aligned UTF-8 files, one segment per line."""
    hyps = read_segments(hyp_file)
    refs = read_segments(ref_file)
    if len(hyps) != len(refs):
        raise AlignmentError(
            f"segment count mismatch: {hyp_file} has {len(hyps)}, {ref_file} has {len(refs)}"
        )
    pairs = [SegmentPair(h, r) for h, r in zip(hyps, refs)]
    return metric_report(pairs, tokenizer=tokenizer)
