"""MT metrics against hand-counted cases and an independent naive oracle."""

from __future__ import annotations

import math
import random
from collections import Counter
from fractions import Fraction

import pytest
from hypothesis import given, settings, strategies as st

from capqe.errors import AlignmentError
from capqe.metrics import (
    MetricReport,
    SegmentPair,
    chrf,
    corpus_bleu,
    evaluate_dataset,
    metric_report,
    sacrebleu_style,
    tokenize_standard,
)

from conftest import DATA_DIR


# --- independent oracles: same definitions, deliberately different code path ---

def oracle_bleu(pairs, max_n=4):
    """Fraction-exact corpus BLEU over whitespace-pretokenized text."""
    correct = [0] * max_n
    total = [0] * max_n
    c_len = r_len = 0
    for hyp, ref in pairs:
        hyp_toks, ref_toks = hyp.split(), ref.split()
        c_len += len(hyp_toks)
        r_len += len(ref_toks)
        for n in range(1, max_n + 1):
            hyp_grams = [tuple(hyp_toks[i : i + n]) for i in range(len(hyp_toks) - n + 1)]
            ref_grams = [tuple(ref_toks[i : i + n]) for i in range(len(ref_toks) - n + 1)]
            total[n - 1] += len(hyp_grams)
            for gram in set(hyp_grams):
                correct[n - 1] += min(hyp_grams.count(gram), ref_grams.count(gram))
    if c_len == 0:
        return 0.0
    precisions = []
    for n in range(max_n):
        if total[n] == 0:
            continue  # vacuous order: no hypothesis n-grams exist at all
        if correct[n] == 0:
            return 0.0
        precisions.append(Fraction(correct[n], total[n]))
    geo = math.exp(sum(math.log(float(p)) for p in precisions) / len(precisions))
    bp = 1.0 if c_len >= r_len else math.exp(1 - r_len / c_len)
    return bp * geo


def oracle_chrf(pairs, char_n=6, beta=2.0):
    """Per-order Fraction statistics, averaged over orders present on both sides."""
    stats = {n: [0, 0, 0] for n in range(1, char_n + 1)}
    for hyp, ref in pairs:
        hyp = "".join(hyp.split())
        ref = "".join(ref.split())
        for n in range(1, char_n + 1):
            hyp_grams = Counter(hyp[i : i + n] for i in range(len(hyp) - n + 1))
            ref_grams = Counter(ref[i : i + n] for i in range(len(ref) - n + 1))
            stats[n][0] += sum(hyp_grams.values())
            stats[n][1] += sum(ref_grams.values())
            stats[n][2] += sum(min(v, ref_grams[g]) for g, v in hyp_grams.items())
    ps, rs = [], []
    for n in range(1, char_n + 1):
        h, r, m = stats[n]
        if h > 0 and r > 0:
            ps.append(Fraction(m, h))
            rs.append(Fraction(m, r))
    if not ps:
        return 0.0
    p = sum(ps) / len(ps)
    r = sum(rs) / len(rs)
    if p + r == 0:
        return 0.0
    b2 = Fraction(beta).limit_denominator() ** 2
    return float(100 * (1 + b2) * p * r / (b2 * p + r))


def random_corpus(rng, n_pairs, vocab=("the", "cat", "sat", "on", "a", "mat", "dog", "ran")):
    pairs = []
    for _ in range(n_pairs):
        ref = [rng.choice(vocab) for _ in range(rng.randint(3, 12))]
        hyp = [tok if rng.random() < 0.7 else rng.choice(vocab) for tok in ref]
        if rng.random() < 0.3:
            hyp = hyp[: max(1, len(hyp) - rng.randint(1, 2))]
        pairs.append((" ".join(hyp), " ".join(ref)))
    return pairs


class TestBleu:
    def test_identity_is_one(self):
        pairs = [SegmentPair("a cat sat on the mat", "a cat sat on the mat")] * 3
        assert corpus_bleu(pairs) == 1.0

    def test_disjoint_is_zero(self):
        assert corpus_bleu([SegmentPair("dog ran fast", "a cat sat")]) == 0.0

    def test_clipping_hand_case(self):
        # "the" appears 4 times in the hypothesis but once in the reference:
        # clipped p1 = 1/4; hypothesis longer than reference, so BP = 1.
        pairs = [SegmentPair("the the the the", "the cat")]
        assert corpus_bleu(pairs, max_n=1) == pytest.approx(0.25, abs=1e-9)

    def test_empty_hypothesis_contributes_zero(self):
        assert corpus_bleu([SegmentPair("", "the cat")]) == 0.0
        mixed = [SegmentPair("", "the cat"), SegmentPair("the cat", "the cat")]
        assert corpus_bleu(mixed, max_n=1) < 1.0  # brevity penalty bites

    def test_brevity_penalty(self):
        pairs = [SegmentPair("the cat", "the cat sat on the mat")]
        expected = math.exp(1 - 6 / 2) * 1.0  # p1 = 2/2, p2 = 1/1 at orders 1..2
        assert corpus_bleu(pairs, max_n=2) == pytest.approx(expected, abs=1e-12)

    def test_max_n_validation(self):
        with pytest.raises(ValueError):
            corpus_bleu([SegmentPair("a", "a")], max_n=0)

    def test_oracle_agreement_on_random_corpora(self):
        rng = random.Random(2024)
        for _ in range(30):
            raw = random_corpus(rng, rng.randint(1, 8))
            pairs = [SegmentPair(h, r) for h, r in raw]
            mine = corpus_bleu(pairs, tokenizer="whitespace")
            assert mine == pytest.approx(oracle_bleu(raw), abs=1e-12)

    def test_pair_order_invariance(self):
        rng = random.Random(11)
        raw = random_corpus(rng, 6)
        pairs = [SegmentPair(h, r) for h, r in raw]
        shuffled = list(pairs)
        rng.shuffle(shuffled)
        assert corpus_bleu(pairs) == pytest.approx(corpus_bleu(shuffled), abs=1e-15)

    def test_smoothing_flag_rescues_tiny_fixture(self):
        pairs = [SegmentPair("a b", "a c")]
        assert corpus_bleu(pairs) == 0.0
        assert corpus_bleu(pairs, smooth_add_one=True) > 0.0


class TestChrf:
    def test_identity_is_exactly_100(self):
        assert chrf([SegmentPair("ab", "ab")]) == 100.0
        assert chrf([SegmentPair("ایک بلی صوفے پر", "ایک بلی صوفے پر")]) == 100.0

    def test_disjoint_is_zero(self):
        assert chrf([SegmentPair("abc", "xyz")]) == 0.0

    def test_hand_case(self):
        # unigrams 3/4 both sides, bigrams 2/3 both sides, F2 with P = R.
        assert chrf([SegmentPair("abcd", "abce")], char_n=2) == pytest.approx(70.833, abs=1e-3)

    def test_sacrebleu_reference_value(self):
        # cross-checked against the reference corpus-chrF implementation
        pairs = [
            SegmentPair("the cat sat", "the cat sat down"),
            SegmentPair("a dog ran fast", "a dog ran"),
        ]
        assert chrf(pairs) == pytest.approx(71.8121693121693, abs=1e-9)

    def test_whitespace_excluded(self):
        assert chrf([SegmentPair("ab cd", "abcd")]) == 100.0
        assert chrf([SegmentPair("a b c d", "abcd")]) == 100.0

    def test_oracle_agreement_on_random_corpora(self):
        rng = random.Random(99)
        for _ in range(30):
            raw = random_corpus(rng, rng.randint(1, 8))
            pairs = [SegmentPair(h, r) for h, r in raw]
            assert chrf(pairs) == pytest.approx(oracle_chrf(raw), abs=1e-9)

    def test_char_n_validation(self):
        with pytest.raises(ValueError):
            chrf([SegmentPair("a", "a")], char_n=0)


class TestTokenizer:
    def test_punctuation_separated(self):
        assert tokenize_standard("a cat, on the mat.") == ["a", "cat", ",", "on", "the", "mat", "."]

    def test_urdu_full_stop_separated(self):
        assert tokenize_standard("ایک بلی۔") == ["ایک", "بلی", "۔"]

    def test_code_points_not_bytes(self):
        # multi-byte text must not be split inside a code point
        tokens = tokenize_standard("صوفے پر")
        assert tokens == ["صوفے", "پر"]


class TestRelationshipAndReport:
    @settings(max_examples=40, deadline=None)
    @given(st.integers(0, 2**32 - 1))
    def test_sacrebleu_style_is_100x(self, seed):
        rng = random.Random(seed)
        raw = random_corpus(rng, rng.randint(1, 6))
        pairs = [SegmentPair(h, r) for h, r in raw]
        assert sacrebleu_style(pairs) == pytest.approx(100.0 * corpus_bleu(pairs), abs=1e-9)

    def test_report_identity_file(self, tmp_path):
        path = tmp_path / "same.txt"
        path.write_text("a cat\nایک بلی\n", encoding="utf-8")
        report = evaluate_dataset(path, path)
        assert report == MetricReport(bleu=1.0, sacrebleu_style=100.0, chrf=100.0, n_segments=2)

    def test_alignment_error_names_counts(self, tmp_path):
        hyp = tmp_path / "h.txt"
        ref = tmp_path / "r.txt"
        hyp.write_text("a\nb\n")
        ref.write_text("a\n")
        with pytest.raises(AlignmentError, match="2.*1"):
            evaluate_dataset(hyp, ref)

    def test_frozen_before_after_fixture_direction(self):
        before = evaluate_dataset(DATA_DIR / "metrics_before.txt", DATA_DIR / "metrics_refs.txt")
        after = evaluate_dataset(DATA_DIR / "metrics_after.txt", DATA_DIR / "metrics_refs.txt")
        assert before.bleu < after.bleu
        assert before.sacrebleu_style < after.sacrebleu_style
        assert before.chrf < after.chrf
        # frozen goldens for the committed fixture files
        assert before.bleu == pytest.approx(0.08256153081365954, abs=1e-12)
        assert after.bleu == pytest.approx(0.9175894209178775, abs=1e-12)
        assert before.chrf == pytest.approx(28.354051781831544, abs=1e-9)
        assert after.chrf == pytest.approx(95.86582298963931, abs=1e-9)
