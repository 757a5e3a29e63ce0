#!/usr/bin/env python3
"""Stratified vs uniform-random subset selection over random corpora.

For each random multi-label corpus, compares the stratified subset's total
variation distance against a uniform-random baseline averaged over many
seeds, and prints the win rate and distance summaries.

    python scripts/stratification_experiment.py --corpora 1000 --baseline-seeds 100
"""

from __future__ import annotations

import argparse
import random
import statistics
import sys
from pathlib import Path

ROOT = Path(__file__).resolve().parent.parent
sys.path.insert(0, str(ROOT / "src"))

from capqe.model import CaptionRecord, Corpus, ImageEntry  # noqa: E402
from capqe.sampling import distribution_report, stratified_sample  # noqa: E402


def random_corpus(rng: random.Random, max_images: int, max_labels: int) -> Corpus:
    n_images = rng.randint(4, max_images)
    label_names = [chr(ord("A") + i) for i in range(rng.randint(1, max_labels))]
    images = []
    captions = []
    for i in range(1, n_images + 1):
        labels = frozenset(l for l in label_names if rng.random() < 0.4)
        images.append(
            ImageEntry(image_id=i, file_ref=f"img_{i}.jpg", labels=labels, caption_ids=(i,))
        )
        captions.append(CaptionRecord(caption_id=i, image_id=i, source_text=f"caption {i}"))
    return Corpus(images=tuple(images), captions=tuple(captions))


def main() -> int:
    parser = argparse.ArgumentParser(description=__doc__)
    parser.add_argument("--corpora", type=int, default=1000)
    parser.add_argument("--baseline-seeds", type=int, default=100)
    parser.add_argument("--max-images", type=int, default=20)
    parser.add_argument("--max-labels", type=int, default=4)
    parser.add_argument("--fraction", type=float, default=0.5)
    parser.add_argument("--seed", type=int, default=77)
    args = parser.parse_args()

    rng = random.Random(args.seed)
    wins = 0
    trials = 0
    stratified_tvds = []
    random_tvds = []
    for _ in range(args.corpora):
        corpus = random_corpus(rng, args.max_images, args.max_labels)
        target = int(args.fraction * len(corpus) + 0.5)
        if target < 1 or target >= len(corpus):
            continue
        trials += 1
        _, report = stratified_sample(corpus, args.fraction, seed=0)
        ids = [im.image_id for im in corpus.images]
        baseline = statistics.mean(
            distribution_report(
                corpus, frozenset(random.Random(s).sample(ids, target))
            ).total_variation_distance
            for s in range(args.baseline_seeds)
        )
        stratified_tvds.append(report.total_variation_distance)
        random_tvds.append(baseline)
        if report.total_variation_distance <= baseline + 1e-12:
            wins += 1

    print(f"corpora evaluated: {trials}")
    print(f"stratified mean TVD: {statistics.mean(stratified_tvds):.4f}")
    print(f"random mean TVD:     {statistics.mean(random_tvds):.4f}")
    print(f"win rate (stratified <= random baseline): {wins / trials:.3f}")
    return 0


if __name__ == "__main__":
    sys.exit(main())
