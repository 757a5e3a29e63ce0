"""Multi-label stratified subset selection.

Greedy iterative stratification over two folds (subset and complement):
labels are processed scarcest-first, and each image of the current label is
placed into the fold whose remaining desire for that label is largest. All
tie-breaks are pinned (label order, image id, subset-first) so a given
(corpus, fraction, seed) always yields the same subset; the seed only
drives the uniform draw over unlabeled images.

Unlabeled images form their own stratum, reported under the pseudo-label
"∅" and counted like any other label in the distribution report.
"""

from __future__ import annotations

import random
from collections import Counter
from dataclasses import dataclass

from .model import Corpus

EMPTY_STRATUM = "∅"


@dataclass(frozen=True)
class LabelStat:
    label: str
    full_count: int
    subset_count: int
    full_proportion: float
    subset_proportion: float
    abs_deviation: float


@dataclass(frozen=True)
class DistributionReport:
    per_label: tuple[LabelStat, ...]
    max_abs_deviation: float
    total_variation_distance: float

    def to_dict(self) -> dict:
        return {
            "per_label": [vars(stat) for stat in self.per_label],
            "max_abs_deviation": self.max_abs_deviation,
            "total_variation_distance": self.total_variation_distance,
        }


def _round_half_up(x: float) -> int:
    return int(x + 0.5)


def _strata(labels: frozenset[str]) -> tuple[str, ...]:
    return tuple(labels) if labels else (EMPTY_STRATUM,)


def _label_counts(corpus: Corpus, image_ids) -> Counter:
    counts: Counter = Counter()
    for image_id in image_ids:
        counts.update(_strata(corpus.image(image_id).labels))
    return counts


def _proportions(counts: Counter) -> dict[str, float]:
    total = sum(counts.values())
    if total == 0:
        return {}
    return {label: count / total for label, count in counts.items()}


def _tvd(full_counts: Counter, subset_counts: Counter) -> float:
    full_p = _proportions(full_counts)
    subset_p = _proportions(subset_counts)
    return 0.5 * sum(
        abs(full_p.get(label, 0.0) - subset_p.get(label, 0.0))
        for label in set(full_p) | set(subset_p)
    )


def distribution_report(corpus: Corpus, subset: frozenset[int] | set[int]) -> DistributionReport:
    """Label-proportion comparison of ``subset`` against the full corpus."""
    for image_id in subset:
        if not corpus.has_image(image_id):
            raise ValueError(f"unknown image_id {image_id}")
    full_counts = _label_counts(corpus, (im.image_id for im in corpus.images))
    subset_counts = _label_counts(corpus, subset)
    full_p = _proportions(full_counts)
    subset_p = _proportions(subset_counts)

    stats = []
    for label in sorted(full_counts):
        fp = full_p.get(label, 0.0)
        sp = subset_p.get(label, 0.0)
        stats.append(
            LabelStat(
                label=label,
                full_count=full_counts[label],
                subset_count=subset_counts.get(label, 0),
                full_proportion=fp,
                subset_proportion=sp,
                abs_deviation=abs(fp - sp),
            )
        )
    max_dev = max((s.abs_deviation for s in stats), default=0.0)
    return DistributionReport(
        per_label=tuple(stats),
        max_abs_deviation=max_dev,
        total_variation_distance=0.5 * sum(s.abs_deviation for s in stats),
    )


def stratified_sample(
    corpus: Corpus, fraction: float, seed: int = 0
) -> tuple[frozenset[int], DistributionReport]:
    """Select ``round(fraction * n_images)`` images mirroring label proportions.

    Rounding is half-up. Raises ValueError when the fraction is outside
    (0,1) or the rounded subset would be empty.
    """
    if not 0.0 < fraction < 1.0:
        raise ValueError(f"fraction must be in (0,1), got {fraction}")
    n_images = len(corpus)
    if n_images == 0:
        raise ValueError("corpus is empty")
    target = _round_half_up(fraction * n_images)
    if target < 1:
        raise ValueError(f"fraction {fraction} of {n_images} images rounds to an empty subset")

    labeled = [im for im in corpus.images if im.labels]
    unlabeled = [im for im in corpus.images if not im.labels]

    counts = Counter(label for im in labeled for label in im.labels)
    desire = {
        "subset": {label: fraction * count for label, count in counts.items()},
        "complement": {label: (1.0 - fraction) * count for label, count in counts.items()},
    }
    subset: set[int] = set()
    unassigned: dict[int, frozenset[str]] = {im.image_id: im.labels for im in labeled}

    while unassigned:
        remaining: dict[str, list[int]] = {}
        for image_id, labels in unassigned.items():
            for label in labels:
                remaining.setdefault(label, []).append(image_id)
        # Scarcest label first; ties by smaller subset desire, then label id.
        label = min(remaining, key=lambda l: (len(remaining[l]), desire["subset"][l], l))
        for image_id in sorted(remaining[label]):
            d_sub = desire["subset"][label]
            d_comp = desire["complement"][label]
            if d_sub > d_comp:
                fold = "subset"
            elif d_comp > d_sub:
                fold = "complement"
            else:
                total_sub = sum(desire["subset"].values())
                total_comp = sum(desire["complement"].values())
                fold = "subset" if total_sub >= total_comp else "complement"
            for other in unassigned[image_id]:
                desire[fold][other] -= 1.0
            if fold == "subset":
                subset.add(image_id)
            del unassigned[image_id]

    if unlabeled:
        k = _round_half_up(fraction * len(unlabeled))
        rng = random.Random(seed)
        subset.update(rng.sample(sorted(im.image_id for im in unlabeled), k))

    _fit_to_size(corpus, subset, target)
    return frozenset(subset), distribution_report(corpus, subset)


def _fit_to_size(corpus: Corpus, subset: set[int], target: int) -> None:
    """Trim or pad ``subset`` in place to exactly ``target`` images.

    Each step removes (or adds) the image that leaves the smallest total
    variation distance, ties broken by image id.
    """
    full_counts = _label_counts(corpus, (im.image_id for im in corpus.images))
    subset_counts = _label_counts(corpus, subset)

    def tvd_after(delta_image: int, sign: int) -> float:
        for label in _strata(corpus.image(delta_image).labels):
            subset_counts[label] += sign
        score = _tvd(full_counts, subset_counts)
        for label in _strata(corpus.image(delta_image).labels):
            subset_counts[label] -= sign
        return score

    while len(subset) > target:
        victim = min(sorted(subset), key=lambda i: (tvd_after(i, -1), i))
        subset.remove(victim)
        for label in _strata(corpus.image(victim).labels):
            subset_counts[label] -= 1
    while len(subset) < target:
        outside = sorted(im.image_id for im in corpus.images if im.image_id not in subset)
        chosen = min(outside, key=lambda i: (tvd_after(i, +1), i))
        subset.add(chosen)
        for label in _strata(corpus.image(chosen).labels):
            subset_counts[label] += 1
