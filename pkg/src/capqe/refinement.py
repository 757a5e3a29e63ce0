"""QE-gated iterative refinement of flagged captions.

Flagged captions (hybrid score below threshold) are sent to the refiner
provider, re-scored, and either auto-accepted or routed to the manual
review queue once the iteration budget is exhausted. Two guards protect
semantics: a refinement that lowers the back-translation F-score or the
hybrid score is discarded outright, so the stored hybrid never decreases.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Mapping

from .errors import AlignmentError, ProviderError
from .metrics import MetricReport, SegmentPair, metric_report, read_segments
from .model import CaptionRecord, CaptionStatus, QEConfig
from .pipeline import score_single
from .providers import ProviderSet
from .scoring import flag_low_quality

ACCEPT_RULES = ("above_threshold", "improved_and_above")

DEFAULT_INSTRUCTIONS = (
    "Improve sentence formulation and fluency of the caption while preserving "
    "its meaning exactly."
)


@dataclass(frozen=True)
class RefinementConfig:
    max_iterations: int = 3
    accept_rule: str = "improved_and_above"
    instructions: str = DEFAULT_INSTRUCTIONS

    def __post_init__(self) -> None:
        if self.max_iterations < 1:
            raise ValueError(f"max_iterations must be >= 1, got {self.max_iterations}")
        if self.accept_rule not in ACCEPT_RULES:
            raise ValueError(f"accept_rule must be one of {ACCEPT_RULES}")


@dataclass(frozen=True)
class CaptionTrace:
    caption_id: int
    iterations: int
    hybrid_before: float
    hybrid_after: float


@dataclass(frozen=True)
class RefinementReport:
    """Outcome counts partition the flagged set (plus retriable failures)."""

    n_flagged: int
    n_accepted_first_retry: int
    n_auto_refined: int
    n_manual_routed: int
    n_failed: int
    before: MetricReport | None
    after: MetricReport | None
    traces: tuple[CaptionTrace, ...] = field(default_factory=tuple)

    def to_dict(self) -> dict:
        return {
            "n_flagged": self.n_flagged,
            "n_accepted_first_retry": self.n_accepted_first_retry,
            "n_auto_refined": self.n_auto_refined,
            "n_manual_routed": self.n_manual_routed,
            "n_failed": self.n_failed,
            "before": self.before.to_dict() if self.before else None,
            "after": self.after.to_dict() if self.after else None,
            "traces": [vars(t) for t in self.traces],
        }


def _refine_one(
    record: CaptionRecord,
    image_ref: str,
    config: RefinementConfig,
    providers: ProviderSet,
    qe_config: QEConfig,
) -> tuple[CaptionRecord, int, bool]:
    """Run the refinement loop for one flagged caption.

    Returns (final record, iterations used, accepted_on_first_iteration).
    """
    current = record
    first_try = False
    for iteration in range(1, config.max_iterations + 1):
        candidate = providers.refiner.refine([current.translated_text], config.instructions)[0]
        scores, back = score_single(
            current.source_text, candidate, image_ref, providers, qe_config
        )
        if scores.bert_raw < current.scores.bert_raw or scores.hybrid < current.scores.hybrid:
            continue  # discard: semantics or quality regressed
        improved = scores.hybrid > current.scores.hybrid
        rescored = current.evolve(
            CaptionStatus.REFINED_AUTO,
            translated_text=candidate,
            back_translated_text=back,
        ).evolve(CaptionStatus.SCORED, scores=scores)
        accept = not flag_low_quality(scores, qe_config) and (
            config.accept_rule == "above_threshold" or improved
        )
        if accept:
            first_try = iteration == 1
            return rescored.evolve(CaptionStatus.ACCEPTED_AUTO), iteration, first_try
        current = rescored.evolve(CaptionStatus.NEEDS_REFINEMENT)
    return current.evolve(CaptionStatus.NEEDS_MANUAL_REVIEW), config.max_iterations, first_try


def refine_flagged(
    records: list[CaptionRecord],
    config: RefinementConfig,
    providers: ProviderSet,
    qe_config: QEConfig,
    image_refs: Mapping[int, str],
) -> tuple[list[CaptionRecord], RefinementReport]:
    """Refine every NEEDS_REFINEMENT record; all others pass through untouched.

    ``image_refs`` maps image_id to its file reference (needed to re-score
    visual grounding). A provider failure leaves the affected caption at
    NEEDS_REFINEMENT so the run can be retriggered; other captions proceed.
    The report's before/after metrics compare back-translations against the
    original source texts over the flagged subset, a reference-free proxy
    for translation fidelity.
    """
    flagged = [r for r in records if r.status is CaptionStatus.NEEDS_REFINEMENT]
    out: dict[int, CaptionRecord] = {}
    traces = []
    n_first, n_later, n_manual, n_failed = 0, 0, 0, 0
    for record in sorted(flagged, key=lambda r: r.caption_id):
        try:
            final, iterations, first_try = _refine_one(
                record, image_refs[record.image_id], config, providers, qe_config
            )
        except ProviderError:
            n_failed += 1
            continue
        if final.status is CaptionStatus.ACCEPTED_AUTO:
            if first_try:
                n_first += 1
            else:
                n_later += 1
        else:
            n_manual += 1
        out[record.caption_id] = final
        traces.append(
            CaptionTrace(
                caption_id=record.caption_id,
                iterations=iterations,
                hybrid_before=record.scores.hybrid,
                hybrid_after=final.scores.hybrid,
            )
        )

    updated = [out.get(r.caption_id, r) for r in records]

    def roundtrip_pairs(source_records: list[CaptionRecord]) -> list[SegmentPair]:
        chosen = {r.caption_id for r in flagged}
        return [
            SegmentPair(r.back_translated_text or "", r.source_text)
            for r in sorted(source_records, key=lambda r: r.caption_id)
            if r.caption_id in chosen
        ]

    before_pairs = roundtrip_pairs(records)
    after_pairs = roundtrip_pairs(updated)
    report = RefinementReport(
        n_flagged=len(flagged),
        n_accepted_first_retry=n_first,
        n_auto_refined=n_later,
        n_manual_routed=n_manual,
        n_failed=n_failed,
        before=metric_report(before_pairs) if before_pairs else None,
        after=metric_report(after_pairs) if after_pairs else None,
        traces=tuple(traces),
    )
    return updated, report


def before_after_report(
    before_records: list[CaptionRecord],
    after_records: list[CaptionRecord],
    reference_file: str,
) -> tuple[MetricReport, MetricReport]:
    """Reference-based metrics over a flagged subset, before vs after.

    The reference file holds one target-language line per caption, in
    ascending caption_id order.
    """
    before = sorted(before_records, key=lambda r: r.caption_id)
    after = sorted(after_records, key=lambda r: r.caption_id)
    if [r.caption_id for r in before] != [r.caption_id for r in after]:
        raise AlignmentError("before/after snapshots hold different caption ids")
    references = read_segments(reference_file)
    if len(references) != len(before):
        raise AlignmentError(
            f"{len(before)} captions but {len(references)} reference lines in {reference_file}"
        )
    before_pairs = [
        SegmentPair(r.translated_text or "", ref) for r, ref in zip(before, references)
    ]
    after_pairs = [
        SegmentPair(r.translated_text or "", ref) for r, ref in zip(after, references)
    ]
    return metric_report(before_pairs), metric_report(after_pairs)
