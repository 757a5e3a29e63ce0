"""Manual-review queue: listing, live re-scoring, accept/reject persistence.

Mutations use optimistic locking: the caller supplies the revision it last
read, and the repository applies the successor record only if the stored
revision still matches, inside a lock. Re-scoring is a pure preview and
never touches the store.
"""

from __future__ import annotations

import threading
from dataclasses import dataclass
from pathlib import Path
from typing import Mapping

from .errors import (
    InvalidStateError,
    RevisionConflictError,
    UnknownCaptionError,
)
from .model import (
    CaptionRecord,
    CaptionStatus,
    QEComponentScores,
    QEConfig,
    record_to_line,
    records_from_bytes,
)
from .pipeline import score_single
from .providers import ProviderSet


class RecordRepository:
    """In-memory record set with compare-and-swap semantics."""

    def __init__(self, records: list[CaptionRecord]):
        self._records = {r.caption_id: r for r in records}
        self._lock = threading.Lock()

    def list_records(self) -> list[CaptionRecord]:
        with self._lock:
            return sorted(self._records.values(), key=lambda r: r.caption_id)

    def get(self, caption_id: int) -> CaptionRecord | None:
        with self._lock:
            return self._records.get(caption_id)

    def compare_and_swap(self, expected_revision: int, new_record: CaptionRecord) -> CaptionRecord:
        with self._lock:
            stored = self._records.get(new_record.caption_id)
            if stored is None:
                raise UnknownCaptionError(f"caption {new_record.caption_id} does not exist")
            if stored.revision != expected_revision:
                raise RevisionConflictError(
                    f"caption {new_record.caption_id}: expected revision {expected_revision}, "
                    f"stored is {stored.revision}"
                )
            self._records[new_record.caption_id] = new_record
            self._persist()
            return new_record

    def _persist(self) -> None:
        pass


class FileRecordRepository(RecordRepository):
    """Repository backed by a records file, rewritten atomically on mutation."""

    def __init__(self, path: str | Path):
        self._path = Path(path)
        super().__init__(records_from_bytes(self._path.read_bytes()))

    def _persist(self) -> None:
        tmp = self._path.parent / f".{self._path.name}.tmp"
        tmp.write_text(
            "".join(record_to_line(r) + "\n" for r in sorted(self._records.values(), key=lambda r: r.caption_id)),
            encoding="utf-8",
        )
        tmp.replace(self._path)


@dataclass(frozen=True)
class ReviewItem:
    caption_id: int
    image_file_ref: str
    source_text: str
    current_translation: str
    back_translation: str
    scores: QEComponentScores
    revision: int

    def to_dict(self) -> dict:
        return {
            "caption_id": self.caption_id,
            "image_file_ref": self.image_file_ref,
            "source_text": self.source_text,
            "current_translation": self.current_translation,
            "back_translation": self.back_translation,
            "scores": self.scores.to_dict(),
            "revision": self.revision,
        }


class ReviewService:
    def __init__(
        self,
        repository: RecordRepository,
        providers: ProviderSet,
        qe_config: QEConfig,
        image_refs: Mapping[int, str],
    ):
        self._repo = repository
        self._providers = providers
        self._qe_config = qe_config
        self._image_refs = dict(image_refs)

    @property
    def qe_config(self) -> QEConfig:
        return self._qe_config

    def _item(self, record: CaptionRecord) -> ReviewItem:
        return ReviewItem(
            caption_id=record.caption_id,
            image_file_ref=self._image_refs.get(record.image_id, ""),
            source_text=record.source_text,
            current_translation=record.translated_text or "",
            back_translation=record.back_translated_text or "",
            scores=record.scores,
            revision=record.revision,
        )

    def queue(self, page: int = 1, page_size: int = 50) -> tuple[list[ReviewItem], int]:
        """Page of the manual queue in ascending caption_id order, plus total size."""
        if page < 1 or page_size < 1:
            raise ValueError("page and page_size must be >= 1")
        pending = [
            r
            for r in self._repo.list_records()
            if r.status is CaptionStatus.NEEDS_MANUAL_REVIEW
        ]
        start = (page - 1) * page_size
        return [self._item(r) for r in pending[start : start + page_size]], len(pending)

    def get(self, caption_id: int) -> CaptionRecord:
        record = self._repo.get(caption_id)
        if record is None:
            raise UnknownCaptionError(f"caption {caption_id} does not exist")
        return record

    def rescore(self, caption_id: int, edited_text: str) -> QEComponentScores:
        """Preview scores for an edited translation; never persisted."""
        record = self.get(caption_id)
        if not edited_text.strip():
            raise ValueError("edited_text must be non-empty")
        scores, _ = score_single(
            record.source_text,
            edited_text,
            self._image_refs.get(record.image_id, ""),
            self._providers,
            self._qe_config,
        )
        return scores

    def accept(self, caption_id: int, edited_text: str, expected_revision: int) -> CaptionRecord:
        record = self.get(caption_id)
        if record.status is not CaptionStatus.NEEDS_MANUAL_REVIEW:
            raise InvalidStateError(
                f"caption {caption_id} is {record.status.value}, not awaiting manual review"
            )
        if not edited_text.strip():
            raise ValueError("edited_text must be non-empty")
        scores, back = score_single(
            record.source_text,
            edited_text,
            self._image_refs.get(record.image_id, ""),
            self._providers,
            self._qe_config,
        )
        updated = record.evolve(
            CaptionStatus.ACCEPTED_MANUAL,
            translated_text=edited_text,
            back_translated_text=back,
            scores=scores,
        )
        return self._repo.compare_and_swap(expected_revision, updated)

    def reject(self, caption_id: int, expected_revision: int) -> CaptionRecord:
        record = self.get(caption_id)
        if record.status is not CaptionStatus.NEEDS_MANUAL_REVIEW:
            raise InvalidStateError(
                f"caption {caption_id} is {record.status.value}, not awaiting manual review"
            )
        updated = record.evolve(CaptionStatus.REJECTED)
        return self._repo.compare_and_swap(expected_revision, updated)

    def stats(self) -> dict:
        counts: dict[str, int] = {status.value: 0 for status in CaptionStatus}
        for record in self._repo.list_records():
            counts[record.status.value] += 1
        qe = self._qe_config
        return {
            "counts": counts,
            "config": {
                "weights": list(qe.weights),
                "threshold": qe.threshold,
                "component_thresholds": {
                    "comet": qe.comet_threshold,
                    "bert": qe.bert_threshold,
                    "clip": qe.clip_threshold,
                },
            },
        }


def evaluation_hypotheses(records: list[CaptionRecord]) -> list[str]:
    """Translations exported for reference-based evaluation; rejected captions are excluded."""
    return [
        r.translated_text or ""
        for r in sorted(records, key=lambda r: r.caption_id)
        if r.status is not CaptionStatus.REJECTED
    ]
