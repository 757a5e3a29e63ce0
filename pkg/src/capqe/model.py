"""Domain types and the corpus/record file data model.

The corpus file is UTF-8, line-delimited: one image object per line with
its captions nested, so the file can be streamed and sliced by line ranges.
Caption records (the per-caption lifecycle state) use a separate
line-delimited format produced by :func:`record_to_line`.
"""

from __future__ import annotations

import json
from dataclasses import dataclass, field, replace
from enum import Enum
from pathlib import Path
from typing import Iterable

from .errors import (
    CorpusFormatError,
    CorpusIntegrityError,
    InvalidTransitionError,
)


class CaptionStatus(str, Enum):
    PENDING = "pending"
    TRANSLATED = "translated"
    SCORED = "scored"
    ACCEPTED_AUTO = "accepted_auto"
    NEEDS_REFINEMENT = "needs_refinement"
    REFINED_AUTO = "refined_auto"
    NEEDS_MANUAL_REVIEW = "needs_manual_review"
    ACCEPTED_MANUAL = "accepted_manual"
    REJECTED = "rejected"


# Lifecycle graph. The only cycle is the bounded refinement loop
# needs_refinement -> refined_auto -> scored -> needs_refinement.
LIFECYCLE_EDGES: dict[CaptionStatus, frozenset[CaptionStatus]] = {
    CaptionStatus.PENDING: frozenset({CaptionStatus.TRANSLATED}),
    CaptionStatus.TRANSLATED: frozenset({CaptionStatus.SCORED}),
    CaptionStatus.SCORED: frozenset(
        {CaptionStatus.ACCEPTED_AUTO, CaptionStatus.NEEDS_REFINEMENT}
    ),
    CaptionStatus.NEEDS_REFINEMENT: frozenset(
        {CaptionStatus.REFINED_AUTO, CaptionStatus.NEEDS_MANUAL_REVIEW}
    ),
    CaptionStatus.REFINED_AUTO: frozenset({CaptionStatus.SCORED}),
    CaptionStatus.NEEDS_MANUAL_REVIEW: frozenset(
        {CaptionStatus.ACCEPTED_MANUAL, CaptionStatus.REJECTED}
    ),
    CaptionStatus.ACCEPTED_AUTO: frozenset(),
    CaptionStatus.ACCEPTED_MANUAL: frozenset(),
    CaptionStatus.REJECTED: frozenset(),
}

# Statuses whose records must carry a translation / full scores.
TRANSLATED_STATUSES = frozenset(s for s in CaptionStatus if s is not CaptionStatus.PENDING)
SCORED_STATUSES = frozenset(
    s
    for s in CaptionStatus
    if s not in (CaptionStatus.PENDING, CaptionStatus.TRANSLATED)
)


def validate_status_transition(source: CaptionStatus, target: CaptionStatus) -> bool:
    """True iff ``source -> target`` is an edge of the lifecycle graph."""
    return target in LIFECYCLE_EDGES[source]


@dataclass(frozen=True)
class QEConfig:
    """Weights, threshold and normalization bounds for the score ensemble.

    ``component_thresholds`` are reportable diagnostics only; refinement is
    gated on the hybrid score alone.
    """

    w_comet: float = 0.4
    w_bert: float = 0.4
    w_clip: float = 0.2
    threshold: float = 0.7
    epsilon: float = 1e-8
    comet_bounds: tuple[float, float] = (0.0, 1.0)
    bert_bounds: tuple[float, float] = (0.0, 1.0)
    clip_bounds: tuple[float, float] = (0.0, 1.0)
    comet_threshold: float = 0.70
    bert_threshold: float = 0.90
    clip_threshold: float = 0.70

    def __post_init__(self) -> None:
        from .errors import ConfigError

        problems = []
        weights = (self.w_comet, self.w_bert, self.w_clip)
        if any(w < 0 for w in weights):
            problems.append(f"weights must be non-negative, got {weights}")
        if abs(sum(weights) - 1.0) > 1e-12:
            problems.append(f"weights sum {sum(weights)!r}, expected 1")
        if not 0.0 < self.threshold < 1.0:
            problems.append(f"threshold {self.threshold!r} outside (0,1)")
        if self.epsilon <= 0:
            problems.append(f"epsilon {self.epsilon!r} must be > 0")
        for name, (lo, hi) in (
            ("comet_bounds", self.comet_bounds),
            ("bert_bounds", self.bert_bounds),
            ("clip_bounds", self.clip_bounds),
        ):
            if not lo < hi:
                problems.append(f"{name} degenerate: ({lo!r}, {hi!r})")
        if problems:
            raise ConfigError(problems)

    @property
    def weights(self) -> tuple[float, float, float]:
        return (self.w_comet, self.w_bert, self.w_clip)


@dataclass(frozen=True)
class QEComponentScores:
    """All scoring outputs for one caption.

    ``normalized`` is the (comet, bert, clip) triple after min-max mapping;
    ``hybrid`` is their weighted sum under the configured weights.
    """

    comet_raw: float
    bert_raw: float
    clip_raw: float
    s_orig: float
    s_bt: float
    normalized: tuple[float, float, float]
    hybrid: float

    def __post_init__(self) -> None:
        if not 0.0 <= self.clip_raw <= 1.0:
            raise ValueError(f"clip_raw {self.clip_raw!r} outside [0,1]")
        for name, v in (("s_orig", self.s_orig), ("s_bt", self.s_bt)):
            if not -1.0 - 1e-12 <= v <= 1.0 + 1e-12:
                raise ValueError(f"{name} {v!r} outside [-1,1]")
        if len(self.normalized) != 3:
            raise ValueError("normalized must have exactly three components")
        if not 0.0 <= self.hybrid <= 1.0:
            raise ValueError(f"hybrid {self.hybrid!r} outside [0,1]")

    def to_dict(self) -> dict:
        return {
            "comet_raw": self.comet_raw,
            "bert_raw": self.bert_raw,
            "clip_raw": self.clip_raw,
            "s_orig": self.s_orig,
            "s_bt": self.s_bt,
            "normalized": list(self.normalized),
            "hybrid": self.hybrid,
        }

    @classmethod
    def from_dict(cls, data: dict) -> "QEComponentScores":
        return cls(
            comet_raw=float(data["comet_raw"]),
            bert_raw=float(data["bert_raw"]),
            clip_raw=float(data["clip_raw"]),
            s_orig=float(data["s_orig"]),
            s_bt=float(data["s_bt"]),
            normalized=tuple(float(x) for x in data["normalized"]),
            hybrid=float(data["hybrid"]),
        )


@dataclass(frozen=True)
class CaptionRecord:
    """One caption's full lifecycle state.

    Records are immutable; every modification constructs a successor via
    :meth:`evolve`, which validates the status edge and bumps ``revision``.
    """

    caption_id: int
    image_id: int
    source_text: str
    translated_text: str | None = None
    back_translated_text: str | None = None
    scores: QEComponentScores | None = None
    status: CaptionStatus = CaptionStatus.PENDING
    revision: int = 0

    def __post_init__(self) -> None:
        if self.revision < 0:
            raise ValueError(f"revision {self.revision} must be non-negative")
        if self.status in TRANSLATED_STATUSES and self.translated_text is None:
            raise ValueError(
                f"caption {self.caption_id}: status {self.status.value} requires translated_text"
            )
        if self.status in SCORED_STATUSES and self.scores is None:
            raise ValueError(
                f"caption {self.caption_id}: status {self.status.value} requires scores"
            )

    def evolve(self, status: CaptionStatus, **changes) -> "CaptionRecord":
        """Successor record with ``status`` applied and revision incremented."""
        if not validate_status_transition(self.status, status):
            raise InvalidTransitionError(
                f"caption {self.caption_id}: {self.status.value} -> {status.value}"
            )
        return replace(self, status=status, revision=self.revision + 1, **changes)


@dataclass(frozen=True)
class ImageEntry:
    """One image with its category labels and ordered caption ids."""

    image_id: int
    file_ref: str
    labels: frozenset[str]
    caption_ids: tuple[int, ...]

    def __post_init__(self) -> None:
        if not self.caption_ids:
            raise ValueError(f"image {self.image_id}: caption_ids must be non-empty")


@dataclass(frozen=True)
class Corpus:
    """Validated collection of images and caption records.

    Captions are ordered by (image_id, caption_id); that order is the
    canonical caption index used for chunking.
    """

    images: tuple[ImageEntry, ...]
    captions: tuple[CaptionRecord, ...]
    _images_by_id: dict = field(init=False, repr=False, compare=False)
    _captions_by_id: dict = field(init=False, repr=False, compare=False)

    def __post_init__(self) -> None:
        images = tuple(sorted(self.images, key=lambda im: im.image_id))
        captions = tuple(
            sorted(self.captions, key=lambda c: (c.image_id, c.caption_id))
        )
        object.__setattr__(self, "images", images)
        object.__setattr__(self, "captions", captions)

        images_by_id: dict[int, ImageEntry] = {}
        for image in images:
            if image.image_id in images_by_id:
                raise CorpusIntegrityError(f"duplicate image_id {image.image_id}")
            images_by_id[image.image_id] = image

        captions_by_id: dict[int, CaptionRecord] = {}
        for record in captions:
            if record.caption_id in captions_by_id:
                raise CorpusIntegrityError(f"duplicate caption_id {record.caption_id}")
            if record.image_id not in images_by_id:
                raise CorpusIntegrityError(
                    f"caption {record.caption_id} references missing image_id {record.image_id}"
                )
            captions_by_id[record.caption_id] = record

        referenced: set[int] = set()
        for image in images:
            for cid in image.caption_ids:
                if cid in referenced:
                    raise CorpusIntegrityError(
                        f"caption_id {cid} referenced by more than one image"
                    )
                referenced.add(cid)
                record = captions_by_id.get(cid)
                if record is None:
                    raise CorpusIntegrityError(
                        f"image {image.image_id} references missing caption_id {cid}"
                    )
                if record.image_id != image.image_id:
                    raise CorpusIntegrityError(
                        f"caption {cid} belongs to image {record.image_id}, "
                        f"referenced by image {image.image_id}"
                    )
        if referenced != set(captions_by_id):
            orphans = sorted(set(captions_by_id) - referenced)
            raise CorpusIntegrityError(f"caption ids not referenced by any image: {orphans}")

        object.__setattr__(self, "_images_by_id", images_by_id)
        object.__setattr__(self, "_captions_by_id", captions_by_id)

    def __len__(self) -> int:
        return len(self.images)

    @property
    def n_captions(self) -> int:
        return len(self.captions)

    def image(self, image_id: int) -> ImageEntry:
        return self._images_by_id[image_id]

    def caption(self, caption_id: int) -> CaptionRecord:
        return self._captions_by_id[caption_id]

    def has_image(self, image_id: int) -> bool:
        return image_id in self._images_by_id


# ---------------------------------------------------------------------------
# Serialization. All JSON is canonical: sorted keys, compact separators,
# raw UTF-8. This keeps chunk payloads and manifests byte-defined.

_CORPUS_LINE_KEYS = {"image_id", "file_ref", "labels", "captions"}
_CAPTION_KEYS = {"caption_id", "text"}


def canonical_json(obj) -> str:
    return json.dumps(obj, sort_keys=True, ensure_ascii=False, separators=(",", ":"))


def _parse_corpus_line(line: str, lineno: int) -> tuple[ImageEntry, list[CaptionRecord]]:
    try:
        data = json.loads(line)
    except json.JSONDecodeError as exc:
        raise CorpusFormatError(f"line {lineno}: invalid JSON: {exc}") from exc
    if not isinstance(data, dict):
        raise CorpusFormatError(f"line {lineno}: expected an object")
    if set(data) != _CORPUS_LINE_KEYS:
        raise CorpusFormatError(
            f"line {lineno}: expected keys {sorted(_CORPUS_LINE_KEYS)}, got {sorted(data)}"
        )
    try:
        image_id = int(data["image_id"])
        file_ref = str(data["file_ref"])
        labels = data["labels"]
        raw_captions = data["captions"]
        if not isinstance(labels, list) or not all(isinstance(x, str) for x in labels):
            raise CorpusFormatError(f"line {lineno}: labels must be a list of strings")
        if len(set(labels)) != len(labels):
            raise CorpusFormatError(f"line {lineno}: duplicate labels {labels}")
        if not isinstance(raw_captions, list) or not raw_captions:
            raise CorpusFormatError(f"line {lineno}: captions must be a non-empty list")
        records = []
        caption_ids = []
        for cap in raw_captions:
            if not isinstance(cap, dict) or set(cap) != _CAPTION_KEYS:
                raise CorpusFormatError(
                    f"line {lineno}: caption entries need exactly keys {sorted(_CAPTION_KEYS)}"
                )
            cid = int(cap["caption_id"])
            caption_ids.append(cid)
            records.append(
                CaptionRecord(caption_id=cid, image_id=image_id, source_text=str(cap["text"]))
            )
    except (TypeError, ValueError) as exc:
        raise CorpusFormatError(f"line {lineno}: {exc}") from exc
    entry = ImageEntry(
        image_id=image_id,
        file_ref=file_ref,
        labels=frozenset(labels),
        caption_ids=tuple(caption_ids),
    )
    return entry, records


def corpus_from_lines(lines: Iterable[str]) -> Corpus:
    images: list[ImageEntry] = []
    captions: list[CaptionRecord] = []
    for lineno, line in enumerate(lines, start=1):
        if not line.strip():
            continue
        entry, records = _parse_corpus_line(line, lineno)
        images.append(entry)
        captions.extend(records)
    return Corpus(images=tuple(images), captions=tuple(captions))


def load_corpus(path: str | Path) -> Corpus:
    """Parse a line-delimited corpus file; deterministic (image_id, caption_id) order."""
    with open(path, encoding="utf-8") as handle:
        return corpus_from_lines(handle)


def corpus_to_lines(corpus: Corpus) -> list[str]:
    lines = []
    for image in corpus.images:
        lines.append(
            canonical_json(
                {
                    "image_id": image.image_id,
                    "file_ref": image.file_ref,
                    "labels": sorted(image.labels),
                    "captions": [
                        {"caption_id": cid, "text": corpus.caption(cid).source_text}
                        for cid in image.caption_ids
                    ],
                }
            )
        )
    return lines


def save_corpus(corpus: Corpus, path: str | Path) -> None:
    Path(path).write_text("\n".join(corpus_to_lines(corpus)) + "\n", encoding="utf-8")


def record_to_line(record: CaptionRecord) -> str:
    return canonical_json(
        {
            "caption_id": record.caption_id,
            "image_id": record.image_id,
            "source_text": record.source_text,
            "translated_text": record.translated_text,
            "back_translated_text": record.back_translated_text,
            "scores": record.scores.to_dict() if record.scores is not None else None,
            "status": record.status.value,
            "revision": record.revision,
        }
    )


def record_from_line(line: str, lineno: int = 0) -> CaptionRecord:
    try:
        data = json.loads(line)
        scores = data["scores"]
        return CaptionRecord(
            caption_id=int(data["caption_id"]),
            image_id=int(data["image_id"]),
            source_text=str(data["source_text"]),
            translated_text=data["translated_text"],
            back_translated_text=data["back_translated_text"],
            scores=QEComponentScores.from_dict(scores) if scores is not None else None,
            status=CaptionStatus(data["status"]),
            revision=int(data["revision"]),
        )
    except (KeyError, TypeError, ValueError, json.JSONDecodeError) as exc:
        raise CorpusFormatError(f"record line {lineno}: {exc}") from exc


def records_to_bytes(records: Iterable[CaptionRecord]) -> bytes:
    return "".join(record_to_line(r) + "\n" for r in records).encode("utf-8")


def records_from_bytes(payload: bytes) -> list[CaptionRecord]:
    records = []
    for lineno, line in enumerate(payload.decode("utf-8").splitlines(), start=1):
        if line.strip():
            records.append(record_from_line(line, lineno))
    return records
