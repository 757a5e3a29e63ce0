"""Versioned chunk store with atomic publication.

A chunk version is committed by two renames: the records payload first,
then a small meta file. The meta rename is the linearization point, so a
reader never sees a version whose payload is missing or torn, and a crash
between the renames leaves the version unpublished. Publishing an existing
version is a no-op: previous results are never overwritten.

Fault-injection kill points ("before_publish", "mid_publish",
"after_publish") simulate a crash at the corresponding instant; they are
armed programmatically or from the CAPQE_KILL_POINT environment variable
and are for tests only.
"""

from __future__ import annotations

import hashlib
import json
import os
import threading
import uuid
from abc import ABC, abstractmethod
from dataclasses import dataclass
from pathlib import Path

from .errors import IntegrityError, StoreError

KILL_POINTS = ("before_publish", "mid_publish", "after_publish")
KILL_POINT_ENV = "CAPQE_KILL_POINT"


class SimulatedCrash(Exception):
    """Raised by a kill point to emulate sudden process death."""


class FaultInjector:
    """Fires :class:`SimulatedCrash` the n-th time the armed point is reached."""

    def __init__(self, point: str | None = None, occurrence: int = 1):
        if point is not None and point not in KILL_POINTS:
            raise ValueError(f"unknown kill point {point!r}")
        self.point = point
        self.occurrence = occurrence
        self._seen = 0
        self._lock = threading.Lock()

    @classmethod
    def from_env(cls) -> "FaultInjector":
        raw = os.environ.get(KILL_POINT_ENV, "")
        if not raw:
            return cls(None)
        point, _, nth = raw.partition(":")
        return cls(point, int(nth) if nth else 1)

    def fire(self, point: str) -> None:
        if self.point != point:
            return
        with self._lock:
            self._seen += 1
            if self._seen == self.occurrence:
                raise SimulatedCrash(f"kill point {point} (occurrence {self.occurrence})")


_NO_FAULTS = FaultInjector(None)


@dataclass(frozen=True)
class ChunkMeta:
    """Publication record for one chunk version."""

    start: int
    end: int
    version_id: str
    checksum: str
    published_at: str
    count: int
    mean_hybrid: float
    flagged: int

    def to_dict(self) -> dict:
        return {
            "start": self.start,
            "end": self.end,
            "version_id": self.version_id,
            "checksum": self.checksum,
            "published_at": self.published_at,
            "count": self.count,
            "mean_hybrid": self.mean_hybrid,
            "flagged": self.flagged,
        }

    @classmethod
    def from_dict(cls, data: dict) -> "ChunkMeta":
        return cls(
            start=int(data["start"]),
            end=int(data["end"]),
            version_id=str(data["version_id"]),
            checksum=str(data["checksum"]),
            published_at=str(data["published_at"]),
            count=int(data["count"]),
            mean_hybrid=float(data["mean_hybrid"]),
            flagged=int(data["flagged"]),
        )


def content_checksum(payload: bytes) -> str:
    return hashlib.sha256(payload).hexdigest()


class VersionedStore(ABC):
    """Publish-once chunk storage; versions are immutable after commit."""

    @abstractmethod
    def version_exists(self, version_id: str) -> bool: ...

    @abstractmethod
    def publish(self, meta: ChunkMeta, payload: bytes, faults: FaultInjector = _NO_FAULTS) -> None: ...

    @abstractmethod
    def read_payload(self, version_id: str) -> bytes: ...

    @abstractmethod
    def read_meta(self, version_id: str) -> ChunkMeta: ...

    @abstractmethod
    def list_published(self) -> list[ChunkMeta]: ...

    @abstractmethod
    def write_manifest(self, payload: bytes) -> None: ...

    @abstractmethod
    def read_manifest(self) -> bytes | None: ...

    def _verify(self, meta: ChunkMeta, payload: bytes) -> None:
        actual = content_checksum(payload)
        if actual != meta.checksum:
            raise IntegrityError(
                f"chunk {meta.version_id}: checksum {actual} does not match declared {meta.checksum}"
            )


class MemoryStore(VersionedStore):
    """In-process store for tests; same commit semantics as the filesystem store."""

    def __init__(self):
        self._payloads: dict[str, bytes] = {}
        self._meta: dict[str, ChunkMeta] = {}
        self._manifest: bytes | None = None
        self._lock = threading.Lock()

    def version_exists(self, version_id: str) -> bool:
        with self._lock:
            return version_id in self._meta

    def publish(self, meta: ChunkMeta, payload: bytes, faults: FaultInjector = _NO_FAULTS) -> None:
        self._verify(meta, payload)
        faults.fire("before_publish")
        with self._lock:
            if meta.version_id in self._meta:
                return
            self._payloads[meta.version_id] = bytes(payload)
        faults.fire("mid_publish")
        with self._lock:
            self._meta.setdefault(meta.version_id, meta)
        faults.fire("after_publish")
        self._read_back(meta)

    def _read_back(self, meta: ChunkMeta) -> None:
        stored = self.read_payload(meta.version_id)
        if content_checksum(stored) != meta.checksum:
            raise IntegrityError(f"chunk {meta.version_id}: write-back verification failed")

    def read_payload(self, version_id: str) -> bytes:
        with self._lock:
            if version_id not in self._payloads:
                raise StoreError(f"unknown version {version_id}")
            return self._payloads[version_id]

    def read_meta(self, version_id: str) -> ChunkMeta:
        with self._lock:
            if version_id not in self._meta:
                raise StoreError(f"unknown version {version_id}")
            return self._meta[version_id]

    def list_published(self) -> list[ChunkMeta]:
        with self._lock:
            return sorted(self._meta.values(), key=lambda m: m.start)

    def write_manifest(self, payload: bytes) -> None:
        with self._lock:
            self._manifest = bytes(payload)

    def read_manifest(self) -> bytes | None:
        with self._lock:
            return self._manifest


class FilesystemStore(VersionedStore):
    """Store rooted at a directory; atomic via write-temp-then-rename.

    Layout: <root>/chunks/<version_id>.records, <root>/chunks/<version_id>.meta.json,
    <root>/manifest.records.
    """

    def __init__(self, root: str | Path):
        self.root = Path(root)
        self.chunks_dir = self.root / "chunks"
        self.chunks_dir.mkdir(parents=True, exist_ok=True)

    def _records_path(self, version_id: str) -> Path:
        return self.chunks_dir / f"{version_id}.records"

    def _meta_path(self, version_id: str) -> Path:
        return self.chunks_dir / f"{version_id}.meta.json"

    def version_exists(self, version_id: str) -> bool:
        return self._meta_path(version_id).exists() and self._records_path(version_id).exists()

    def _write_atomic(self, path: Path, payload: bytes) -> None:
        tmp = path.parent / f".tmp-{uuid.uuid4().hex}"
        tmp.write_bytes(payload)
        os.replace(tmp, path)

    def publish(self, meta: ChunkMeta, payload: bytes, faults: FaultInjector = _NO_FAULTS) -> None:
        self._verify(meta, payload)
        faults.fire("before_publish")
        if self.version_exists(meta.version_id):
            return
        self._write_atomic(self._records_path(meta.version_id), payload)
        faults.fire("mid_publish")
        meta_bytes = json.dumps(meta.to_dict(), sort_keys=True, separators=(",", ":")).encode()
        self._write_atomic(self._meta_path(meta.version_id), meta_bytes)
        faults.fire("after_publish")
        stored = self._records_path(meta.version_id).read_bytes()
        if content_checksum(stored) != meta.checksum:
            raise IntegrityError(f"chunk {meta.version_id}: write-back verification failed")

    def read_payload(self, version_id: str) -> bytes:
        path = self._records_path(version_id)
        if not path.exists():
            raise StoreError(f"unknown version {version_id}")
        return path.read_bytes()

    def read_meta(self, version_id: str) -> ChunkMeta:
        path = self._meta_path(version_id)
        if not path.exists():
            raise StoreError(f"unknown version {version_id}")
        return ChunkMeta.from_dict(json.loads(path.read_text()))

    def list_published(self) -> list[ChunkMeta]:
        metas = []
        for meta_path in self.chunks_dir.glob("*.meta.json"):
            version_id = meta_path.name[: -len(".meta.json")]
            if self.version_exists(version_id):
                metas.append(self.read_meta(version_id))
        return sorted(metas, key=lambda m: m.start)

    def write_manifest(self, payload: bytes) -> None:
        self._write_atomic(self.root / "manifest.records", payload)

    def read_manifest(self) -> bytes | None:
        path = self.root / "manifest.records"
        return path.read_bytes() if path.exists() else None
