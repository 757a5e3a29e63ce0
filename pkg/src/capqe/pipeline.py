"""Fault-tolerant, chunk-parallel translate-and-score execution engine.

The caption list is partitioned into fixed-size ranges; each range is an
independent unit of work with a version id that is a pure function of
(start, end, pipeline config hash). A run skips every already-published
version, processes the rest on a worker pool, publishes results atomically,
and merges the store's publication records into a manifest. Reruns after a
crash therefore converge to the same store without redoing finished work.

Chunk payloads and the manifest are canonical bytes: identical inputs give
identical stores for any worker count. Publication timestamps come from an
injectable clock so tests can pin them.
"""

from __future__ import annotations

import hashlib
from concurrent.futures import FIRST_EXCEPTION, ThreadPoolExecutor, wait
from dataclasses import dataclass
from datetime import datetime, timezone
from typing import Callable

from .errors import ChunkFailuresError, ProviderError, StoreError
from .model import (
    CaptionRecord,
    CaptionStatus,
    Corpus,
    canonical_json,
    records_from_bytes,
    records_to_bytes,
)
from .providers import Direction, ProviderSet
from .model import QEConfig
from .scoring import component_scores, cosine, bt_semantic_fscore, flag_low_quality
from .store import ChunkMeta, FaultInjector, VersionedStore, content_checksum

Clock = Callable[[], str]


def system_clock() -> str:
    return datetime.now(timezone.utc).isoformat()


@dataclass(frozen=True)
class ChunkRange:
    start: int
    end: int
    version_id: str

    def __post_init__(self) -> None:
        if not 0 <= self.start < self.end:
            raise ValueError(f"invalid range [{self.start}, {self.end})")


@dataclass(frozen=True)
class ChunkStats:
    count: int
    mean_hybrid: float
    flagged: int


@dataclass(frozen=True)
class ChunkResult:
    range: ChunkRange
    records: tuple[CaptionRecord, ...]
    stats: ChunkStats
    checksum: str


@dataclass(frozen=True)
class Manifest:
    pipeline_config_hash: str
    chunks: tuple[ChunkMeta, ...]
    total_records: int

    def __post_init__(self) -> None:
        expected = 0
        seen_versions = set()
        for meta in self.chunks:
            if meta.start != expected:
                raise StoreError(
                    f"manifest ranges are not an exact cover: gap or overlap at {meta.start}, "
                    f"expected {expected}"
                )
            if meta.version_id in seen_versions:
                raise StoreError(f"manifest has duplicate version {meta.version_id}")
            seen_versions.add(meta.version_id)
            expected = meta.end
        if expected != self.total_records:
            raise StoreError(
                f"manifest covers [0, {expected}) but total_records is {self.total_records}"
            )


def compute_version_id(start: int, end: int, config_hash: str) -> str:
    digest = hashlib.sha256(f"{start}:{end}:{config_hash}".encode()).hexdigest()
    return digest[:16]


def plan_chunks(n_records: int, chunk_size: int, config_hash: str = "") -> list[ChunkRange]:
    """Disjoint ranges covering [0, n_records); all but the last have chunk_size."""
    if n_records < 1:
        raise ValueError(f"n_records must be >= 1, got {n_records}")
    if chunk_size < 1:
        raise ValueError(f"chunk_size must be >= 1, got {chunk_size}")
    ranges = []
    for start in range(0, n_records, chunk_size):
        end = min(start + chunk_size, n_records)
        ranges.append(ChunkRange(start, end, compute_version_id(start, end, config_hash)))
    return ranges


def score_batch(
    records: list[CaptionRecord],
    translated: list[str],
    corpus: Corpus,
    providers: ProviderSet,
    qe_config: QEConfig,
) -> list[CaptionRecord]:
    """Back-translate, embed and score already-translated records.

    Input records must be at status TRANSLATED with ``translated`` aligned;
    output records are SCORED and then routed to ACCEPTED_AUTO or
    NEEDS_REFINEMENT by the hybrid threshold.
    """
    sources = [r.source_text for r in records]
    back = providers.translator.translate(translated, Direction.TGT_TO_SRC)
    comet = providers.qe_scorer.qe_score(sources, translated)
    source_tokens = providers.text_embedder.embed_text_tokens(sources)
    back_tokens = providers.text_embedder.embed_text_tokens(back)
    image_refs = [corpus.image(r.image_id).file_ref for r in records]
    image_vecs, text_vecs = providers.multimodal_embedder.embed_multimodal(
        image_refs, sources + back
    )
    n = len(records)
    out = []
    for i, record in enumerate(records):
        _, _, f1 = bt_semantic_fscore(back_tokens[i], source_tokens[i])
        scores = component_scores(
            comet_raw=comet[i],
            bert_raw=f1,
            s_orig=cosine(image_vecs[i], text_vecs[i]),
            s_bt=cosine(image_vecs[i], text_vecs[n + i]),
            config=qe_config,
        )
        scored = record.evolve(
            CaptionStatus.SCORED, back_translated_text=back[i], scores=scores
        )
        if flag_low_quality(scores, qe_config):
            out.append(scored.evolve(CaptionStatus.NEEDS_REFINEMENT))
        else:
            out.append(scored.evolve(CaptionStatus.ACCEPTED_AUTO))
    return out


def score_single(
    source_text: str,
    translated_text: str,
    image_ref: str,
    providers: ProviderSet,
    qe_config: QEConfig,
) -> tuple:
    """Full QE for one candidate translation.

    Returns (QEComponentScores, back_translated_text). Used wherever a
    single caption is re-scored outside chunk processing (refinement loop,
    interactive review).
    """
    back = providers.translator.translate([translated_text], Direction.TGT_TO_SRC)[0]
    comet = providers.qe_scorer.qe_score([source_text], [translated_text])[0]
    source_tokens = providers.text_embedder.embed_text_tokens([source_text])[0]
    back_tokens = providers.text_embedder.embed_text_tokens([back])[0]
    image_vecs, text_vecs = providers.multimodal_embedder.embed_multimodal(
        [image_ref], [source_text, back]
    )
    _, _, f1 = bt_semantic_fscore(back_tokens, source_tokens)
    scores = component_scores(
        comet_raw=comet,
        bert_raw=f1,
        s_orig=cosine(image_vecs[0], text_vecs[0]),
        s_bt=cosine(image_vecs[0], text_vecs[1]),
        config=qe_config,
    )
    return scores, back


def process_chunk(
    chunk: ChunkRange,
    corpus: Corpus,
    providers: ProviderSet,
    qe_config: QEConfig,
) -> ChunkResult:
    """Translate and score every caption in the range; all-or-nothing."""
    if chunk.end > corpus.n_captions:
        raise ValueError(
            f"range [{chunk.start}, {chunk.end}) exceeds corpus of {corpus.n_captions} captions"
        )
    pending = list(corpus.captions[chunk.start : chunk.end])
    translated = providers.translator.translate(
        [r.source_text for r in pending], Direction.SRC_TO_TGT
    )
    in_progress = [
        r.evolve(CaptionStatus.TRANSLATED, translated_text=t)
        for r, t in zip(pending, translated)
    ]
    records = tuple(score_batch(in_progress, translated, corpus, providers, qe_config))
    flagged = sum(1 for r in records if r.status is CaptionStatus.NEEDS_REFINEMENT)
    mean_hybrid = sum(r.scores.hybrid for r in records) / len(records)
    payload = records_to_bytes(records)
    return ChunkResult(
        range=chunk,
        records=records,
        stats=ChunkStats(count=len(records), mean_hybrid=mean_hybrid, flagged=flagged),
        checksum=content_checksum(payload),
    )


def publish_chunk(
    store: VersionedStore,
    result: ChunkResult,
    published_at: str,
    faults: FaultInjector | None = None,
) -> None:
    """Atomically commit a chunk result; a no-op if the version exists."""
    meta = ChunkMeta(
        start=result.range.start,
        end=result.range.end,
        version_id=result.range.version_id,
        checksum=result.checksum,
        published_at=published_at,
        count=result.stats.count,
        mean_hybrid=result.stats.mean_hybrid,
        flagged=result.stats.flagged,
    )
    store.publish(meta, records_to_bytes(result.records), faults or FaultInjector(None))


def manifest_to_bytes(manifest: Manifest) -> bytes:
    lines = [
        canonical_json(
            {
                "pipeline_config_hash": manifest.pipeline_config_hash,
                "total_records": manifest.total_records,
            }
        )
    ]
    lines.extend(canonical_json(meta.to_dict()) for meta in manifest.chunks)
    return ("\n".join(lines) + "\n").encode("utf-8")


def manifest_from_bytes(payload: bytes) -> Manifest:
    import json

    lines = [line for line in payload.decode("utf-8").splitlines() if line.strip()]
    header = json.loads(lines[0])
    chunks = tuple(ChunkMeta.from_dict(json.loads(line)) for line in lines[1:])
    return Manifest(
        pipeline_config_hash=header["pipeline_config_hash"],
        chunks=chunks,
        total_records=int(header["total_records"]),
    )


def run(
    corpus: Corpus,
    providers: ProviderSet,
    store: VersionedStore,
    qe_config: QEConfig,
    config_hash: str,
    chunk_size: int,
    workers: int = 1,
    clock: Clock = system_clock,
    faults: FaultInjector | None = None,
) -> Manifest:
    """Process all chunks, skipping published versions, and write the manifest.

    Raises :class:`ChunkFailuresError` listing the ranges to retrigger when
    any chunk fails; chunks that succeeded stay published. A
    :class:`SimulatedCrash` from a fault-injection hook propagates
    immediately, emulating process death.
    """
    if workers < 1:
        raise ValueError(f"workers must be >= 1, got {workers}")
    faults = faults or FaultInjector.from_env()
    planned = plan_chunks(corpus.n_captions, chunk_size, config_hash)
    todo = [c for c in planned if not store.version_exists(c.version_id)]

    failures: list[tuple[ChunkRange, str]] = []

    def worker(chunk: ChunkRange) -> None:
        result = process_chunk(chunk, corpus, providers, qe_config)
        publish_chunk(store, result, published_at=clock(), faults=faults)

    if todo:
        with ThreadPoolExecutor(max_workers=workers) as pool:
            futures = {pool.submit(worker, chunk): chunk for chunk in todo}
            done, _ = wait(futures, return_when=FIRST_EXCEPTION)
            # Surface a simulated crash as-is; collect provider errors per chunk.
            for future in done:
                exc = future.exception()
                if exc is not None and not isinstance(exc, (ProviderError, ValueError)):
                    raise exc
            for future, chunk in futures.items():
                exc = future.exception()
                if exc is not None:
                    failures.append((chunk, str(exc)))

    if failures:
        failures.sort(key=lambda item: item[0].start)
        raise ChunkFailuresError(
            failed_ranges=[chunk for chunk, _ in failures],
            causes=[cause for _, cause in failures],
        )

    by_version = {meta.version_id: meta for meta in store.list_published()}
    chunks = tuple(by_version[c.version_id] for c in planned)
    manifest = Manifest(
        pipeline_config_hash=config_hash,
        chunks=chunks,
        total_records=corpus.n_captions,
    )
    store.write_manifest(manifest_to_bytes(manifest))
    return manifest


def load_published_records(store: VersionedStore) -> list[CaptionRecord]:
    """All records from published chunks, in canonical caption order."""
    records: list[CaptionRecord] = []
    for meta in store.list_published():
        records.extend(records_from_bytes(store.read_payload(meta.version_id)))
    return records
