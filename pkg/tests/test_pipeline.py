"""Chunk pipeline: planning, processing, idempotent publication, crash recovery."""

from __future__ import annotations

import pytest

from capqe.errors import ChunkFailuresError, TransportError
from capqe.model import CaptionStatus, QEConfig
from capqe.pipeline import (
    ChunkRange,
    Manifest,
    compute_version_id,
    load_published_records,
    manifest_from_bytes,
    plan_chunks,
    process_chunk,
    publish_chunk,
    run,
)
from capqe.providers import Direction, ProviderSet, build_provider_set
from capqe.store import FaultInjector, FilesystemStore, MemoryStore, SimulatedCrash

from conftest import CountingProviders, make_corpus, mock_provider_configs

FIXED_CLOCK = lambda: "2024-01-01T00:00:00+00:00"  # noqa: E731


@pytest.fixture
def ten_caption_corpus():
    rows = [
        (i, ["A"] if i % 2 else ["B"], [(i * 10 + 1, f"first caption {i}"), (i * 10 + 2, f"second caption {i}")])
        for i in range(1, 6)
    ]
    return make_corpus(rows)


class FailingTranslator:
    def __init__(self, fail_ranges: set[str]):
        self.fail_on = fail_ranges

    def translate(self, texts, direction):
        for text in texts:
            if any(marker in text for marker in self.fail_on):
                raise TransportError("synthetic permanent failure")
        from capqe.providers.mock import MockTranslator
        from capqe.providers import ProviderConfig

        return MockTranslator(ProviderConfig(kind="translator")).translate(texts, direction)


class TestPlanChunks:
    def test_uneven_split(self):
        ranges = plan_chunks(10, 4)
        assert [(r.start, r.end) for r in ranges] == [(0, 4), (4, 8), (8, 10)]

    def test_exact_split(self):
        assert [(r.start, r.end) for r in plan_chunks(4, 4)] == [(0, 4)]

    def test_oversized_chunk(self):
        assert [(r.start, r.end) for r in plan_chunks(1, 100)] == [(0, 1)]

    def test_argument_validation(self):
        with pytest.raises(ValueError):
            plan_chunks(0, 4)
        with pytest.raises(ValueError):
            plan_chunks(4, 0)

    def test_version_id_depends_on_range_and_config(self):
        assert compute_version_id(0, 4, "abc") == compute_version_id(0, 4, "abc")
        assert compute_version_id(0, 4, "abc") != compute_version_id(4, 8, "abc")
        assert compute_version_id(0, 4, "abc") != compute_version_id(0, 4, "xyz")


class TestProcessChunk:
    def test_counts_and_statuses(self, ten_caption_corpus, mock_providers):
        chunk = plan_chunks(10, 4, "h")[0]
        result = process_chunk(chunk, ten_caption_corpus, mock_providers, QEConfig())
        assert result.stats.count == 4
        assert len(result.records) == 4
        for record in result.records:
            assert record.status in (CaptionStatus.ACCEPTED_AUTO, CaptionStatus.NEEDS_REFINEMENT)
            assert record.translated_text
            assert record.back_translated_text == record.source_text  # mock round trip
            assert record.scores is not None

    def test_forced_low_qe_flags_everything(self, ten_caption_corpus):
        providers = build_provider_set(mock_provider_configs(qe_mean=0.5))
        chunk = plan_chunks(10, 4, "h")[0]
        result = process_chunk(chunk, ten_caption_corpus, providers, QEConfig())
        assert result.stats.flagged == 4
        assert all(r.status is CaptionStatus.NEEDS_REFINEMENT for r in result.records)

    def test_determinism(self, ten_caption_corpus, mock_providers):
        chunk = plan_chunks(10, 10, "h")[0]
        one = process_chunk(chunk, ten_caption_corpus, mock_providers, QEConfig())
        two = process_chunk(chunk, ten_caption_corpus, mock_providers, QEConfig())
        assert one.checksum == two.checksum

    def test_range_exceeding_corpus(self, ten_caption_corpus, mock_providers):
        with pytest.raises(ValueError, match="exceeds"):
            process_chunk(
                ChunkRange(8, 12, "x"), ten_caption_corpus, mock_providers, QEConfig()
            )


class TestRun:
    def run_store(self, corpus, store, workers=1, providers=None, faults=None):
        providers = providers or build_provider_set(mock_provider_configs())
        return run(
            corpus,
            providers,
            store,
            QEConfig(),
            config_hash="cfg",
            chunk_size=4,
            workers=workers,
            clock=FIXED_CLOCK,
            faults=faults,
        )

    def store_fingerprint(self, store) -> dict:
        state = {m.version_id: store.read_payload(m.version_id) for m in store.list_published()}
        state["__manifest__"] = store.read_manifest()
        return state

    def test_manifest_exact_cover(self, ten_caption_corpus):
        store = MemoryStore()
        manifest = self.run_store(ten_caption_corpus, store)
        assert manifest.total_records == 10
        assert [(m.start, m.end) for m in manifest.chunks] == [(0, 4), (4, 8), (8, 10)]

    def test_worker_count_invariance(self, ten_caption_corpus):
        states = []
        for workers in (1, 2, 8):
            store = MemoryStore()
            self.run_store(ten_caption_corpus, store, workers=workers)
            states.append(self.store_fingerprint(store))
        assert states[0] == states[1] == states[2]

    def test_rerun_skips_published_chunks(self, ten_caption_corpus):
        store = MemoryStore()
        counters = CountingProviders(build_provider_set(mock_provider_configs()))
        self.run_store(ten_caption_corpus, store, providers=counters.set)
        calls_first = counters.total
        assert calls_first > 0

        self.run_store(ten_caption_corpus, store, providers=counters.set)
        assert counters.total == calls_first  # zero provider calls on resume

    def test_prepublished_chunk_not_reprocessed(self, ten_caption_corpus):
        store = MemoryStore()
        providers = build_provider_set(mock_provider_configs())
        chunk2 = plan_chunks(10, 4, "cfg")[1]
        result = process_chunk(chunk2, ten_caption_corpus, providers, QEConfig())
        publish_chunk(store, result, published_at=FIXED_CLOCK())

        counters = CountingProviders(providers)
        self.run_store(ten_caption_corpus, store, providers=counters.set)
        # only chunks 1 and 3 processed: translate fwd+bwd, tokens x2, mm, qe per chunk
        assert counters.calls["translate"] == 4

    def test_crash_then_rerun_converges(self, ten_caption_corpus):
        reference_store = MemoryStore()
        self.run_store(ten_caption_corpus, reference_store)
        want = self.store_fingerprint(reference_store)

        for point in ("before_publish", "mid_publish", "after_publish"):
            store = MemoryStore()
            with pytest.raises(SimulatedCrash):
                self.run_store(ten_caption_corpus, store, faults=FaultInjector(point))
            self.run_store(ten_caption_corpus, store)
            assert self.store_fingerprint(store) == want, f"divergence after {point} crash"

    def test_crash_rerun_does_not_redo_published_work(self, ten_caption_corpus):
        store = MemoryStore()
        counters = CountingProviders(build_provider_set(mock_provider_configs()))
        with pytest.raises(SimulatedCrash):
            self.run_store(
                ten_caption_corpus,
                store,
                providers=counters.set,
                faults=FaultInjector("after_publish"),
            )
        published = len(store.list_published())
        assert published >= 1
        counters.calls = dict.fromkeys(counters.calls, 0)
        self.run_store(ten_caption_corpus, store, providers=counters.set)
        remaining = 3 - published
        assert counters.calls["translate"] == 2 * remaining

    def test_failed_chunk_reported_others_published(self, ten_caption_corpus):
        store = MemoryStore()
        base = build_provider_set(mock_provider_configs())
        failing = ProviderSet(
            translator=FailingTranslator({"first caption 3"}),  # only chunk [4,8) carries it
            text_embedder=base.text_embedder,
            multimodal_embedder=base.multimodal_embedder,
            qe_scorer=base.qe_scorer,
            refiner=base.refiner,
        )
        with pytest.raises(ChunkFailuresError) as err:
            self.run_store(ten_caption_corpus, store, providers=failing)
        assert [(r.start, r.end) for r in err.value.failed_ranges] == [(4, 8)]
        published = {(m.start, m.end) for m in store.list_published()}
        assert published == {(0, 4), (8, 10)}
        assert store.read_manifest() is None  # incomplete runs publish no manifest

        # rerun with healthy providers completes and reuses the published chunks
        counters = CountingProviders(base)
        manifest = self.run_store(ten_caption_corpus, store, providers=counters.set)
        assert counters.calls["translate"] == 2
        assert len(manifest.chunks) == 3

    def test_filesystem_store_round_trip(self, ten_caption_corpus, tmp_path):
        store = FilesystemStore(tmp_path / "store")
        manifest = self.run_store(ten_caption_corpus, store, workers=2)
        again = FilesystemStore(tmp_path / "store")
        assert manifest_from_bytes(again.read_manifest()) == manifest
        records = load_published_records(again)
        assert [r.caption_id for r in records] == [c.caption_id for c in ten_caption_corpus.captions]

    def test_manifest_rejects_gaps(self):
        from capqe.store import ChunkMeta

        meta = ChunkMeta(
            start=4, end=8, version_id="v", checksum="c", published_at="", count=4,
            mean_hybrid=0.5, flagged=0,
        )
        with pytest.raises(Exception, match="exact cover"):
            Manifest(pipeline_config_hash="h", chunks=(meta,), total_records=8)
