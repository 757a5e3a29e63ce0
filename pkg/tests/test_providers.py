"""Provider contracts: mock determinism, wire protocol, retries, backpressure."""

from __future__ import annotations

import threading
import time

import pytest

from capqe.errors import ConfigError, ProviderError, TransportError
from capqe.providers import (
    Direction,
    FileMultimodalEmbedder,
    HttpQEScorer,
    HttpRefiner,
    HttpTranslator,
    MockMultimodalEmbedder,
    MockQEScorer,
    MockRefiner,
    MockTextTokenEmbedder,
    MockTranslator,
    ProviderConfig,
    read_embedding_file,
    write_embedding_file,
)
from capqe.scoring import bt_semantic_fscore, cosine


def cfg(kind, **kwargs) -> ProviderConfig:
    return ProviderConfig(kind=kind, **kwargs)


class TestProviderConfig:
    def test_http_requires_endpoint(self):
        with pytest.raises(ConfigError, match="endpoint"):
            cfg("translator", backend="http")

    def test_endpoint_only_for_http(self):
        with pytest.raises(ConfigError):
            cfg("translator", backend="mock", endpoint="http://x")

    def test_unknown_kind(self):
        with pytest.raises(ConfigError, match="kind"):
            cfg("frobnicator")


class TestMockTranslator:
    def test_round_trip_is_identity(self):
        translator = MockTranslator(cfg("translator"))
        texts = ["a cat on a mat", "two dogs", ""]
        forward = translator.translate(texts, Direction.SRC_TO_TGT)
        assert forward != texts[:2] + [""]
        back = translator.translate(forward, Direction.TGT_TO_SRC)
        assert back == texts

    def test_empty_batch_rejected(self):
        translator = MockTranslator(cfg("translator"))
        with pytest.raises(ValueError, match="empty batch"):
            translator.translate([], Direction.SRC_TO_TGT)

    def test_order_preserved(self):
        translator = MockTranslator(cfg("translator"))
        texts = [f"sentence {i}" for i in range(20)]
        out = translator.translate(texts, Direction.SRC_TO_TGT)
        assert [translator.translate([t], Direction.TGT_TO_SRC)[0] for t in out] == texts


class TestMockEmbedders:
    def test_same_token_same_vector(self):
        embedder = MockTextTokenEmbedder(cfg("text_embedder", seed=3))
        a, b = embedder.embed_text_tokens(["cat cat"])[0].tokens
        assert a == b

    def test_fscore_with_itself_is_one(self):
        embedder = MockTextTokenEmbedder(cfg("text_embedder"))
        seq = embedder.embed_text_tokens(["a cat sat on the mat"])[0]
        _, _, f1 = bt_semantic_fscore(seq, seq)
        assert f1 == pytest.approx(1.0, abs=1e-12)

    def test_unrelated_texts_score_below_one(self):
        embedder = MockTextTokenEmbedder(cfg("text_embedder"))
        a, b = embedder.embed_text_tokens(["a cat on a mat", "quantum flux capacitor array"])
        _, _, f1 = bt_semantic_fscore(a, b)
        assert f1 < 0.99

    def test_deterministic_across_instances(self):
        one = MockTextTokenEmbedder(cfg("text_embedder", seed=11))
        two = MockTextTokenEmbedder(cfg("text_embedder", seed=11))
        assert one.embed_text_tokens(["hello world"]) == two.embed_text_tokens(["hello world"])
        other_seed = MockTextTokenEmbedder(cfg("text_embedder", seed=12))
        assert one.embed_text_tokens(["hello"]) != other_seed.embed_text_tokens(["hello"])

    def test_multimodal_equal_strings_align(self):
        embedder = MockMultimodalEmbedder(cfg("multimodal_embedder"))
        images, texts = embedder.embed_multimodal(["same-key"], ["same-key", "other"])
        assert cosine(images[0], texts[0]) == pytest.approx(1.0, abs=1e-9)
        assert cosine(images[0], texts[1]) < 0.9

    def test_multimodal_unit_norm(self):
        embedder = MockMultimodalEmbedder(cfg("multimodal_embedder"))
        images, texts = embedder.embed_multimodal(["x.jpg", "y.jpg"], ["a cat"])
        for vector in images + texts:
            norm = sum(v * v for v in vector.values) ** 0.5
            assert norm == pytest.approx(1.0, abs=1e-6)


class TestMockQEScorer:
    def test_mean_calibration_over_10k_pairs(self):
        scorer = MockQEScorer(cfg("qe_scorer", qe_mean=0.76))
        sources = [f"source sentence number {i}" for i in range(10_000)]
        targets = [f"target sentence number {i}" for i in range(10_000)]
        values = scorer.qe_score(sources, targets)
        assert all(0.0 <= v <= 1.0 for v in values)
        mean = sum(values) / len(values)
        assert mean == pytest.approx(0.76, abs=0.01)

    def test_length_mismatch(self):
        scorer = MockQEScorer(cfg("qe_scorer"))
        with pytest.raises(ValueError, match="source"):
            scorer.qe_score(["a"], ["b", "c"])

    def test_determinism(self):
        scorer = MockQEScorer(cfg("qe_scorer", seed=5))
        args = (["a cat"], ["une chatte"])
        assert scorer.qe_score(*args) == scorer.qe_score(*args)


class TestMockRefiner:
    def test_empty_table_is_identity(self):
        refiner = MockRefiner(cfg("refiner"))
        texts = ["leave me alone", "me too"]
        assert refiner.refine(texts, "anything") == texts

    def test_substitution(self):
        refiner = MockRefiner(cfg("refiner", substitutions={"bad_tok": "good_tok"}))
        assert refiner.refine(["a bad_tok here"], "") == ["a good_tok here"]


class TestHttpProviders:
    def test_batch_order_preserved(self, stub_server):
        translator = HttpTranslator(cfg("translator", backend="http", endpoint=stub_server.endpoint))
        out = translator.translate(["one", "two", "three"], Direction.SRC_TO_TGT)
        assert out == ["tr:one", "tr:two", "tr:three"]

    def test_direction_forwarded(self, stub_server):
        translator = HttpTranslator(cfg("translator", backend="http", endpoint=stub_server.endpoint))
        assert translator.translate(["x"], Direction.TGT_TO_SRC) == ["bt:x"]

    def test_retry_then_success_equals_immediate(self, stub_server):
        config = cfg("qe_scorer", backend="http", endpoint=stub_server.endpoint, max_retries=3)
        scorer = HttpQEScorer(config)
        clean = scorer.qe_score(["a"], ["b"])
        stub_server.fail_next(2)
        assert scorer.qe_score(["a"], ["b"]) == clean

    def test_retries_exhausted_raises_provider_error(self, stub_server):
        config = cfg("refiner", backend="http", endpoint=stub_server.endpoint, max_retries=1)
        refiner = HttpRefiner(config)
        stub_server.fail_next(5)
        with pytest.raises(TransportError, match="after 2 attempts"):
            refiner.refine(["x"], "")

    def test_unreachable_endpoint(self):
        config = cfg(
            "translator", backend="http", endpoint="http://127.0.0.1:1", max_retries=0, timeout=0.2
        )
        with pytest.raises(TransportError):
            HttpTranslator(config).translate(["x"], Direction.SRC_TO_TGT)


class TestEmbeddingFile:
    def test_round_trip_bit_exact(self, tmp_path):
        import numpy as np

        path = tmp_path / "vectors.emb"
        entries = {
            "img_1.jpg": tuple(float(np.float32(x)) for x in (0.125, -0.5, 0.75, 1.0)),
            "a cat": tuple(float(np.float32(x)) for x in (0.1, 0.2, 0.3, 0.4)),
        }
        write_embedding_file(path, 4, entries)
        dim, loaded = read_embedding_file(path)
        assert dim == 4
        # float32 values survive the file format exactly
        assert {k: tuple(np.float32(x) for x in v) for k, v in loaded.items()} == {
            k: tuple(np.float32(x) for x in v) for k, v in entries.items()
        }

    def test_file_backend_serves_lookups(self, tmp_path):
        path = tmp_path / "vectors.emb"
        write_embedding_file(path, 2, {"img": (1.0, 0.0), "text": (0.0, 1.0)})
        embedder = FileMultimodalEmbedder(
            cfg("multimodal_embedder", backend="file", embedding_file=str(path))
        )
        images, texts = embedder.embed_multimodal(["img"], ["text"])
        assert images[0].values == (1.0, 0.0)
        assert texts[0].values == (0.0, 1.0)
        with pytest.raises(ProviderError, match="no embedding"):
            embedder.embed_multimodal(["missing"], ["text"])


class TestBackpressure:
    def test_in_flight_cap_blocks_excess_callers(self):
        class SlowRefiner(MockRefiner):
            active = 0
            peak = 0
            lock = threading.Lock()

            def refine(self, texts, instructions):
                with self._gate():
                    with SlowRefiner.lock:
                        SlowRefiner.active += 1
                        SlowRefiner.peak = max(SlowRefiner.peak, SlowRefiner.active)
                    time.sleep(0.02)
                    with SlowRefiner.lock:
                        SlowRefiner.active -= 1
                    return list(texts)

        refiner = SlowRefiner(cfg("refiner", max_in_flight=2))
        threads = [
            threading.Thread(target=refiner.refine, args=(["x"], "")) for _ in range(8)
        ]
        for t in threads:
            t.start()
        for t in threads:
            t.join()
        assert SlowRefiner.peak <= 2
