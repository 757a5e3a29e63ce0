"""Shared fixtures: corpora, mock provider sets, and an HTTP stub server."""

from __future__ import annotations

import json
import threading
from http.server import BaseHTTPRequestHandler, ThreadingHTTPServer
from pathlib import Path

import pytest

from capqe.model import CaptionRecord, Corpus, ImageEntry
from capqe.providers import ProviderConfig, build_provider_set

DATA_DIR = Path(__file__).parent / "data"


def make_corpus(rows: list[tuple[int, list[str], list[tuple[int, str]]]]) -> Corpus:
    """Build a corpus from (image_id, labels, [(caption_id, text), ...]) rows."""
    images = []
    captions = []
    for image_id, labels, caps in rows:
        images.append(
            ImageEntry(
                image_id=image_id,
                file_ref=f"img_{image_id}.jpg",
                labels=frozenset(labels),
                caption_ids=tuple(cid for cid, _ in caps),
            )
        )
        for cid, text in caps:
            captions.append(CaptionRecord(caption_id=cid, image_id=image_id, source_text=text))
    return Corpus(images=tuple(images), captions=tuple(captions))


def mock_provider_configs(seed: int = 7, qe_mean: float = 0.76, substitutions=None):
    subs = substitutions or {}
    return {
        "translator": ProviderConfig(kind="translator", seed=seed),
        "text_embedder": ProviderConfig(kind="text_embedder", seed=seed),
        "multimodal_embedder": ProviderConfig(kind="multimodal_embedder", seed=seed),
        "qe_scorer": ProviderConfig(kind="qe_scorer", seed=seed, qe_mean=qe_mean),
        "refiner": ProviderConfig(kind="refiner", seed=seed, substitutions=subs),
    }


@pytest.fixture
def mock_providers():
    return build_provider_set(mock_provider_configs())


class CountingProviders:
    """Wraps a ProviderSet counting every provider invocation."""

    def __init__(self, inner):
        from capqe.providers import ProviderSet

        self.calls = {
            "translate": 0,
            "embed_tokens": 0,
            "embed_multimodal": 0,
            "qe": 0,
            "refine": 0,
        }
        self._lock = threading.Lock()
        outer = self

        class T:
            def translate(self, texts, direction):
                with outer._lock:
                    outer.calls["translate"] += 1
                return inner.translator.translate(texts, direction)

        class E:
            def embed_text_tokens(self, texts):
                with outer._lock:
                    outer.calls["embed_tokens"] += 1
                return inner.text_embedder.embed_text_tokens(texts)

        class M:
            def embed_multimodal(self, image_refs, texts):
                with outer._lock:
                    outer.calls["embed_multimodal"] += 1
                return inner.multimodal_embedder.embed_multimodal(image_refs, texts)

        class Q:
            def qe_score(self, src, tgt):
                with outer._lock:
                    outer.calls["qe"] += 1
                return inner.qe_scorer.qe_score(src, tgt)

        class R:
            def refine(self, texts, instructions):
                with outer._lock:
                    outer.calls["refine"] += 1
                return inner.refiner.refine(texts, instructions)

        self.set = ProviderSet(
            translator=T(), text_embedder=E(), multimodal_embedder=M(), qe_scorer=Q(), refiner=R()
        )

    @property
    def total(self) -> int:
        return sum(self.calls.values())


@pytest.fixture
def two_stratum_corpus() -> Corpus:
    rows = [(i, ["A"], [(100 + i, f"a photo number {i}")]) for i in range(1, 5)]
    rows += [(i, ["B"], [(100 + i, f"a picture number {i}")]) for i in range(5, 9)]
    return make_corpus(rows)


@pytest.fixture
def multilabel_corpus_8() -> Corpus:
    from capqe.model import load_corpus

    return load_corpus(DATA_DIR / "corpus_8.records")


class _StubHandler(BaseHTTPRequestHandler):
    """Echo-style provider endpoints; behavior knobs live on the server object."""

    def do_POST(self):  # noqa: N802  (http.server API)
        length = int(self.headers.get("Content-Length", 0))
        body = json.loads(self.rfile.read(length) or b"{}")
        server = self.server

        with server.lock:
            server.request_log.append((self.path, body))
            if server.failures_remaining > 0:
                server.failures_remaining -= 1
                self.send_response(500)
                self.end_headers()
                self.wfile.write(b"injected failure")
                return

        if self.path == "/translate":
            prefix = "bt:" if body["direction"] == "tgt_to_src" else "tr:"
            out = {"outputs": [prefix + t for t in body["texts"]]}
        elif self.path == "/refine":
            table = server.refine_table
            out = {"outputs": [table.get(t, t) for t in body["texts"]]}
        elif self.path == "/qe_score":
            out = {"outputs": [0.8 for _ in body["pairs"]]}
        elif self.path == "/embed_tokens":
            out = {
                "outputs": [
                    [_stub_vector(tok) for tok in (text.split() or [""])]
                    for text in body["texts"]
                ],
                "model_tag": "stub",
            }
        elif self.path == "/embed_multimodal":
            out = {
                "image_vectors": [_stub_vector(r) for r in body["image_refs"]],
                "text_vectors": [_stub_vector(t) for t in body["texts"]],
                "model_tag": "stub",
            }
        else:
            self.send_response(404)
            self.end_headers()
            return
        payload = json.dumps(out).encode()
        self.send_response(200)
        self.send_header("Content-Type", "application/json")
        self.send_header("Content-Length", str(len(payload)))
        self.end_headers()
        self.wfile.write(payload)

    def log_message(self, *args):
        pass


def _stub_vector(key: str, dim: int = 8) -> list[float]:
    import hashlib

    digest = hashlib.sha256(key.encode()).digest()
    raw = [b - 127.5 for b in digest[:dim]]
    norm = sum(x * x for x in raw) ** 0.5
    return [x / norm for x in raw]


class StubServer:
    def __init__(self):
        self.httpd = ThreadingHTTPServer(("127.0.0.1", 0), _StubHandler)
        self.httpd.lock = threading.Lock()
        self.httpd.request_log = []
        self.httpd.failures_remaining = 0
        self.httpd.refine_table = {}
        self.thread = threading.Thread(target=self.httpd.serve_forever, daemon=True)
        self.thread.start()

    @property
    def endpoint(self) -> str:
        host, port = self.httpd.server_address
        return f"http://{host}:{port}"

    def fail_next(self, n: int) -> None:
        with self.httpd.lock:
            self.httpd.failures_remaining = n

    @property
    def request_log(self):
        return self.httpd.request_log

    def close(self):
        self.httpd.shutdown()
        self.httpd.server_close()


@pytest.fixture
def stub_server():
    server = StubServer()
    yield server
    server.close()
