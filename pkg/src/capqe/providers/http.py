"""HTTP provider clients.

Wire protocol (POST, JSON bodies):
  /translate        {"texts": [...], "direction": "src_to_tgt"|"tgt_to_src"}
                    -> {"outputs": [str, ...]}
  /embed_tokens     {"texts": [...]}
                    -> {"outputs": [[[float,...],...], ...], "model_tag": str}
  /embed_multimodal {"image_refs": [...], "texts": [...]}
                    -> {"image_vectors": [[float,...],...],
                        "text_vectors": [[float,...],...], "model_tag": str}
  /qe_score         {"pairs": [{"source": str, "target": str}, ...]}
                    -> {"outputs": [float, ...]}
  /refine           {"texts": [...], "instructions": str}
                    -> {"outputs": [str, ...]}

Transport failures and 5xx responses are retried up to ``max_retries``
times; requests are idempotent, so a retry that eventually succeeds is
indistinguishable from immediate success. 4xx responses are not retried.
"""

from __future__ import annotations

import httpx

from ..errors import ProviderError, TransportError
from ..scoring import EmbeddingVector, TokenEmbeddingSequence
from .base import Direction, InFlightGate, ProviderConfig, require_non_empty


class _HttpClient:
    def __init__(self, config: ProviderConfig, transport: httpx.BaseTransport | None = None):
        self._config = config
        self._gate = InFlightGate(config.max_in_flight)
        self._client = httpx.Client(
            base_url=config.endpoint or "",
            timeout=config.timeout,
            transport=transport,
        )

    def post(self, path: str, payload: dict) -> dict:
        last_error: Exception | None = None
        with self._gate():
            for _ in range(self._config.max_retries + 1):
                try:
                    response = self._client.post(path, json=payload)
                except httpx.HTTPError as exc:
                    last_error = exc
                    continue
                if response.status_code >= 500:
                    last_error = TransportError(
                        f"{self._config.kind} {path}: server error {response.status_code}"
                    )
                    continue
                if response.status_code >= 400:
                    raise ProviderError(
                        f"{self._config.kind} {path}: rejected with {response.status_code}: "
                        f"{response.text[:200]}"
                    )
                return response.json()
        raise TransportError(
            f"{self._config.kind} {path}: failed after {self._config.max_retries + 1} attempts: "
            f"{last_error}"
        )

    def close(self) -> None:
        self._client.close()


def _check_count(outputs: list, expected: int, what: str) -> None:
    if len(outputs) != expected:
        raise ProviderError(f"{what}: expected {expected} outputs, got {len(outputs)}")


class HttpTranslator(_HttpClient):
    def translate(self, texts: list[str], direction: Direction) -> list[str]:
        require_non_empty(texts, "translate")
        data = self.post("/translate", {"texts": texts, "direction": direction.value})
        outputs = [str(t) for t in data["outputs"]]
        _check_count(outputs, len(texts), "translate")
        return outputs


class HttpTextTokenEmbedder(_HttpClient):
    def embed_text_tokens(self, texts: list[str]) -> list[TokenEmbeddingSequence]:
        require_non_empty(texts, "embed_text_tokens")
        data = self.post("/embed_tokens", {"texts": texts})
        outputs = data["outputs"]
        _check_count(outputs, len(texts), "embed_text_tokens")
        return [
            TokenEmbeddingSequence(
                tokens=tuple(EmbeddingVector(values=tuple(float(x) for x in vec)) for vec in seq)
            )
            for seq in outputs
        ]


class HttpMultimodalEmbedder(_HttpClient):
    def embed_multimodal(
        self, image_refs: list[str], texts: list[str]
    ) -> tuple[list[EmbeddingVector], list[EmbeddingVector]]:
        require_non_empty(image_refs, "embed_multimodal")
        require_non_empty(texts, "embed_multimodal")
        data = self.post("/embed_multimodal", {"image_refs": image_refs, "texts": texts})
        images = [
            EmbeddingVector(values=tuple(float(x) for x in vec)) for vec in data["image_vectors"]
        ]
        sentences = [
            EmbeddingVector(values=tuple(float(x) for x in vec)) for vec in data["text_vectors"]
        ]
        _check_count(images, len(image_refs), "embed_multimodal images")
        _check_count(sentences, len(texts), "embed_multimodal texts")
        return images, sentences


class HttpQEScorer(_HttpClient):
    def qe_score(self, src_texts: list[str], tgt_texts: list[str]) -> list[float]:
        require_non_empty(src_texts, "qe_score")
        if len(src_texts) != len(tgt_texts):
            raise ValueError(
                f"qe_score: {len(src_texts)} source vs {len(tgt_texts)} target texts"
            )
        pairs = [{"source": s, "target": t} for s, t in zip(src_texts, tgt_texts)]
        data = self.post("/qe_score", {"pairs": pairs})
        outputs = [float(x) for x in data["outputs"]]
        _check_count(outputs, len(src_texts), "qe_score")
        return outputs


class HttpRefiner(_HttpClient):
    def refine(self, texts: list[str], instructions: str) -> list[str]:
        require_non_empty(texts, "refine")
        data = self.post("/refine", {"texts": texts, "instructions": instructions})
        outputs = [str(t) for t in data["outputs"]]
        _check_count(outputs, len(texts), "refine")
        return outputs
