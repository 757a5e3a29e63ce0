"""Pluggable providers: mock, http and file backends behind one contract."""

from __future__ import annotations

from .base import (
    BACKENDS,
    PROVIDER_KINDS,
    Direction,
    EmbeddingResponse,
    MultimodalEmbedder,
    ProviderConfig,
    ProviderSet,
    QEScorer,
    Refiner,
    TextTokenEmbedder,
    Translator,
)
from .embfile import FileMultimodalEmbedder, read_embedding_file, write_embedding_file
from .http import (
    HttpMultimodalEmbedder,
    HttpQEScorer,
    HttpRefiner,
    HttpTextTokenEmbedder,
    HttpTranslator,
)
from .mock import (
    MockMultimodalEmbedder,
    MockQEScorer,
    MockRefiner,
    MockTextTokenEmbedder,
    MockTranslator,
)

_MOCKS = {
    "translator": MockTranslator,
    "text_embedder": MockTextTokenEmbedder,
    "multimodal_embedder": MockMultimodalEmbedder,
    "qe_scorer": MockQEScorer,
    "refiner": MockRefiner,
}
_HTTP = {
    "translator": HttpTranslator,
    "text_embedder": HttpTextTokenEmbedder,
    "multimodal_embedder": HttpMultimodalEmbedder,
    "qe_scorer": HttpQEScorer,
    "refiner": HttpRefiner,
}


def build_provider(config: ProviderConfig):
    if config.backend == "mock":
        return _MOCKS[config.kind](config)
    if config.backend == "http":
        return _HTTP[config.kind](config)
    return FileMultimodalEmbedder(config)


def build_provider_set(configs: dict[str, ProviderConfig]) -> ProviderSet:
    return ProviderSet(
        translator=build_provider(configs["translator"]),
        text_embedder=build_provider(configs["text_embedder"]),
        multimodal_embedder=build_provider(configs["multimodal_embedder"]),
        qe_scorer=build_provider(configs["qe_scorer"]),
        refiner=build_provider(configs["refiner"]),
    )


__all__ = [
    "BACKENDS",
    "PROVIDER_KINDS",
    "Direction",
    "EmbeddingResponse",
    "FileMultimodalEmbedder",
    "HttpMultimodalEmbedder",
    "HttpQEScorer",
    "HttpRefiner",
    "HttpTextTokenEmbedder",
    "HttpTranslator",
    "MockMultimodalEmbedder",
    "MockQEScorer",
    "MockRefiner",
    "MockTextTokenEmbedder",
    "MockTranslator",
    "MultimodalEmbedder",
    "ProviderConfig",
    "ProviderSet",
    "QEScorer",
    "Refiner",
    "TextTokenEmbedder",
    "Translator",
    "build_provider",
    "build_provider_set",
    "read_embedding_file",
    "write_embedding_file",
]
