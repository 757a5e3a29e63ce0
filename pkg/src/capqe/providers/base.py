"""Provider contracts: the wire-level boundary to external models.

Every provider kind is a small batch interface. Real inference services sit
behind the ``http`` backend; the ``mock`` backend is a pure function of
(inputs, seed) and is byte-identical across runs and platforms. Calls are
throttled by a per-provider in-flight cap: callers block once the cap is
reached.
"""

from __future__ import annotations

import threading
from contextlib import contextmanager
from dataclasses import dataclass, field
from enum import Enum
from typing import Protocol

from ..errors import ConfigError
from ..scoring import EmbeddingVector, TokenEmbeddingSequence

PROVIDER_KINDS = ("translator", "text_embedder", "multimodal_embedder", "qe_scorer", "refiner")
BACKENDS = ("mock", "http", "file")


class Direction(str, Enum):
    SRC_TO_TGT = "src_to_tgt"
    TGT_TO_SRC = "tgt_to_src"


@dataclass(frozen=True)
class ProviderConfig:
    kind: str
    backend: str = "mock"
    endpoint: str | None = None
    timeout: float = 30.0
    max_retries: int = 2
    seed: int = 0
    dim: int = 64
    qe_mean: float = 0.76
    substitutions: dict[str, str] = field(default_factory=dict)
    embedding_file: str | None = None
    max_in_flight: int = 8

    def __post_init__(self) -> None:
        problems = []
        if self.kind not in PROVIDER_KINDS:
            problems.append(f"unknown provider kind {self.kind!r}")
        if self.backend not in BACKENDS:
            problems.append(f"unknown backend {self.backend!r}")
        if self.backend == "http" and not self.endpoint:
            problems.append(f"{self.kind}: http backend requires an endpoint")
        if self.backend != "http" and self.endpoint:
            problems.append(f"{self.kind}: endpoint only valid with http backend")
        if self.backend == "file" and not self.embedding_file:
            problems.append(f"{self.kind}: file backend requires embedding_file")
        if self.backend == "file" and self.kind != "multimodal_embedder":
            problems.append(f"{self.kind}: file backend only supported for multimodal_embedder")
        if self.max_retries < 0:
            problems.append(f"max_retries must be >= 0, got {self.max_retries}")
        if self.max_in_flight < 1:
            problems.append(f"max_in_flight must be >= 1, got {self.max_in_flight}")
        if self.dim < 1:
            problems.append(f"dim must be >= 1, got {self.dim}")
        if problems:
            raise ConfigError(problems)


@dataclass(frozen=True)
class EmbeddingResponse:
    vectors: tuple[EmbeddingVector, ...]
    model_tag: str


class Translator(Protocol):
    def translate(self, texts: list[str], direction: Direction) -> list[str]: ...


class TextTokenEmbedder(Protocol):
    def embed_text_tokens(self, texts: list[str]) -> list[TokenEmbeddingSequence]: ...


class MultimodalEmbedder(Protocol):
    def embed_multimodal(
        self, image_refs: list[str], texts: list[str]
    ) -> tuple[list[EmbeddingVector], list[EmbeddingVector]]: ...


class QEScorer(Protocol):
    def qe_score(self, src_texts: list[str], tgt_texts: list[str]) -> list[float]: ...


class Refiner(Protocol):
    def refine(self, texts: list[str], instructions: str) -> list[str]: ...


class InFlightGate:
    """Blocking concurrency cap shared by a provider's public operations."""

    def __init__(self, cap: int):
        self._semaphore = threading.BoundedSemaphore(cap)

    @contextmanager
    def __call__(self):
        with self._semaphore:
            yield


@dataclass(frozen=True)
class ProviderSet:
    """The five provider roles the pipeline consumes."""

    translator: Translator
    text_embedder: TextTokenEmbedder
    multimodal_embedder: MultimodalEmbedder
    qe_scorer: QEScorer
    refiner: Refiner


def require_non_empty(batch: list, what: str) -> None:
    if not batch:
        raise ValueError(f"{what}: empty batch")
