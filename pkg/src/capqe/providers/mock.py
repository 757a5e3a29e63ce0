"""Deterministic mock providers.

Every output is a pure function of (inputs, seed): token and sentence
vectors are seeded from SHA-256 digests, so they are identical across
processes, platforms and runs. The mock translator tags each token
reversibly, which makes translate -> back-translate the identity and lets
tests reason about round trips exactly.
"""

from __future__ import annotations

import hashlib

import numpy as np

from ..scoring import EmbeddingVector, TokenEmbeddingSequence
from .base import Direction, InFlightGate, ProviderConfig, require_non_empty

TAG_OPEN = "«"   # «
TAG_CLOSE = "»"  # »


def _digest_seed(namespace: str, seed: int, key: str) -> int:
    digest = hashlib.sha256(f"{namespace}:{seed}:{key}".encode("utf-8")).digest()
    return int.from_bytes(digest[:8], "little")


def _unit_vector(namespace: str, seed: int, key: str, dim: int) -> EmbeddingVector:
    rng = np.random.Generator(np.random.PCG64(_digest_seed(namespace, seed, key)))
    v = rng.standard_normal(dim)
    v /= np.linalg.norm(v)
    return EmbeddingVector(values=tuple(float(x) for x in v))


def _tokens(text: str) -> list[str]:
    # Empty text still embeds: a single empty-string token keeps sequences non-empty.
    return text.split() or [""]


class MockTranslator:
    def __init__(self, config: ProviderConfig):
        self._gate = InFlightGate(config.max_in_flight)

    def translate(self, texts: list[str], direction: Direction) -> list[str]:
        require_non_empty(texts, "translate")
        with self._gate():
            if direction is Direction.SRC_TO_TGT:
                return [self._tag(t) for t in texts]
            return [self._untag(t) for t in texts]

    @staticmethod
    def _tag(text: str) -> str:
        return " ".join(f"{TAG_OPEN}{tok}{TAG_CLOSE}" for tok in text.split())

    @staticmethod
    def _untag(text: str) -> str:
        out = []
        for tok in text.split():
            if tok.startswith(TAG_OPEN) and tok.endswith(TAG_CLOSE):
                tok = tok[1:-1]
            out.append(tok)
        return " ".join(out)


class MockTextTokenEmbedder:
    def __init__(self, config: ProviderConfig):
        self._seed = config.seed
        self._dim = config.dim
        self._gate = InFlightGate(config.max_in_flight)

    def embed_text_tokens(self, texts: list[str]) -> list[TokenEmbeddingSequence]:
        require_non_empty(texts, "embed_text_tokens")
        with self._gate():
            return [
                TokenEmbeddingSequence(
                    tokens=tuple(
                        _unit_vector("tok", self._seed, tok, self._dim) for tok in _tokens(text)
                    )
                )
                for text in texts
            ]


class MockMultimodalEmbedder:
    """Maps equal strings to equal unit vectors, for images and texts alike."""

    def __init__(self, config: ProviderConfig):
        self._seed = config.seed
        self._dim = config.dim
        self._gate = InFlightGate(config.max_in_flight)

    def embed_multimodal(
        self, image_refs: list[str], texts: list[str]
    ) -> tuple[list[EmbeddingVector], list[EmbeddingVector]]:
        require_non_empty(image_refs, "embed_multimodal")
        require_non_empty(texts, "embed_multimodal")
        with self._gate():
            images = [_unit_vector("mm", self._seed, ref, self._dim) for ref in image_refs]
            sentences = [_unit_vector("mm", self._seed, text, self._dim) for text in texts]
            return images, sentences


class MockQEScorer:
    """Seeded per-pair scores uniform in [mean-0.1, mean+0.1], clamped to [0,1]."""

    def __init__(self, config: ProviderConfig):
        self._seed = config.seed
        self._mean = config.qe_mean
        self._gate = InFlightGate(config.max_in_flight)

    def qe_score(self, src_texts: list[str], tgt_texts: list[str]) -> list[float]:
        require_non_empty(src_texts, "qe_score")
        if len(src_texts) != len(tgt_texts):
            raise ValueError(
                f"qe_score: {len(src_texts)} source vs {len(tgt_texts)} target texts"
            )
        with self._gate():
            out = []
            for src, tgt in zip(src_texts, tgt_texts):
                u = _digest_seed("qe", self._seed, f"{src}\x1f{tgt}") / 2**64
                out.append(min(1.0, max(0.0, self._mean + (u - 0.5) * 0.2)))
            return out


class MockRefiner:
    """Whitespace-token substitution; the empty table is the identity."""

    def __init__(self, config: ProviderConfig):
        self._table = dict(config.substitutions)
        self._gate = InFlightGate(config.max_in_flight)

    def refine(self, texts: list[str], instructions: str) -> list[str]:
        require_non_empty(texts, "refine")
        with self._gate():
            return [
                " ".join(self._table.get(tok, tok) for tok in text.split()) for text in texts
            ]
