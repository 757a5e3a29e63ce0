"""Scoring mathematics for the hybrid quality-estimation ensemble.

Three component signals per caption:
  * a reference-free translation quality scalar (arrives via a provider),
  * a semantic F-score between the back-translation and the original text,
    computed by greedy token-embedding matching,
  * a relative visual grounding score comparing image/text alignment of the
    original and back-translated captions.
Components are min-max normalized to [0,1] and combined as a weighted sum.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .errors import ConfigError
from .model import QEComponentScores, QEConfig


@dataclass(frozen=True)
class EmbeddingVector:
    values: tuple[float, ...]

    def __post_init__(self) -> None:
        if not self.values:
            raise ValueError("embedding vector must be non-empty")

    @property
    def dim(self) -> int:
        return len(self.values)


@dataclass(frozen=True)
class TokenEmbeddingSequence:
    tokens: tuple[EmbeddingVector, ...]

    def __post_init__(self) -> None:
        if not self.tokens:
            raise ValueError("token sequence must be non-empty")
        dims = {t.dim for t in self.tokens}
        if len(dims) != 1:
            raise ValueError(f"mixed token dimensions {sorted(dims)}")

    @property
    def dim(self) -> int:
        return self.tokens[0].dim

    def as_matrix(self) -> np.ndarray:
        return np.asarray([t.values for t in self.tokens], dtype=np.float64)


def cosine(a: EmbeddingVector, b: EmbeddingVector) -> float:
    """Cosine similarity; rejects dimension mismatches and zero vectors."""
    if a.dim != b.dim:
        raise ValueError(f"dimension mismatch: {a.dim} vs {b.dim}")
    va = np.asarray(a.values, dtype=np.float64)
    vb = np.asarray(b.values, dtype=np.float64)
    na = float(np.linalg.norm(va))
    nb = float(np.linalg.norm(vb))
    if na == 0.0 or nb == 0.0:
        raise ValueError("cosine undefined for zero vector")
    return float(va @ vb) / (na * nb)


def clip_grounding_score(s_orig: float, s_bt: float, epsilon: float = 1e-8) -> float:
    """Relative visual grounding score in [0,1].

    min(1, 2.5 * max(s_bt, 0) * H(1, s_bt / max(s_orig, epsilon))) where H is
    the harmonic mean. Zero whenever the back-translated caption does not
    align with the image at all (s_bt <= 0); the ratio term rewards
    maintaining or improving on the original caption's alignment.
    """
    if epsilon <= 0:
        raise ValueError(f"epsilon must be > 0, got {epsilon}")
    for name, v in (("s_orig", s_orig), ("s_bt", s_bt)):
        if not -1.0 - 1e-12 <= v <= 1.0 + 1e-12:
            raise ValueError(f"{name} {v!r} outside [-1,1]")
    gain = max(s_bt, 0.0)
    if gain == 0.0:
        return 0.0
    ratio = s_bt / max(s_orig, epsilon)
    harmonic = 2.0 * ratio / (1.0 + ratio)
    return min(1.0, 2.5 * gain * harmonic)


def bt_semantic_fscore(
    candidate: TokenEmbeddingSequence, reference: TokenEmbeddingSequence
) -> tuple[float, float, float]:
    """Greedy embedding-matching (precision, recall, F1).

    Precision is the mean over candidate tokens of the best cosine against
    any reference token; recall is symmetric; F1 is their harmonic mean
    (0 when P+R is 0, so no division by zero).
    """
    if candidate.dim != reference.dim:
        raise ValueError(f"dimension mismatch: {candidate.dim} vs {reference.dim}")
    cand = candidate.as_matrix()
    ref = reference.as_matrix()
    cand_norms = np.linalg.norm(cand, axis=1)
    ref_norms = np.linalg.norm(ref, axis=1)
    if np.any(cand_norms == 0.0) or np.any(ref_norms == 0.0):
        raise ValueError("cosine undefined for zero vector")
    sims = (cand / cand_norms[:, None]) @ (ref / ref_norms[:, None]).T
    precision = float(sims.max(axis=1).mean())
    recall = float(sims.max(axis=0).mean())
    if precision + recall == 0.0:
        return precision, recall, 0.0
    f1 = 2.0 * precision * recall / (precision + recall)
    return precision, recall, f1


def normalize_component(raw: float, bounds: tuple[float, float]) -> float:
    """Clamped min-max map of ``raw`` onto [0,1]."""
    lo, hi = bounds
    if not lo < hi:
        raise ConfigError(f"degenerate normalization bounds ({lo!r}, {hi!r})")
    return min(1.0, max(0.0, (raw - lo) / (hi - lo)))


def hybrid_score(
    normalized: tuple[float, float, float], weights: tuple[float, float, float]
) -> float:
    """Weighted sum of the normalized components; weights must sum to 1."""
    if any(w < 0 for w in weights):
        raise ConfigError(f"weights must be non-negative, got {weights}")
    if abs(sum(weights) - 1.0) > 1e-12:
        raise ConfigError(f"weights sum {sum(weights)!r}, expected 1")
    total = math.fsum(c * w for c, w in zip(normalized, weights))
    return min(1.0, max(0.0, total))


def flag_low_quality(scores: QEComponentScores, config: QEConfig) -> bool:
    """True iff the hybrid score falls strictly below the threshold."""
    return scores.hybrid < config.threshold


def component_scores(
    comet_raw: float,
    bert_raw: float,
    s_orig: float,
    s_bt: float,
    config: QEConfig,
) -> QEComponentScores:
    """Assemble the full score record from the raw component signals."""
    clip_raw = clip_grounding_score(s_orig, s_bt, config.epsilon)
    normalized = (
        normalize_component(comet_raw, config.comet_bounds),
        normalize_component(bert_raw, config.bert_bounds),
        normalize_component(clip_raw, config.clip_bounds),
    )
    return QEComponentScores(
        comet_raw=comet_raw,
        bert_raw=bert_raw,
        clip_raw=clip_raw,
        s_orig=s_orig,
        s_bt=s_bt,
        normalized=normalized,
        hybrid=hybrid_score(normalized, config.weights),
    )


def component_flags(scores: QEComponentScores, config: QEConfig) -> dict[str, bool]:
    """Per-component below-threshold diagnostics (reporting only)."""
    return {
        "comet": scores.comet_raw < config.comet_threshold,
        "bert": scores.bert_raw < config.bert_threshold,
        "clip": scores.clip_raw < config.clip_threshold,
    }
