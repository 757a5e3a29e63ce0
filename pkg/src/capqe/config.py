"""Pipeline configuration: a single strict JSON document.

Unknown keys are rejected and all violations are reported together with
their key paths. The config hash is a digest of the canonical serialization
of the fields that determine chunk content and partitioning (qe, providers,
chunk_size); worker count, local paths and post-pipeline settings are
excluded so the same pipeline produces the same version ids on any machine
at any parallelism.
"""

from __future__ import annotations

import hashlib
import json
from dataclasses import dataclass, field
from pathlib import Path

from .errors import ConfigError
from .model import QEConfig, canonical_json
from .providers import PROVIDER_KINDS, ProviderConfig
from .refinement import ACCEPT_RULES, DEFAULT_INSTRUCTIONS, RefinementConfig

DEFAULT_CHUNK_SIZE = 1000
DEFAULT_WORKERS = 4

_TOP_KEYS = {"corpus", "store", "chunk_size", "workers", "qe", "providers", "refinement", "sample"}
_QE_KEYS = {
    "weights",
    "threshold",
    "epsilon",
    "comet_bounds",
    "bert_bounds",
    "clip_bounds",
    "component_thresholds",
}
_PROVIDER_KEYS = {
    "backend",
    "endpoint",
    "timeout",
    "max_retries",
    "seed",
    "dim",
    "qe_mean",
    "substitutions",
    "embedding_file",
    "max_in_flight",
}
_REFINEMENT_KEYS = {"max_iterations", "accept_rule", "instructions"}
_SAMPLE_KEYS = {"fraction", "seed"}
_COMPONENT_KEYS = {"comet", "bert", "clip"}


@dataclass(frozen=True)
class SampleConfig:
    fraction: float = 0.5
    seed: int = 0


@dataclass(frozen=True)
class PipelineConfig:
    corpus: str | None = None
    store: str | None = None
    chunk_size: int = DEFAULT_CHUNK_SIZE
    workers: int = DEFAULT_WORKERS
    qe: QEConfig = field(default_factory=QEConfig)
    providers: dict[str, ProviderConfig] = field(default_factory=dict)
    refinement: RefinementConfig = field(default_factory=RefinementConfig)
    sample: SampleConfig = field(default_factory=SampleConfig)
    config_hash: str = ""


def _check_unknown(data: dict, allowed: set[str], path: str, problems: list[str]) -> None:
    for key in sorted(set(data) - allowed):
        problems.append(f"{path}{key}: unknown key")


def _qe_from_dict(data: dict, problems: list[str]) -> QEConfig:
    _check_unknown(data, _QE_KEYS, "qe.", problems)
    kwargs: dict = {}
    weights = data.get("weights")
    if weights is not None:
        if not (isinstance(weights, list) and len(weights) == 3):
            problems.append(f"qe.weights: expected a list of 3 numbers, got {weights!r}")
        else:
            kwargs["w_comet"], kwargs["w_bert"], kwargs["w_clip"] = map(float, weights)
    if "threshold" in data:
        kwargs["threshold"] = float(data["threshold"])
    if "epsilon" in data:
        kwargs["epsilon"] = float(data["epsilon"])
    for name in ("comet_bounds", "bert_bounds", "clip_bounds"):
        if name in data:
            bounds = data[name]
            if not (isinstance(bounds, list) and len(bounds) == 2):
                problems.append(f"qe.{name}: expected [min, max], got {bounds!r}")
            else:
                kwargs[name] = (float(bounds[0]), float(bounds[1]))
    thresholds = data.get("component_thresholds")
    if thresholds is not None:
        _check_unknown(thresholds, _COMPONENT_KEYS, "qe.component_thresholds.", problems)
        for comp in _COMPONENT_KEYS & set(thresholds):
            kwargs[f"{comp}_threshold"] = float(thresholds[comp])
    try:
        return QEConfig(**kwargs)
    except ConfigError as exc:
        problems.extend(f"qe: {p}" for p in exc.problems)
        return QEConfig()


def _provider_from_dict(kind: str, data: dict, problems: list[str]) -> ProviderConfig:
    _check_unknown(data, _PROVIDER_KEYS, f"providers.{kind}.", problems)
    kwargs = {k: v for k, v in data.items() if k in _PROVIDER_KEYS}
    try:
        return ProviderConfig(kind=kind, **kwargs)
    except (ConfigError, TypeError) as exc:
        if isinstance(exc, ConfigError):
            problems.extend(f"providers.{kind}: {p}" for p in exc.problems)
        else:
            problems.append(f"providers.{kind}: {exc}")
        return ProviderConfig(kind=kind)


def config_from_dict(data: dict) -> PipelineConfig:
    problems: list[str] = []
    if not isinstance(data, dict):
        raise ConfigError("config root must be a JSON object")
    _check_unknown(data, _TOP_KEYS, "", problems)

    qe = _qe_from_dict(data.get("qe", {}), problems)

    provider_data = data.get("providers", {})
    _check_unknown(provider_data, set(PROVIDER_KINDS), "providers.", problems)
    providers = {
        kind: _provider_from_dict(kind, provider_data.get(kind, {}), problems)
        for kind in PROVIDER_KINDS
    }

    refinement_data = data.get("refinement", {})
    _check_unknown(refinement_data, _REFINEMENT_KEYS, "refinement.", problems)
    try:
        refinement = RefinementConfig(
            max_iterations=int(refinement_data.get("max_iterations", 3)),
            accept_rule=str(refinement_data.get("accept_rule", ACCEPT_RULES[1])),
            instructions=str(refinement_data.get("instructions", DEFAULT_INSTRUCTIONS)),
        )
    except ValueError as exc:
        problems.append(f"refinement: {exc}")
        refinement = RefinementConfig()

    sample_data = data.get("sample", {})
    _check_unknown(sample_data, _SAMPLE_KEYS, "sample.", problems)
    sample = SampleConfig(
        fraction=float(sample_data.get("fraction", 0.5)),
        seed=int(sample_data.get("seed", 0)),
    )
    if not 0.0 < sample.fraction < 1.0:
        problems.append(f"sample.fraction: {sample.fraction} outside (0,1)")

    chunk_size = int(data.get("chunk_size", DEFAULT_CHUNK_SIZE))
    if chunk_size < 1:
        problems.append(f"chunk_size: must be >= 1, got {chunk_size}")
    workers = int(data.get("workers", DEFAULT_WORKERS))
    if workers < 1:
        problems.append(f"workers: must be >= 1, got {workers}")

    if problems:
        raise ConfigError(problems)

    config = PipelineConfig(
        corpus=data.get("corpus"),
        store=data.get("store"),
        chunk_size=chunk_size,
        workers=workers,
        qe=qe,
        providers=providers,
        refinement=refinement,
        sample=sample,
    )
    object.__setattr__(config, "config_hash", compute_config_hash(config))
    return config


def compute_config_hash(config: PipelineConfig) -> str:
    """Digest of the chunk-content-determining fields, canonical and byte-defined."""
    semantic = {
        "chunk_size": config.chunk_size,
        "qe": {
            "weights": list(config.qe.weights),
            "threshold": config.qe.threshold,
            "epsilon": config.qe.epsilon,
            "comet_bounds": list(config.qe.comet_bounds),
            "bert_bounds": list(config.qe.bert_bounds),
            "clip_bounds": list(config.qe.clip_bounds),
        },
        "providers": {
            kind: {
                "backend": pc.backend,
                "endpoint": pc.endpoint,
                "seed": pc.seed,
                "dim": pc.dim,
                "qe_mean": pc.qe_mean,
                "substitutions": dict(sorted(pc.substitutions.items())),
                "embedding_file": pc.embedding_file,
            }
            for kind, pc in sorted(config.providers.items())
        },
    }
    return hashlib.sha256(canonical_json(semantic).encode("utf-8")).hexdigest()[:16]


def parse_and_validate_config(path: str | Path) -> PipelineConfig:
    """Load a config file; an empty file means all defaults."""
    text = Path(path).read_text(encoding="utf-8").strip()
    if not text:
        data: dict = {}
    else:
        try:
            data = json.loads(text)
        except json.JSONDecodeError as exc:
            raise ConfigError(f"{path}: invalid JSON: {exc}") from exc
    return config_from_dict(data)
