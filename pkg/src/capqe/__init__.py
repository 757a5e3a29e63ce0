"""capqe: fault-tolerant caption translation with hybrid multimodal QE."""

from .model import (
    CaptionRecord,
    CaptionStatus,
    Corpus,
    ImageEntry,
    QEComponentScores,
    QEConfig,
    load_corpus,
    validate_status_transition,
)

__version__ = "0.1.0"

__all__ = [
    "CaptionRecord",
    "CaptionStatus",
    "Corpus",
    "ImageEntry",
    "QEComponentScores",
    "QEConfig",
    "load_corpus",
    "validate_status_transition",
    "__version__",
]
