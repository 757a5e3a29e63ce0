"""Exception hierarchy shared across the pipeline."""

from __future__ import annotations


class CapqeError(Exception):
    """Base class for all package errors."""


class CorpusFormatError(CapqeError):
    """A corpus or record file could not be parsed; message carries the line locus."""


class CorpusIntegrityError(CapqeError):
    """Referential invariants of a corpus are violated (duplicate or dangling ids)."""


class InvalidTransitionError(CapqeError):
    """A caption status change is not an edge of the lifecycle graph."""


class ConfigError(CapqeError):
    """Invalid configuration; ``problems`` lists every violation found."""

    def __init__(self, problems: list[str] | str):
        if isinstance(problems, str):
            problems = [problems]
        self.problems = problems
        super().__init__("; ".join(problems))


class AlignmentError(CapqeError):
    """Hypothesis and reference inputs have different segment counts."""


class ProviderError(CapqeError):
    """An external provider call failed permanently (retries exhausted)."""


class TransportError(ProviderError):
    """A transient transport-level failure; eligible for retry."""


class StoreError(CapqeError):
    """A versioned-store operation failed."""


class IntegrityError(StoreError):
    """Stored or about-to-be-stored chunk content does not match its checksum."""


class ChunkFailuresError(CapqeError):
    """One or more chunks failed; carries the ranges to retrigger."""

    def __init__(self, failed_ranges: list, causes: list[str]):
        self.failed_ranges = failed_ranges
        self.causes = causes
        ranges = ", ".join(f"[{r.start},{r.end})" for r in failed_ranges)
        super().__init__(f"{len(failed_ranges)} chunk(s) failed: {ranges}")


class UnknownCaptionError(CapqeError):
    """No caption with the requested id exists."""


class RevisionConflictError(CapqeError):
    """Optimistic-lock failure: the stored revision moved past the expected one."""


class InvalidStateError(CapqeError):
    """The caption is not in a status that permits the requested operation."""
