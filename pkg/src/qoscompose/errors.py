"""Exception types shared across the engine.

Every error raised by the engine derives from ``EngineError``.  The pipeline
attaches the failing stage name to ``EngineError.stage`` when it propagates an
error, so callers (notably the CLI) can report where things went wrong.
"""

from __future__ import annotations


class EngineError(Exception):
    """Base class for all engine errors."""

    stage: str | None = None


# -- QoS scaling -------------------------------------------------------------

class EmptyCandidateSet(EngineError):
    """No candidate services were supplied where at least one is required."""


class SchemaMismatch(EngineError):
    """Attribute sets disagree between two inputs that must share a schema."""


class OutOfRangeValue(EngineError):
    """A raw QoS value falls outside the extremes it is scaled against."""


# -- Associative classification ----------------------------------------------

class ValueOutOfRange(EngineError):
    """A value handed to the discretizer lies outside [0, 1]."""


class EmptyTrainingSet(EngineError):
    """Rule mining or classifier construction received no training instances."""


# -- Leveling ------------------------------------------------------------------

class LevelOutOfRange(EngineError):
    """A QoS level index lies outside the configured scheme."""


class DegenerateRequest(EngineError):
    """A requested attribute range normalizes to an empty interval."""


# -- Ontology matching ---------------------------------------------------------

class UnknownConcept(EngineError):
    """A concept identifier is not declared in the taxonomy."""


class InconsistentTaxonomy(EngineError):
    """Declared axioms contradict each other (e.g. a subsumed pair marked disjoint)."""


class DisjointMatch(EngineError):
    """An output/input concept pair is incompatible; the link is inadmissible."""


class NoSharedParameters(EngineError):
    """Two services expose no parameter pairs to connect."""


# -- Composition ----------------------------------------------------------------

class CycleDetected(EngineError):
    """A graph that must be acyclic (plan or taxonomy) contains a cycle."""


class UnknownTask(EngineError):
    """A task identifier is not declared in the composition plan."""


class NoEligibleCandidate(EngineError):
    """A task has no candidate service passing the eligibility threshold."""

    def __init__(self, task: str):
        super().__init__(f"task {task!r} has no eligible candidate service")
        self.task = task


class NoAdmissibleLink(EngineError):
    """Every eligible candidate of a task is disjoint-linked from the selection upstream."""

    def __init__(self, task: str):
        super().__init__(f"no admissible semantic link into any candidate of task {task!r}")
        self.task = task


class NoAlternative(EngineError):
    """No alternative composite differing in one selection exists."""


class NotSelectedService(EngineError):
    """The service reported as failed is not the composite's selection at that task."""


class NoReplacementCandidate(EngineError):
    """After a failure, the task's queue holds no admissible replacement."""

    def __init__(self, task: str):
        super().__init__(f"no replacement candidate left for task {task!r}")
        self.task = task


# -- File formats -----------------------------------------------------------------

class ParseError(EngineError):
    """A data file is malformed; carries the offending line number when known."""

    def __init__(self, message: str, line: int | None = None):
        if line is not None:
            message = f"line {line}: {message}"
        super().__init__(message)
        self.line = line


class EmptyRegistry(EngineError):
    """The registry file declares a schema but contains no service records."""


class UnknownAttribute(EngineError):
    """A QoS attribute name is not part of the registry schema."""


class NonFiniteValue(EngineError):
    """A QoS value is NaN or infinite."""
