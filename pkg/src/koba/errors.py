"""Exception hierarchy shared by all koba modules."""

from __future__ import annotations


class KobaError(Exception):
    """Base class for all library-specific errors."""


class EvaluationDomainError(KobaError, ValueError):
    """An argument lies outside the mathematical domain of an operation."""


class InvalidModulusError(KobaError, ValueError):
    """A modulus of continuity violates its structural invariants."""


class RangeError(KobaError, ValueError):
    """A requested value lies outside the attainable range of a transform."""


class ToleranceNotMetError(KobaError):
    """A refinement loop stalled before reaching the requested tolerance.

    Carries the best bracket obtained so far in ``best``.
    """

    def __init__(self, message, best=None):
        super().__init__(message)
        self.best = best


class IllConditionedBoundaryError(KobaError):
    """Boundary queries are unreliable at this point (degenerate gradient)."""


class ConditioningError(KobaError):
    """Inputs are too close to the boundary for reliable bracketing."""


class EmbeddingViolationError(KobaError):
    """The planar model does not embed: the defining function turned
    nonnegative at the listed grid points."""

    def __init__(self, message, points=()):
        super().__init__(message)
        self.points = tuple(points)


class CertificateFailureError(KobaError):
    """No admissible parameters found; ``diagnostics`` holds the search trace."""

    def __init__(self, message, diagnostics=None):
        super().__init__(message)
        self.diagnostics = diagnostics


class DegenerateDefiningFunctionError(KobaError):
    """The sampled gradient lower bound of the defining function is ~0."""


class RayEscapeError(KobaError):
    """A normal-ray point left the domain (scale not certified)."""


class MapRangeError(KobaError):
    """A probed map sent a sample outside its stated target domain."""


class SequenceSpecError(KobaError, ValueError):
    """A point sequence does not converge to its stated boundary point."""


class ConfigError(KobaError, ValueError):
    """Invalid experiment configuration (unknown key, bad literal, ...)."""
