"""Exception types shared across the package.

Every error raised on purpose derives from :class:`IoqfrError` so callers
(and the CLI) can separate package failures from programming mistakes.
"""
from __future__ import annotations


class IoqfrError(Exception):
    """Base class for all package-specific errors."""


class DimMismatch(IoqfrError, ValueError):
    """Operands have incompatible shapes or dimensions."""


class ConfigError(IoqfrError):
    """Malformed run configuration or command-line usage."""


class NumericalError(IoqfrError):
    """A numerical contract was violated (residual, conditioning, reality)."""


class SingularMatrix(NumericalError):
    """Linear system is singular or too ill-conditioned to trust."""


class ConvergenceFailure(NumericalError):
    """An iterative kernel (eigensolver) failed to converge."""


class NotPSD(NumericalError):
    """Matrix expected positive semidefinite has a real negative eigenvalue."""


class NotMixing(IoqfrError):
    """Generator does not relax to a unique stationary state."""


class SourceNotTraceless(IoqfrError, ValueError):
    """Resolvent source has a trace beyond tolerance."""


class DuplicateChannel(IoqfrError, ValueError):
    """Two monitored currents point at the same dissipation channel."""


class ActivityDegenerate(IoqfrError):
    """Signal-activity matrix has a vanishing diagonal entry."""


class PureDissipativeViolated(IoqfrError):
    """Signal tangents fail the purely dissipative compatibility condition."""


class NotIrreducible(IoqfrError, ValueError):
    """Classical rate graph is not strongly connected."""
