"""Exception types shared across the package."""


class AsqgError(Exception):
    """Base class for all package errors."""


class NonzeroMean(AsqgError, ValueError):
    """A zero-mean field was required but the (0, 0) coefficient is not negligible."""


class NonzeroMeanWithSingularSymbol(NonzeroMean):
    """A multiplier singular at k = 0 was applied to a field with nonzero mean."""


class NonConvergence(AsqgError, ArithmeticError):
    """A quadrature or iterative refinement failed to reach its tolerance."""


class InvalidGeometry(AsqgError, ValueError):
    """Radial profile parameters describe an impossible shape."""


class SingularSystem(AsqgError, ArithmeticError):
    """The linear system for the base-flow coefficients is singular."""


class TargetMiss(AsqgError, ArithmeticError):
    """A constructed profile failed its verification measurement."""


class UnderResolved(AsqgError, ValueError):
    """The grid cannot represent the requested oscillation."""


class DegenerateFit(AsqgError, ArithmeticError):
    """A log-log rate fit has too few points or too poor a fit quality."""


class InvalidRegime(AsqgError, ValueError):
    """Parameters fall outside the admissible range."""


class NoAdmissibleK(AsqgError, ArithmeticError):
    """No phase offset in the search ladder satisfies the damping condition."""


class VelocityBlowup(AsqgError, FloatingPointError):
    """The velocity field is not finite."""


class NaNDetected(AsqgError, FloatingPointError):
    """The solver state contains NaN or infinite values."""


class CheckpointIOFailure(AsqgError, OSError):
    """A checkpoint could not be written or read."""


class BoxTooSmall(AsqgError, ValueError):
    """Translated copies do not fit in the periodic box."""


class ConfigError(AsqgError, ValueError):
    """An experiment configuration is invalid."""


class IOFailure(AsqgError, OSError):
    """A report could not be written."""
