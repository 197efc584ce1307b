"""Exception hierarchy."""


class FreeCLTError(Exception):
    """Base class for all package errors."""


class InvalidArgumentError(FreeCLTError, ValueError):
    pass


class DegenerateMeasureError(FreeCLTError, ValueError):
    """Zero variance (Dirac) input where a non-degenerate measure is required."""


class DomainError(FreeCLTError, ValueError):
    """Evaluation point outside the open upper half-plane."""


class NoConvergenceError(FreeCLTError, RuntimeError):
    pass


class AccuracyError(FreeCLTError, RuntimeError):
    """A computed object failed its own accuracy check (mass defect, residual)."""


class SingularParameterError(FreeCLTError, ValueError):
    pass


class MomentInequalityError(FreeCLTError, ValueError):
    pass


class TruncationOrderError(FreeCLTError, ValueError):
    pass


class SingularInputError(FreeCLTError, ValueError):
    """Logarithmic functional requested at an atom."""
