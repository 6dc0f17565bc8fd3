"""Exception hierarchy.

The CLI maps these onto process exit codes: parameter problems exit with 2,
numerical failures with 3 and resource/budget problems with 4.
"""


class ParameterError(ValueError):
    """A physical or numerical parameter violates its documented constraint."""


class UnsupportedParameterError(ParameterError):
    """Parameters are valid but outside what an operation is defined for."""


class NumericalError(RuntimeError):
    """A numerical routine failed to deliver a trustworthy result."""


class EigenConvergenceError(NumericalError):
    def __init__(self, message, partial=None):
        super().__init__(message)
        self.partial = list(partial or [])


class StiffnessError(NumericalError):
    """Adaptive step size fell below the allowed minimum."""


class AccuracyError(NumericalError):
    """A monitored invariant drifted beyond its tolerance."""


class ResourceError(RuntimeError):
    """A requested computation exceeds the configured size budget."""


class TruncationWarning(UserWarning):
    """The photon cutoff is populated above the accepted level."""
