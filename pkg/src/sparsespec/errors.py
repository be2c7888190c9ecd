"""Exception taxonomy shared across the package."""


class SparseSpecError(Exception):
    """Base class for all package-specific errors."""


class InvalidParameter(SparseSpecError, ValueError):
    """A parameter is outside its documented domain."""


class DimensionMismatch(SparseSpecError, ValueError):
    """Two matrix-shaped inputs do not agree in size."""


class UnsupportedCumulantOrder(SparseSpecError, ValueError):
    """Requested cumulant order is not available in closed form."""


class EmptyInput(SparseSpecError, ValueError):
    """An input collection that must be nonempty is empty."""


class NoUpperRoot(SparseSpecError, ArithmeticError):
    """No root of the law polynomial lies in the upper half-plane disk.

    Signals a spectral parameter outside the validity domain.
    """


class AmbiguousRoot(SparseSpecError, ArithmeticError):
    """More than one admissible root in strict mode.

    Signals a quartic coefficient too large for the strict uniqueness
    guarantee.
    """


class BracketFailure(SparseSpecError, ArithmeticError):
    """The edge stationary-point bracket does not change sign."""


class QuadratureError(SparseSpecError, ArithmeticError):
    """Adaptive quadrature did not converge within its subdivision budget."""


class SolverFailure(SparseSpecError, ArithmeticError):
    """The dense symmetric eigensolver failed to converge."""


class SizeLimitExceeded(SparseSpecError, ValueError):
    """Matrix too large for a full Green-matrix computation."""


class MissingVectors(SparseSpecError, ValueError):
    """Operation requires eigenvectors but the sample holds none."""


class SampleFailure(SparseSpecError, RuntimeError):
    """A Monte Carlo sample failed; carries the sample index."""

    def __init__(self, sample_index, message):
        super().__init__(f"sample {sample_index}: {message}")
        self.sample_index = sample_index


class ParseError(SparseSpecError, ValueError):
    """Malformed graph input; carries the offending line number."""

    def __init__(self, message, line_number=None):
        super().__init__(message)
        self.line_number = line_number


class DegenerateEdgeDensity(SparseSpecError, ValueError):
    """Estimated edge density of an ingested graph is 0 or >= 1."""


class EmptyGraph(SparseSpecError, ValueError):
    """Ingested graph contains no usable edges."""


class RootSelectionWarning(UserWarning):
    """Permissive root selection was used outside the uniqueness regime."""


class RegimeWarning(UserWarning):
    """Parameters are outside the regime backing the statistical guarantee."""
