"""Exception taxonomy.

Three families, matching the CLI exit-code contract: numeric evaluation
failures (exit 3), model/domain errors (exit 4), and inverse-problem
precondition failures (exit 5).
"""

from __future__ import annotations


class ToolkitError(Exception):
    """Base class for every error raised by this package."""


# ---------------------------------------------------------------- numeric (3)


class NumericError(ToolkitError):
    pass


class NonConvergence(NumericError):
    """A series or iteration did not meet its tolerance within budget."""


class ContourViolation(NumericError):
    """Argument not admissible for the Hankel-path representation."""


class QuadratureFailure(NumericError):
    """Node doubling failed to stabilize the contour quadrature."""


# ----------------------------------------------------------- model/domain (4)


class ModelError(ToolkitError):
    pass


class OutOfDomain(ModelError):
    """Point outside the frequency box (or off-grid where a node is required)."""


class NonSymmetric(ModelError):
    """Matrix symbol failed the symmetry check."""


class NotDiagonalizable(ModelError):
    """No usable eigendecomposition for this symbol class."""


class InvalidTime(ModelError):
    """Evaluation time outside the admissible range."""


class SchemaError(ModelError):
    """Scenario or record file failed validation."""


class SpectrumFormatError(ModelError):
    """Spectrum/grid-values file is malformed."""


class KindMismatch(ModelError):
    """Derivative kind of the observation disagrees with the request."""


# ------------------------------------------------- inverse preconditions (5)


class InversePreconditionError(ToolkitError):
    """A hypothesis of the recovery theorems fails; carries the component index."""

    def __init__(self, message: str, component: int | None = None):
        super().__init__(message)
        self.component = component


class SingularK(InversePreconditionError):
    """Mode-projection matrix is singular or ill-conditioned at this frequency."""


class SpectralConditionViolation(InversePreconditionError):
    """|arg lambda| <= pi/2 for some eigenvalue."""


class DegenerateSignCondition(InversePreconditionError):
    """|Re lambda| equals |Im lambda| within tolerance (Riemann-Liouville case)."""


class DegenerateEigenvalues(InversePreconditionError):
    """Two eigenvalues coincide at the observation frequency."""


class RangeViolation(InversePreconditionError):
    """Target value falls outside the admissible range of the monotone map."""


class NoRoot(InversePreconditionError):
    """Bracket endpoints do not straddle the target value."""


class InconsistentData(InversePreconditionError):
    """Real part converged but the full complex residual is too large."""


class NoMonotoneTime(InversePreconditionError):
    """No observation time below the cap produced a passing certificate."""
