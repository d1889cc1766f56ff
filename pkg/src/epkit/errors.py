"""Exception hierarchy.

The CLI maps each family onto a stable exit code:
input/validation -> 2, numerical failure -> 3, assumption violation -> 4.
"""


class EpkitError(Exception):
    """Base class for all epkit errors."""

    exit_code = 1


class InvalidArgumentError(EpkitError, ValueError):
    exit_code = 2


class CapacityError(InvalidArgumentError):
    """Requested object would exceed a configured size cap."""


class MatrixFileError(InvalidArgumentError):
    """A matrix or config file could not be parsed or failed validation."""


class NumericalFailure(EpkitError, ArithmeticError):
    exit_code = 3


class NotNilpotentError(NumericalFailure):
    """No power of the operator vanished to tolerance."""


class InconsistentRankError(NumericalFailure):
    """Rank sequence of nilpotent powers was not a valid Weyr characteristic."""


class IllSeparatedSpectrumError(NumericalFailure):
    """Eigenvalue clusters are too close to split into spectral projectors."""


class SingularEvaluationError(NumericalFailure):
    """Resolvent evaluated on top of a pole."""


class TrackingFailure(NumericalFailure):
    """No perturbed eigenvalue could be attributed to the tracked cluster."""


class EPAlignedError(NumericalFailure):
    """Growth fit was flat: the probe state already lies on the EP eigenvector."""


class AssumptionViolation(EpkitError):
    exit_code = 4


class DegeneracyError(AssumptionViolation, ValueError):
    """A subsystem spectrum was not fully degenerate."""


class UnsupportedInputError(AssumptionViolation, ValueError):
    """Input lies outside the class of systems the formulas cover (e.g. no EP)."""
