"""Exception types raised across the package.

Everything derives from :class:`JinetError` so callers can catch domain
failures without swallowing programming errors.  Input/validation problems
and data-dependent degeneracies get their own subclasses because the CLI
maps them to distinct exit codes.
"""


class JinetError(Exception):
    """Base class for all errors raised by this package."""


class DimensionMismatchError(JinetError):
    """Operands have incompatible shapes."""


class NotSymmetricError(JinetError):
    """A matrix required to be symmetric is not, beyond tolerance."""


class RankOutOfBoundsError(JinetError):
    """A requested rank is outside the feasible range for the input."""


class DegenerateInputError(JinetError):
    """A spectral step has no well-defined answer at the requested rank.

    Raised when the singular value that would anchor the requested component
    is numerically zero relative to the input scale.
    """


class RankDeficientError(JinetError):
    """The joint update target has rank below the requested joint rank."""


class DegenerateModelError(JinetError):
    """Signal matrices do not admit the requested three-part structure."""


class LabelRangeError(JinetError):
    """A block label falls outside 1..K."""


class ProbabilityRangeError(JinetError):
    """An edge probability falls outside [0, 1]."""


class DesignSizeError(JinetError):
    """The design size does not support the built-in orthonormal patterns."""


class InvalidDesignError(JinetError):
    """Simulation parameters produce no usable signal."""


class ZeroMatrixError(JinetError):
    """A variance denominator is numerically zero."""


class TooFewValuesError(JinetError):
    """A scree needs at least two values to place an elbow."""


class ClusterCountError(JinetError):
    """More clusters requested than points available."""


class LengthMismatchError(JinetError):
    """Two label vectors differ in length."""


class ParseError(JinetError):
    """A text input file is malformed; message carries the line number."""


class NegativeWeightError(JinetError):
    """An edge list contains a negative weight."""


class NegativeEntryError(JinetError):
    """A matrix handed to the log transform has a negative entry."""


class EmptyGraphError(JinetError):
    """An edge list contains no edges."""


class NoOverlapError(JinetError):
    """Network and covariate node sets share no identifiers."""


class ConstantColumnError(JinetError):
    """A covariate column has zero variance and cannot be standardized."""
