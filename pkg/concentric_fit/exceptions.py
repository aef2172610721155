"""
Exception hierarchy for concentric ellipse fitting

Every error carries the process exit code the CLI maps it to.
"""


class ConcentricFitError(Exception):
    """Base class for all library errors"""

    exit_code = 1


class GeometryError(ConcentricFitError):
    """Invalid geometric or algebraic parameters"""

    exit_code = 2


class NotAnEllipse(GeometryError):
    """Conic coefficients do not describe a real ellipse"""


class NotConcentricEllipses(GeometryError):
    """A parameter vector fails the concentric-ellipse test for some ring"""


class NotProportional(GeometryError):
    """Ring axes do not share a common scale ratio"""


class NotNested(GeometryError):
    """Rings are not strictly nested in caller order"""


class DataError(ConcentricFitError):
    """Problems with the observed point data"""

    exit_code = 2


class EmptyRing(DataError):
    """A ring carries no points"""


class InsufficientPoints(DataError):
    """Fewer points than parameters to determine"""


class PointFileError(DataError):
    """Malformed point CSV"""


class NumericalFailure(ConcentricFitError):
    """Linear algebra failed to produce a usable eigenpair"""

    exit_code = 3


class DegenerateConstraint(ConcentricFitError):
    """theta^T N theta vanishes at the true parameters"""

    exit_code = 3


class AllRunsFailed(ConcentricFitError):
    """No Monte Carlo run returned a valid fit for a method"""

    exit_code = 3
