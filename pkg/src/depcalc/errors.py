"""Exception hierarchy shared by every module."""


class DepcalcError(Exception):
    """Base class for all library errors."""


class EvaluationDomainError(DepcalcError, ArithmeticError):
    """A function was evaluated outside its domain or produced NaN/Inf."""


class ParseError(DepcalcError, ValueError):
    """Malformed expression source. ``offset`` is the byte offset of the fault."""

    def __init__(self, message: str, offset: int, source: str = ""):
        self.message = message
        self.offset = offset
        self.source = source
        super().__init__(f"{message} (at offset {offset})")


class PartitionError(DepcalcError, ValueError):
    pass


class ModelConstructionError(DepcalcError, ValueError):
    pass


class DegenerateConditionalError(DepcalcError):
    """The conditional law X_{~j} | X_j is singular, so the inverse map does not exist.

    Only forward evaluations remain available in that regime.
    """


class ZeroSensitivityError(DepcalcError, ZeroDivisionError):
    """An explanatory column has a (numerically) zero entry, so the reciprocal rule fails."""


class AssemblyError(DepcalcError, ValueError):
    pass


class StencilError(DepcalcError):
    """A finite-difference stencil point could not be evaluated."""


class SymmetryCheckError(DepcalcError):
    """Two blocks that must be transposes of each other disagree."""
