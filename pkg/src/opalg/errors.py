"""Exception hierarchy shared by all opalg modules."""


class OpalgError(ValueError):
    """Base class for every error raised by this package."""


class ShapeMismatch(OpalgError):
    pass


class NotHermitian(OpalgError):
    pass


class NoConvergence(OpalgError, ArithmeticError):
    pass


class NotPositiveDefinite(OpalgError):
    pass


class NotPSD(OpalgError):
    pass


class Singular(OpalgError, ArithmeticError):
    pass


class BasisNotOrthonormal(OpalgError):
    pass


class DimensionOverflow(OpalgError):
    pass


class NotIdempotent(OpalgError):
    pass


class NotProjection(NotIdempotent):
    pass


class NotSubalgebra(OpalgError):
    pass


class NotCP(OpalgError):
    pass


class NotUnital(OpalgError):
    pass


class NotState(OpalgError):
    pass


class IncompatibleData(OpalgError):
    pass


class ContextMismatch(OpalgError):
    pass


class BaseMismatch(OpalgError):
    pass


class IllConditionedGram(OpalgError, ArithmeticError):
    pass


class VectorNotInFiber(OpalgError):
    pass


class NotGaugeInvariant(OpalgError):
    pass


class NotPositive(OpalgError):
    pass


class ParseError(OpalgError):
    """Instance text could not be decoded (exit status 2)."""


class ValidationError(OpalgError):
    """Instance decoded but violates the schema (exit status 2)."""


class UnknownSuite(OpalgError):
    pass
