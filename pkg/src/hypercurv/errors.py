"""Exception hierarchy.

The CLI maps ``NumericBreakdown`` subclasses to exit code 4 and
``DomainError`` to exit code 3.
"""


class HypercurvError(Exception):
    pass


class DomainError(HypercurvError, ValueError):
    """Input outside the mathematical domain of an operation."""


class InadmissiblePoint(DomainError):
    """A point (or stencil/quadrature node) fails the field's domain guard."""


class NumericBreakdown(HypercurvError, ArithmeticError):
    pass


class NonFiniteValue(NumericBreakdown):
    pass


class CriticalLevel(NumericBreakdown):
    """|Df| fell below the gradient floor on (or near) a level set."""


class NoConvergence(NumericBreakdown):
    pass


class CFLViolation(NumericBreakdown):
    pass


class SelfIntersection(NumericBreakdown):
    pass
