"""Exception types shared across the package."""


class LevyArcError(Exception):
    """Base class for all package errors."""


class NonConvergent(LevyArcError):
    """Quadrature error estimate did not reach the requested tolerance
    within the evaluation budget.  Carries the partial value and the
    achieved error estimate."""

    def __init__(self, message, value=None, est_error=None):
        super().__init__(message)
        self.value = value
        self.est_error = est_error


class DivergentIntegral(LevyArcError):
    """Partial sums grow without bound; the integral does not exist."""


class DomainError(LevyArcError):
    """Input outside the domain of the requested operation."""


class NegativeTail(LevyArcError):
    """Inverted tail function fails nonnegativity or monotonicity beyond
    tolerance, certifying the input is not an arcsine-transform image."""

    def __init__(self, message, certificate=None):
        super().__init__(message)
        self.certificate = certificate


class RootFindFailure(LevyArcError):
    """Bracketed root search did not converge."""


class OutOfRange(LevyArcError):
    """Argument outside the range of an inverse function."""


class SamplerOverflow(LevyArcError):
    """Expected jump count exceeds the sampling budget."""


class ParseError(LevyArcError):
    """Syntax error in a measure spec or density expression.

    Positions are 1-based (line, column)."""

    def __init__(self, message, line, column):
        super().__init__(f"{line}:{column}: {message}")
        self.message = message
        self.line = line
        self.column = column


class ValidationError(LevyArcError):
    """Structurally valid input that violates a semantic constraint."""
