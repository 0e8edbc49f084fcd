"""Exception hierarchy shared across the package.

``NumericalError`` subclasses signal failures of the numerical machinery
(solvers, samplers, geometry preconditions); they map to CLI exit code 3.
Validation and file-format errors map to exit code 2, I/O errors to 1.
"""

from __future__ import annotations


class PolycentError(Exception):
    """Base class for all package-specific errors."""


class ConstraintValidationError(PolycentError, ValueError):
    """A constraint set violates a structural or semantic invariant."""

    def __init__(self, violations):
        if isinstance(violations, str):
            violations = [violations]
        self.violations = list(violations)
        super().__init__("; ".join(self.violations))


class FileFormatError(PolycentError, ValueError):
    """An input file could not be parsed or does not match its schema."""


class NumericalError(PolycentError):
    """Base class for solver and sampler failures."""


class NonConvergence(NumericalError):
    """Iteration budget exhausted before the residual tolerance was met."""

    def __init__(self, iterations: int, residual_norm: float):
        self.iterations = iterations
        self.residual_norm = residual_norm
        super().__init__(
            f"no convergence after {iterations} iterations "
            f"(residual {residual_norm:.3e})"
        )


class SingularJacobian(NumericalError):
    """The Newton system is numerically singular.

    Signals redundant or degenerate constraints (duplicate rows, a row
    proportional to the all-ones row, or a zero row).
    """


class InfeasibleDomain(NumericalError):
    """No step keeps all denominators positive, or the multipliers diverge.

    Either way the constraint set admits no strictly interior distribution.
    """


class NegativeComponent(NumericalError):
    """The second-order correction drove a component below -1e-12.

    The expansion is invalid at this size; ``first_order`` carries the
    uncorrected estimate so callers can fall back to it.
    """

    def __init__(self, message: str, first_order):
        self.first_order = first_order
        super().__init__(message)


class Unbounded(NumericalError):
    """The dual problem diverges; the constraints hold only on the boundary."""


class NoInteriorPoint(NumericalError):
    """No strictly positive feasible point could be found."""


class RankDeficient(NumericalError):
    """The stacked constraint rows are linearly dependent."""


class DegenerateInterval(NumericalError):
    """Walk chords collapsed repeatedly; the polytope is effectively flat."""


class WrongDimension(NumericalError):
    """The solution set does not have the dimension the operation requires."""


class RegimeMismatch(NumericalError):
    """A limit check was invoked on a constraint set in the wrong regime."""


class ZeroRow(NumericalError):
    """A constraint row is identically zero."""
