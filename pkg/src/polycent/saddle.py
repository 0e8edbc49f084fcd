"""Saddle-point estimates of the solution-set centroid.

The solution set of ``sum_i p_i f_ji = 1`` (plus normalization) is a convex
polytope inside the simplex.  Its log-volume admits a stationary-phase
evaluation whose stationarity conditions are

    1 - sum_i 1 / D_i = 0,        D_i = m + sum_j lambda_j f_ji,
    1 - sum_i f_ji / D_i = 0      for each constraint j,

and ``p_i = 1 / D_i`` at the solution is the first-order centroid estimate.
Summing the conditions with weights (m, lambda) yields ``m = N - sum_j
lambda_j``, which this solver builds in by eliminating m analytically.
The remaining system in lambda is the gradient of the strictly convex
barrier ``-sum_i log D_i``, so damped Newton converges globally from
lambda = 0 (the unconstrained stationary point m = N).

A Gaussian-fluctuation evaluation around the stationary point refines the
estimate; ``centroid_second_order`` assembles the required derivative of
``log det M`` including the implicit multiplier sensitivities, and
``log_partition_fluct`` exposes the fluctuation-corrected log-volume so
that the analytic derivative can be validated by finite differences.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .errors import InfeasibleDomain, NegativeComponent, NonConvergence, SingularJacobian
from .model import ConstraintSet, ProbabilityVector, SaddlePoint, _readonly

MAX_BACKTRACKS = 60
_DIVERGENCE_LIMIT = 1e10


@dataclass(frozen=True)
class SolverOptions:
    """Knobs of the damped Newton iterations.

    ``damping`` is the backtracking factor applied to the step length until
    the trial point is admissible.  ``initial_multipliers`` defaults to all
    zeros, the unconstrained stationary point.
    """

    max_iterations: int = 200
    residual_tolerance: float = 1e-12
    damping: float = 0.5
    initial_multipliers: np.ndarray | None = None

    def __post_init__(self):
        if self.max_iterations < 1:
            raise ValueError("max_iterations must be positive")
        if not self.residual_tolerance > 0:
            raise ValueError("residual_tolerance must be positive")
        if not 0.0 < self.damping < 1.0:
            raise ValueError("damping must lie in (0, 1)")


@dataclass(frozen=True)
class FluctuationMatrix:
    """The (C+1) x (C+1) Gaussian-fluctuation matrix.

    Entry (a, b) is ``sum_i f_ai f_bi / D_i**2`` with the convention that
    index 0 denotes the all-ones row.  It doubles as the Newton Jacobian of
    the stationarity system and is positive definite whenever the augmented
    rows are independent and all denominators positive.
    """

    entries: np.ndarray

    def __post_init__(self):
        object.__setattr__(self, "entries", _readonly(self.entries))


def _augmented_rows(constraints: ConstraintSet) -> np.ndarray:
    """Constraint rows with the all-ones normalization row stacked on top."""
    return np.vstack([np.ones((1, constraints.n_states)), constraints.coefficients])


def _full_residual(A: np.ndarray, inv_d: np.ndarray) -> np.ndarray:
    return 1.0 - A @ inv_d


def _symmetric_weighted_gram(A: np.ndarray, weights: np.ndarray) -> np.ndarray:
    m = (A * weights) @ A.T
    return 0.5 * (m + m.T)


def _cholesky_or_singular(matrix: np.ndarray, context: str):
    try:
        return np.linalg.cholesky(matrix)
    except np.linalg.LinAlgError as exc:
        raise SingularJacobian(
            f"{context}: fluctuation matrix is numerically singular "
            "(redundant or degenerate constraints)"
        ) from exc


def solve_saddle(
    constraints: ConstraintSet, opts: SolverOptions | None = None
) -> SaddlePoint:
    """Solve the stationarity conditions for the multipliers (m*, lambda*).

    Newton iterates on lambda only, with m eliminated through
    ``m = N - sum(lambda)`` so the identity holds exactly.  Steps are
    backtracked until all denominators stay positive and either the convex
    barrier value or the residual norm decreases.

    Raises
    ------
    SingularJacobian
        The Newton system (equivalently the fluctuation matrix) is
        numerically singular: redundant or degenerate constraints.
    InfeasibleDomain
        No damped step keeps the denominators positive, or the multipliers
        diverge; the constraint set has no interior point.
    NonConvergence
        Iteration budget exhausted.
    """
    opts = opts or SolverOptions()
    n = constraints.n_states
    c = constraints.n_constraints
    coeffs = constraints.coefficients

    if c == 0:
        # Single condition sum_i 1/m = N/m = 1.
        return SaddlePoint(float(n), np.empty(0), 0.0, 0)

    if opts.initial_multipliers is None:
        lam = np.zeros(c)
    else:
        lam = np.asarray(opts.initial_multipliers, dtype=float).copy()
        if lam.shape != (c,):
            raise ValueError(f"initial_multipliers must have length {c}")

    A = _augmented_rows(constraints)
    centered = coeffs - 1.0  # row j of (f_j - 1); D = N + lam @ centered

    denom = n + lam @ centered
    if denom.min() <= 0.0:
        raise InfeasibleDomain("initial multipliers leave a denominator non-positive")
    barrier = -np.log(denom).sum()

    residual = _full_residual(A, 1.0 / denom)
    res_norm = np.abs(residual).max()
    iterations = 0

    while res_norm > opts.residual_tolerance:
        if iterations >= opts.max_iterations:
            raise NonConvergence(iterations, res_norm)
        iterations += 1

        inv_d = 1.0 / denom
        grad = -centered @ inv_d
        hess = _symmetric_weighted_gram(centered, inv_d**2)
        try:
            step = np.linalg.solve(hess, -grad)
        except np.linalg.LinAlgError as exc:
            raise SingularJacobian(
                "Newton system is singular (redundant or degenerate constraints)"
            ) from exc
        if not np.all(np.isfinite(step)):
            raise SingularJacobian("Newton step is not finite")

        scale = 1.0
        accepted = False
        saw_positive = False
        for _ in range(MAX_BACKTRACKS):
            trial = lam + scale * step
            trial_denom = n + trial @ centered
            if trial_denom.min() > 0.0:
                saw_positive = True
                trial_barrier = -np.log(trial_denom).sum()
                trial_residual = _full_residual(A, 1.0 / trial_denom)
                trial_norm = np.abs(trial_residual).max()
                if trial_barrier < barrier or trial_norm < res_norm:
                    accepted = True
                    break
            scale *= opts.damping
        if not accepted:
            if not saw_positive:
                raise InfeasibleDomain(
                    "no damped step keeps all denominators positive"
                )
            raise NonConvergence(iterations, res_norm)

        lam, denom, barrier, res_norm = trial, trial_denom, trial_barrier, trial_norm
        if np.abs(lam).max() > _DIVERGENCE_LIMIT:
            raise InfeasibleDomain(
                "multipliers diverged; the constraint set has no interior point"
            )

    # A solvable instance must also have a regular fluctuation matrix;
    # catches degenerate rows that happen to satisfy the residuals (for
    # example a row proportional to the all-ones row).
    _cholesky_or_singular(
        _symmetric_weighted_gram(A, denom**-2), "at the stationary point"
    )

    m_star = float(n - lam.sum())
    return SaddlePoint(m_star, lam, float(res_norm), iterations)


def centroid_first_order(
    constraints: ConstraintSet, sp: SaddlePoint
) -> ProbabilityVector:
    """First-order centroid estimate ``p_i = 1 / D_i`` at the saddle point."""
    denom = _denominators(constraints, sp)
    if denom.min() <= 0.0:
        raise InfeasibleDomain("saddle point has a non-positive denominator")
    return ProbabilityVector(1.0 / denom)


def _denominators(
    constraints: ConstraintSet, sp: SaddlePoint, field: np.ndarray | None = None
) -> np.ndarray:
    denom = np.full(constraints.n_states, sp.m_star)
    if constraints.n_constraints:
        denom = denom + sp.lambda_star @ constraints.coefficients
    if field is not None:
        denom = denom + field
    return denom


def fluctuation_matrix(
    constraints: ConstraintSet,
    sp: SaddlePoint,
    field: np.ndarray | None = None,
) -> FluctuationMatrix:
    """Evaluate the fluctuation matrix at a saddle point, optionally shifted.

    With a field ``h`` the denominators generalize to
    ``h_i + m* + sum_j lambda_j* f_ji``; all of them must stay positive.
    The matrix is symmetrized explicitly so equality of the (a, b) and
    (b, a) entries is exact, not only up to rounding.
    """
    if field is not None:
        field = np.asarray(field, dtype=float)
        if field.shape != (constraints.n_states,):
            raise ValueError(f"field must have length {constraints.n_states}")
    denom = _denominators(constraints, sp, field)
    if denom.min() <= 0.0:
        raise InfeasibleDomain("a generalized denominator is non-positive")
    A = _augmented_rows(constraints)
    return FluctuationMatrix(_symmetric_weighted_gram(A, denom**-2))


def centroid_second_order(
    constraints: ConstraintSet, sp: SaddlePoint
) -> ProbabilityVector:
    """Gaussian-fluctuation refinement of the first-order centroid.

    The correction to component i is half the total derivative of
    ``log det M`` with respect to a field coupled to p_i, evaluated at zero
    field.  The total derivative combines the explicit dependence of M on
    the denominators with the implicit multiplier response, obtained from
    the linear system ``M (d lambda / d h_i) = -a_i p_i**2`` where ``a_i``
    is the augmented coefficient column of state i.  The corrected vector
    is shifted uniformly so it sums to one exactly; constraint residuals
    are left to the caller to inspect.

    Raises ``NegativeComponent`` (carrying the first-order estimate) when a
    corrected component falls below -1e-12, which signals that the
    expansion is invalid at this system size.
    """
    n = constraints.n_states
    A = _augmented_rows(constraints)
    denom = _denominators(constraints, sp)
    if denom.min() <= 0.0:
        raise InfeasibleDomain("saddle point has a non-positive denominator")
    p = 1.0 / denom

    M = _symmetric_weighted_gram(A, p**2)
    chol = _cholesky_or_singular(M, "second-order centroid")

    # q_i = a_i^T M^{-1} a_i; the implicit term reduces to a second solve.
    half = np.linalg.solve(chol, A)
    q = np.einsum("ai,ai->i", half, half)
    w = p**3 * q
    u = _cho_solve(chol, A @ w)
    implicit = A.T @ u

    correction = -(p**3) * q + p**2 * implicit
    correction -= correction.sum() / n

    refined = p + correction
    if refined.min() < -1e-12:
        raise NegativeComponent(
            f"second-order correction drove component {refined.argmin()} to "
            f"{refined.min():.3e}; expansion invalid at N={n}",
            first_order=p,
        )
    return ProbabilityVector(np.maximum(refined, 0.0))


def _cho_solve(chol: np.ndarray, rhs: np.ndarray) -> np.ndarray:
    y = np.linalg.solve(chol, rhs)
    return np.linalg.solve(chol.T, y)


def _solve_field_saddle(
    constraints: ConstraintSet,
    field: np.ndarray,
    opts: SolverOptions,
    start: np.ndarray | None = None,
) -> tuple[np.ndarray, np.ndarray]:
    """Solve the full (C+1)-dimensional stationarity system at a given field.

    With a field the elimination of m is no longer exact, so all C+1
    multipliers are iterated together.  The system is the gradient of the
    convex potential ``sum(multipliers) - sum_i log D_i`` and the Newton
    Jacobian is the fluctuation matrix itself.  Returns the augmented
    multipliers and the denominators.
    """
    n = constraints.n_states
    A = _augmented_rows(constraints)

    if start is not None:
        aug = start.copy()
    else:
        aug = np.zeros(constraints.n_constraints + 1)
        aug[0] = float(n) + max(0.0, -float(field.min()))
    denom = field + aug @ A
    if denom.min() <= 0.0:
        # Push the normalization multiplier up until inside the domain.
        aug[0] += 1.0 - denom.min()
        denom = field + aug @ A
    potential = aug.sum() - np.log(denom).sum()

    iterations = 0
    while True:
        residual = _full_residual(A, 1.0 / denom)
        res_norm = np.abs(residual).max()
        if res_norm <= opts.residual_tolerance:
            break
        if iterations >= opts.max_iterations:
            raise NonConvergence(iterations, res_norm)
        iterations += 1

        M = _symmetric_weighted_gram(A, denom**-2)
        try:
            step = np.linalg.solve(M, -residual)
        except np.linalg.LinAlgError as exc:
            raise SingularJacobian(
                "field-shifted Newton system is singular"
            ) from exc
        if not np.all(np.isfinite(step)):
            raise SingularJacobian("field-shifted Newton step is not finite")

        scale = 1.0
        accepted = False
        saw_positive = False
        for _ in range(MAX_BACKTRACKS):
            trial = aug + scale * step
            trial_denom = field + trial @ A
            if trial_denom.min() > 0.0:
                saw_positive = True
                trial_potential = trial.sum() - np.log(trial_denom).sum()
                trial_residual = _full_residual(A, 1.0 / trial_denom)
                trial_norm = np.abs(trial_residual).max()
                if trial_potential < potential or trial_norm < res_norm:
                    accepted = True
                    break
            scale *= opts.damping
        if not accepted:
            if not saw_positive:
                raise InfeasibleDomain(
                    "no damped step keeps all denominators positive"
                )
            raise NonConvergence(iterations, res_norm)
        aug, denom, potential = trial, trial_denom, trial_potential
        if np.abs(aug).max() > _DIVERGENCE_LIMIT:
            raise InfeasibleDomain("field-shifted multipliers diverged")
    return aug, denom


def log_partition_fluct(
    constraints: ConstraintSet,
    field: np.ndarray | None = None,
    opts: SolverOptions | None = None,
) -> float:
    """Fluctuation-corrected log-volume at a field coupled to the components.

    Re-solves the stationarity system with denominators
    ``h_i + m + sum_j lambda_j f_ji`` and returns

        sum(multipliers) - sum_i log D_i - 0.5 * log det M.

    Exists mainly so the analytic second-order centroid can be checked
    against central finite differences of this value.
    """
    opts = opts or SolverOptions()
    n = constraints.n_states
    if field is None:
        field = np.zeros(n)
    else:
        field = np.asarray(field, dtype=float)
        if field.shape != (n,):
            raise ValueError(f"field must have length {n}")

    aug, denom = _solve_field_saddle(constraints, field, opts)
    M = _symmetric_weighted_gram(_augmented_rows(constraints), denom**-2)
    sign, logdet = np.linalg.slogdet(M)
    if sign <= 0:
        raise SingularJacobian("fluctuation matrix is not positive definite")
    return float(aug.sum() - np.log(denom).sum() - 0.5 * logdet)
