"""Maximum-entropy member of the solution set, for comparison with the centroid.

The entropy maximizer has the exponential form ``p_i = exp(-m - sum_j
lambda_j f_ji)`` with m fixed by normalization, so only the C constraint
multipliers remain.  They minimize the smooth convex dual

    psi(lambda) = log sum_i exp(-sum_j lambda_j f_ji) + sum_j lambda_j,

whose gradient is exactly the vector of constraint residuals and whose
Hessian is the covariance of the coefficient rows under the current
distribution.  The solver mirrors the saddle module: damped Newton from
lambda = 0 with exponent shifting for overflow control.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .errors import NonConvergence, SingularJacobian, Unbounded
from .model import ConstraintSet, ProbabilityVector, _readonly
from .saddle import MAX_BACKTRACKS, SolverOptions, _cholesky_or_singular

_DUAL_DIVERGENCE_LIMIT = 1e8


@dataclass(frozen=True)
class MaxEntSolution:
    """Multipliers, log-normalization, distribution, and entropy (nats)."""

    multipliers: np.ndarray
    log_norm: float
    distribution: ProbabilityVector
    entropy: float

    def __post_init__(self):
        object.__setattr__(
            self, "multipliers", _readonly(np.atleast_1d(self.multipliers))
        )


def entropy(p) -> float:
    """Shannon entropy ``-sum_i p_i log p_i`` in nats, with 0 log 0 = 0."""
    values = np.asarray(getattr(p, "values", p), dtype=float)
    positive = values[values > 0.0]
    return float(-(positive * np.log(positive)).sum())


def _dual_state(coeffs: np.ndarray, lam: np.ndarray):
    """Distribution, log-normalization, and dual value at given multipliers."""
    logits = -(lam @ coeffs)
    peak = logits.max()
    shifted = np.exp(logits - peak)
    total = shifted.sum()
    log_norm = peak + np.log(total)
    p = shifted / total
    return p, log_norm, log_norm + lam.sum()


def solve_maxent(
    constraints: ConstraintSet, opts: SolverOptions | None = None
) -> MaxEntSolution:
    """Compute the maximum-entropy distribution satisfying the constraints.

    Raises
    ------
    SingularJacobian
        The dual Hessian (coefficient covariance) is numerically singular;
        redundant or degenerate constraint rows.
    Unbounded
        The dual diverges: the constraints are achievable only on the
        simplex boundary, where no strictly positive maximizer exists.
    NonConvergence
        Iteration budget exhausted.
    """
    opts = opts or SolverOptions()
    n = constraints.n_states
    c = constraints.n_constraints
    coeffs = constraints.coefficients

    if c == 0:
        uniform = ProbabilityVector(np.full(n, 1.0 / n))
        return MaxEntSolution(np.empty(0), float(np.log(n)), uniform, entropy(uniform))

    if opts.initial_multipliers is None:
        lam = np.zeros(c)
    else:
        lam = np.asarray(opts.initial_multipliers, dtype=float).copy()
        if lam.shape != (c,):
            raise ValueError(f"initial_multipliers must have length {c}")

    p, log_norm, dual = _dual_state(coeffs, lam)
    grad = 1.0 - coeffs @ p
    res_norm = np.abs(grad).max()
    iterations = 0

    while res_norm > opts.residual_tolerance:
        if iterations >= opts.max_iterations:
            raise NonConvergence(iterations, res_norm)
        iterations += 1

        weighted = coeffs * p
        expectation = coeffs @ p
        hess = weighted @ coeffs.T - np.outer(expectation, expectation)
        hess = 0.5 * (hess + hess.T)
        try:
            step = np.linalg.solve(hess, -grad)
        except np.linalg.LinAlgError as exc:
            raise SingularJacobian(
                "dual Hessian is singular (redundant or degenerate constraints)"
            ) from exc
        if not np.all(np.isfinite(step)):
            raise SingularJacobian("dual Newton step is not finite")

        scale = 1.0
        accepted = False
        for _ in range(MAX_BACKTRACKS):
            trial = lam + scale * step
            trial_p, trial_log_norm, trial_dual = _dual_state(coeffs, trial)
            trial_grad = 1.0 - coeffs @ trial_p
            trial_norm = np.abs(trial_grad).max()
            if trial_dual < dual or trial_norm < res_norm:
                accepted = True
                break
            scale *= opts.damping
        if not accepted:
            raise NonConvergence(iterations, res_norm)

        lam, p, log_norm, dual = trial, trial_p, trial_log_norm, trial_dual
        grad, res_norm = trial_grad, trial_norm
        if np.abs(lam).max() > _DUAL_DIVERGENCE_LIMIT:
            raise Unbounded(
                "dual multipliers diverged; constraints hold only on the boundary"
            )

    # Degenerate rows can satisfy the residuals from the start (for example
    # a row equal to the all-ones row); require a regular Hessian as well.
    weighted = coeffs * p
    expectation = coeffs @ p
    hess = weighted @ coeffs.T - np.outer(expectation, expectation)
    _cholesky_or_singular(0.5 * (hess + hess.T), "at the dual optimum")

    distribution = ProbabilityVector(p)
    return MaxEntSolution(lam, float(log_norm), distribution, entropy(distribution))
