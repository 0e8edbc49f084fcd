"""Solution-set geometry read off the first-order centroid.

At stationary-phase order the per-component width of the solution set
equals the centroid component itself, and the log-volume is
``N + sum_i log p_i``, bounded above by ``N - N log N`` with equality only
for the unconstrained simplex.  The gap to that bound measures how
strongly the constraints squeeze the set.
"""

from __future__ import annotations

import math

import numpy as np

from .model import ConstraintSet, GeometrySummary, ProbabilityVector, Regime, SampleStats

#: Decade margins around sqrt(N) separating weak / intermediate / strong.
WEAK_FACTOR = 10.0
STRONG_FACTOR = 0.1


def _values(p) -> np.ndarray:
    return np.asarray(getattr(p, "values", p), dtype=float)


def widths(p_c1: ProbabilityVector) -> np.ndarray:
    """Per-component width estimate of the solution set (the centroid itself)."""
    return _values(p_c1).copy()


def log_volume(p_c1: ProbabilityVector) -> float:
    """Log-volume estimate ``N + sum_i log p_i`` from the first-order centroid."""
    v = _values(p_c1)
    if v.min() <= 0.0:
        raise ValueError("log-volume needs strictly positive components")
    return float(v.size + np.log(v).sum())


def log_volume_bound(n_states: int) -> float:
    """Upper bound ``N - N log N``; attained only without constraints."""
    return float(n_states - n_states * math.log(n_states))


def classify_strength(
    constraints: ConstraintSet, p_c1: ProbabilityVector
) -> GeometrySummary:
    """Classify the constraints as weak, strong, or intermediate.

    The coefficient scale is the root-mean-square of all entries; the
    regime is weak when it exceeds ``10 sqrt(N)``, strong when below
    ``0.1 sqrt(N)``, intermediate otherwise.  ``strength_ratio`` is the RMS
    scale over ``sqrt(N)``; an unconstrained set has no coefficients, so it
    reports the volume deficit (zero) and is classified weak.
    """
    n = constraints.n_states
    volume = log_volume(p_c1)
    bound = log_volume_bound(n)
    if constraints.n_constraints == 0:
        return GeometrySummary(
            widths=widths(p_c1),
            log_volume=volume,
            log_volume_bound=bound,
            strength_ratio=bound - volume,
            regime=Regime.WEAK,
        )
    sigma_f = float(np.sqrt(np.mean(constraints.coefficients**2)))
    root_n = math.sqrt(n)
    if sigma_f >= WEAK_FACTOR * root_n:
        regime = Regime.WEAK
    elif sigma_f <= STRONG_FACTOR * root_n:
        regime = Regime.STRONG
    else:
        regime = Regime.INTERMEDIATE
    return GeometrySummary(
        widths=widths(p_c1),
        log_volume=volume,
        log_volume_bound=bound,
        strength_ratio=sigma_f / root_n,
        regime=regime,
    )


def expected_error(p, stats: SampleStats) -> float:
    """Mean squared distance from p to a uniform draw of the solution set.

    Evaluates ``sum_i (p_i**2 - 2 p_i <p_i> + <p_i**2>)`` with the sampled
    moments; minimized exactly at the sampled mean.
    """
    v = _values(p)
    if v.shape != stats.mean.shape:
        raise ValueError("distribution and statistics have mismatched lengths")
    return float(np.sum(v**2 - 2.0 * v * stats.mean + stats.second_moment))


def squared_error(p_true, p_est) -> float:
    """Squared Euclidean distance between two distributions."""
    a = _values(p_true)
    b = _values(p_est)
    if a.shape != b.shape:
        raise ValueError(f"length mismatch: {a.shape} vs {b.shape}")
    return float(np.sum((a - b) ** 2))
