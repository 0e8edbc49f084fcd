"""Uniform sampling over the solution polytope, plus exact low-dimension oracles.

The polytope is charted by an interior point and an orthonormal basis of
the null space of the stacked constraint rows (including the all-ones
row), so a walk in chart coordinates preserves the equality constraints
exactly and only the non-negativity box remains.  Hit-and-run steps are
rejection-free there: the feasible chord of any direction has closed-form
endpoints.

The walk is a single tight loop compiled with numba.  Randomness comes
from an inlined xorshift128+ stream (seeded through splitmix64) with
Box-Muller normals, so runs are reproducible bit-for-bit from the 64-bit
seed alone; the generator name is recorded in the returned statistics.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np
from numba import njit
from scipy.linalg import null_space

from .errors import (
    DegenerateInterval,
    NoInteriorPoint,
    NumericalError,
    RankDeficient,
    WrongDimension,
)
from .maxent import solve_maxent
from .model import ConstraintSet, ProbabilityVector, SampleStats, _readonly
from .saddle import _augmented_rows, centroid_first_order, solve_saddle

GENERATOR_NAME = "xorshift128+/box-muller"

#: Interior candidates must clear this floor in every component.
INTERIOR_FLOOR = 1e-12

#: Constraint residual tolerance for interior candidates and samples.
FEASIBILITY_TOL = 1e-10

_DEGENERATE_WIDTH = 1e-15
_DEGENERATE_LIMIT = 100

_U11 = np.uint64(11)
_U17 = np.uint64(17)
_U23 = np.uint64(23)
_U26 = np.uint64(26)
_U27 = np.uint64(27)
_U30 = np.uint64(30)
_U31 = np.uint64(31)
_SPLITMIX_GAMMA = np.uint64(0x9E3779B97F4A7C15)
_SM_MUL1 = np.uint64(0xBF58476D1CE4E5B9)
_SM_MUL2 = np.uint64(0x94D049BB133111EB)
_INV53 = 1.0 / 9007199254740992.0
_TWO_PI = 6.283185307179586


@dataclass(frozen=True)
class PolytopeChart:
    """Interior point plus orthonormal null-space basis of the solution set."""

    interior_point: ProbabilityVector
    basis: np.ndarray
    dim: int

    def __post_init__(self):
        object.__setattr__(self, "basis", _readonly(self.basis))


@njit(cache=True)
def _splitmix64(z):
    z = z + _SPLITMIX_GAMMA
    z = (z ^ (z >> _U30)) * _SM_MUL1
    z = (z ^ (z >> _U27)) * _SM_MUL2
    return z ^ (z >> _U31)


@njit(cache=True)
def _walk_kernel(basis, x, n_steps, burn_in, thinning, seed, sum_p, sum_pp, keep):
    n, d = basis.shape
    max_keep = keep.shape[0]

    s0 = _splitmix64(seed)
    s1 = _splitmix64(s0)
    if s0 == np.uint64(0) and s1 == np.uint64(0):
        s1 = _SPLITMIX_GAMMA

    z = np.empty(d)
    u = np.empty(n)
    recorded = 0
    degenerate_run = 0

    for step in range(n_steps):
        # Standard-normal chart coordinates via Box-Muller pairs.
        k = 0
        while k < d:
            xx = s0
            yy = s1
            s0 = yy
            xx ^= xx << _U23
            s1 = xx ^ yy ^ (xx >> _U17) ^ (yy >> _U26)
            r1 = s1 + yy
            xx = s0
            yy = s1
            s0 = yy
            xx ^= xx << _U23
            s1 = xx ^ yy ^ (xx >> _U17) ^ (yy >> _U26)
            r2 = s1 + yy
            u1 = (np.float64(r1 >> _U11) + 1.0) * _INV53
            u2 = np.float64(r2 >> _U11) * _INV53
            rad = math.sqrt(-2.0 * math.log(u1))
            ang = _TWO_PI * u2
            z[k] = rad * math.cos(ang)
            if k + 1 < d:
                z[k + 1] = rad * math.sin(ang)
            k += 2

        norm_sq = 0.0
        for i in range(n):
            acc = 0.0
            for kk in range(d):
                acc += basis[i, kk] * z[kk]
            u[i] = acc
            norm_sq += acc * acc

        if norm_sq <= 0.0:
            degenerate_run += 1
            if degenerate_run > _DEGENERATE_LIMIT:
                return recorded, 1
        else:
            inv_norm = 1.0 / math.sqrt(norm_sq)
            for i in range(n):
                u[i] *= inv_norm

            # Exact feasible chord of the non-negativity box along u.
            t_lo = -1.0e300
            t_hi = 1.0e300
            for i in range(n):
                ui = u[i]
                if ui > 0.0:
                    bound = -x[i] / ui
                    if bound > t_lo:
                        t_lo = bound
                elif ui < 0.0:
                    bound = -x[i] / ui
                    if bound < t_hi:
                        t_hi = bound
            width = t_hi - t_lo

            if width < _DEGENERATE_WIDTH:
                degenerate_run += 1
                if degenerate_run > _DEGENERATE_LIMIT:
                    return recorded, 1
            else:
                degenerate_run = 0
                xx = s0
                yy = s1
                s0 = yy
                xx ^= xx << _U23
                s1 = xx ^ yy ^ (xx >> _U17) ^ (yy >> _U26)
                rt = s1 + yy
                t = t_lo + width * (np.float64(rt >> _U11) * _INV53)
                for i in range(n):
                    xi = x[i] + t * u[i]
                    x[i] = xi if xi > 0.0 else 0.0

        if step >= burn_in and (step - burn_in) % thinning == 0:
            for i in range(n):
                sum_p[i] += x[i]
                sum_pp[i] += x[i] * x[i]
            if recorded < max_keep:
                for i in range(n):
                    keep[recorded, i] = x[i]
            recorded += 1

    return recorded, 0


def _is_interior(constraints: ConstraintSet, point: np.ndarray) -> bool:
    if not np.all(np.isfinite(point)) or point.min() <= INTERIOR_FLOOR:
        return False
    if abs(point.sum() - 1.0) > FEASIBILITY_TOL:
        return False
    if constraints.n_constraints:
        residuals = constraints.coefficients @ point - 1.0
        if np.abs(residuals).max() > FEASIBILITY_TOL:
            return False
    return True


def chart(
    constraints: ConstraintSet, start: ProbabilityVector | np.ndarray | None = None
) -> PolytopeChart:
    """Chart the solution set: orthonormal null-space basis plus interior point.

    The interior point is the provided start when strictly positive and
    feasible, otherwise the first-order centroid, otherwise the
    maximum-entropy point.

    Raises ``RankDeficient`` when the stacked rows (constraints plus the
    all-ones row) are linearly dependent, and ``NoInteriorPoint`` when
    every candidate has a component at or below 1e-12.
    """
    n = constraints.n_states
    c = constraints.n_constraints
    basis = null_space(_augmented_rows(constraints))
    expected = n - c - 1
    if basis.shape[1] != expected:
        raise RankDeficient(
            f"null space has dimension {basis.shape[1]}, expected {expected}; "
            "constraint rows are linearly dependent"
        )

    candidates = []
    if start is not None:
        candidates.append(lambda: np.asarray(getattr(start, "values", start), float))
    candidates.append(
        lambda: centroid_first_order(constraints, solve_saddle(constraints)).values
    )
    candidates.append(lambda: solve_maxent(constraints).distribution.values)

    for produce in candidates:
        try:
            point = produce()
        except NumericalError:
            continue
        if _is_interior(constraints, point):
            return PolytopeChart(ProbabilityVector(point), basis, basis.shape[1])
    raise NoInteriorPoint(
        "no strictly positive feasible point found (start, centroid, and "
        "max-ent candidates all touch the boundary)"
    )


def hit_and_run(
    chartdata: PolytopeChart,
    n_steps: int,
    seed: int,
    burn_in: int = 10_000,
    thinning: int = 10,
) -> SampleStats:
    """Run a hit-and-run walk and accumulate per-component moments.

    Each step draws a direction as a normalized standard-normal combination
    of the basis columns, computes the exact feasible chord of the
    non-negativity box along it, and jumps to a uniform point of the chord.
    Recording starts after ``burn_in`` steps and keeps every
    ``thinning``-th state.  Identical arguments reproduce identical
    statistics bit for bit.
    """
    stats, _ = _run_walk(chartdata, n_steps, seed, burn_in, thinning, max_keep=0)
    return stats


def _run_walk(
    chartdata: PolytopeChart,
    n_steps: int,
    seed: int,
    burn_in: int,
    thinning: int,
    max_keep: int,
) -> tuple[SampleStats, np.ndarray]:
    """Walk driver; optionally keeps the first ``max_keep`` recorded states."""
    n_steps = int(n_steps)
    burn_in = int(burn_in)
    thinning = int(thinning)
    if burn_in < 0:
        raise ValueError("burn_in must be non-negative")
    if thinning < 1:
        raise ValueError("thinning must be at least 1")
    if n_steps <= burn_in:
        raise ValueError(f"n_steps ({n_steps}) must exceed burn_in ({burn_in})")
    if chartdata.dim < 1:
        raise DegenerateInterval("solution set is zero-dimensional; nothing to walk")

    x = chartdata.interior_point.values.copy()
    n = x.size
    sum_p = np.zeros(n)
    sum_pp = np.zeros(n)
    keep = np.zeros((max_keep, n))
    basis = np.ascontiguousarray(chartdata.basis)

    recorded, status = _walk_kernel(
        basis,
        x,
        n_steps,
        burn_in,
        thinning,
        np.uint64(int(seed) & 0xFFFFFFFFFFFFFFFF),
        sum_p,
        sum_pp,
        keep,
    )
    if status == 1:
        raise DegenerateInterval(
            f"{_DEGENERATE_LIMIT} consecutive chords were shorter than "
            f"{_DEGENERATE_WIDTH}; the polytope is effectively lower-dimensional"
        )
    stats = SampleStats(
        n_samples=recorded,
        mean=sum_p / recorded,
        second_moment=sum_pp / recorded,
        seed=int(seed),
        burn_in=burn_in,
        thinning=thinning,
        generator=GENERATOR_NAME,
    )
    return stats, keep[: min(recorded, max_keep)]


def _chord(x: np.ndarray, u: np.ndarray) -> tuple[float, float]:
    """Exact parameter interval keeping ``x + t*u`` componentwise non-negative."""
    positive = u > 0.0
    negative = u < 0.0
    if not positive.any() or not negative.any():
        raise DegenerateInterval("direction does not bound a finite chord")
    t_lo = float(np.max(-x[positive] / u[positive]))
    t_hi = float(np.min(-x[negative] / u[negative]))
    return t_lo, t_hi


def segment_centroid(constraints: ConstraintSet) -> ProbabilityVector:
    """Exact centroid of a one-dimensional solution set (segment midpoint)."""
    chartdata = chart(constraints)
    if chartdata.dim != 1:
        raise WrongDimension(
            f"solution set has dimension {chartdata.dim}, segment oracle needs 1"
        )
    x = chartdata.interior_point.values
    u = chartdata.basis[:, 0]
    t_lo, t_hi = _chord(x, u)
    midpoint = x + 0.5 * (t_lo + t_hi) * u
    return ProbabilityVector(np.maximum(midpoint, 0.0))


def variance_estimates(stats: SampleStats) -> np.ndarray:
    """Per-component variance from recorded moments, floored at zero."""
    if stats.n_samples < 2:
        raise ValueError("need at least 2 recorded samples")
    return np.maximum(stats.second_moment - stats.mean**2, 0.0)


def merge_stats(chains) -> SampleStats:
    """Pool statistics of independent chains by weighted moment combination."""
    chains = list(chains)
    if not chains:
        raise ValueError("nothing to merge")
    first = chains[0]
    for other in chains[1:]:
        if other.mean.shape != first.mean.shape:
            raise ValueError("chains have mismatched dimensions")
        if (other.burn_in, other.thinning) != (first.burn_in, first.thinning):
            raise ValueError("chains have mismatched walk parameters")
        if other.generator != first.generator:
            raise ValueError("chains use different generators")
    total = sum(s.n_samples for s in chains)
    mean = sum(s.n_samples * s.mean for s in chains) / total
    second = sum(s.n_samples * s.second_moment for s in chains) / total
    return SampleStats(
        n_samples=total,
        mean=mean,
        second_moment=second,
        seed=first.seed,
        burn_in=first.burn_in,
        thinning=first.thinning,
        generator=first.generator,
    )
