"""Asymptotics, estimator comparisons, and the reference experiment harness.

For Gaussian coefficient ensembles both the centroid and the max-ent
estimates share the leading form ``p_i = alpha + sum_j beta_j f_ji`` with
``alpha = 1/N``; in the weak regime (coefficient scale well above
``sqrt(N)``) the two differ only at order C/N^2, far below the solution-set
width, while in the strong regime they separate by about one width per
component.  The checks here turn those statements into deterministic gates.

``run_figure1`` is the reference experiment: a single strong Gaussian
constraint on a small system, solved by all estimators and ground-truthed
by a long hit-and-run walk.
"""

from __future__ import annotations

import time
from dataclasses import dataclass
from pathlib import Path

import numpy as np

from ._version import __version__
from .errors import InfeasibleDomain, RegimeMismatch, ZeroRow
from .geometry import classify_strength, log_volume, widths
from .maxent import solve_maxent
from .model import (
    ConstraintSet,
    GeometrySummary,
    ProbabilityVector,
    Regime,
    SampleStats,
    _atomic_write_text,
    _readonly,
    write_constraints,
)
from .sampler import chart, hit_and_run, variance_estimates
from .saddle import centroid_first_order, centroid_second_order, solve_saddle

DEFAULT_EXPERIMENT_SEED = 20260810
TABLE_COLUMNS = (
    "index",
    "p_c_sampled",
    "p_c1",
    "p_c2",
    "p_me",
    "width",
    "rel_err_c1",
    "rel_err_c2",
)

_MASK64 = (1 << 64) - 1


def _mix64(seed: int, salt: int) -> int:
    """Deterministic 64-bit sub-seed derivation (splitmix64 chain)."""
    z = (int(seed) + 0x9E3779B97F4A7C15 * (int(salt) + 1)) & _MASK64
    z = ((z ^ (z >> 30)) * 0xBF58476D1CE4E5B9) & _MASK64
    z = ((z ^ (z >> 27)) * 0x94D049BB133111EB) & _MASK64
    return z ^ (z >> 31)


def _values(p) -> np.ndarray:
    return np.asarray(getattr(p, "values", p), dtype=float)


@dataclass(frozen=True)
class ComparisonReport:
    """Componentwise and aggregate gaps between two distributions."""

    l2_gap: float
    linf_gap: float
    per_component: np.ndarray
    relative_to_width: np.ndarray | None

    def __post_init__(self):
        object.__setattr__(self, "per_component", _readonly(self.per_component))
        if self.relative_to_width is not None:
            object.__setattr__(
                self, "relative_to_width", _readonly(self.relative_to_width)
            )

    def to_dict(self) -> dict:
        out = {
            "l2_gap": self.l2_gap,
            "linf_gap": self.linf_gap,
            "per_component": self.per_component.tolist(),
        }
        if self.relative_to_width is not None:
            out["relative_to_width"] = self.relative_to_width.tolist()
        return out


def compare_distributions(a, b, width_scale=None) -> ComparisonReport:
    """Build a comparison report; widths (if given) normalize the gaps."""
    va = _values(a)
    vb = _values(b)
    if va.shape != vb.shape:
        raise ValueError(f"length mismatch: {va.shape} vs {vb.shape}")
    diff = va - vb
    relative = None
    if width_scale is not None:
        w = _values(width_scale)
        if w.shape != va.shape:
            raise ValueError("widths have mismatched length")
        relative = np.abs(diff) / np.maximum(w, 1e-300)
    return ComparisonReport(
        l2_gap=float(np.linalg.norm(diff)),
        linf_gap=float(np.abs(diff).max()),
        per_component=diff,
        relative_to_width=relative,
    )


def gen_gaussian_constraints(
    n: int, c: int, sigma: float, seed: int
) -> ConstraintSet:
    """Constraint matrix of independent N(0, sigma^2) draws, deterministic in seed."""
    if not (n > c >= 0):
        raise ValueError(f"need n > c >= 0, got n={n}, c={c}")
    if not sigma > 0:
        raise ValueError("sigma must be positive")
    rng = np.random.Generator(np.random.PCG64(int(seed) & _MASK64))
    coeffs = rng.normal(0.0, sigma, size=(c, n))
    return ConstraintSet(n, coeffs)


def leading_order_estimate(constraints: ConstraintSet) -> np.ndarray:
    """Leading large-N form ``1/N + sum_j beta_j f_ji`` of both estimators.

    Returned unclamped: negative components are meaningful, signaling the
    breakdown of the expansion in the strong regime, so this is a raw
    array rather than a validated probability vector.
    """
    n = constraints.n_states
    estimate = np.full(n, 1.0 / n)
    if constraints.n_constraints == 0:
        return estimate
    coeffs = constraints.coefficients
    row_power = np.sum(coeffs**2, axis=1)
    if np.any(row_power == 0.0):
        raise ZeroRow(f"constraint row {int(np.argmin(row_power))} is identically zero")
    beta = (1.0 - coeffs.sum(axis=1) / n) / row_power
    return estimate + beta @ coeffs


@dataclass(frozen=True)
class WeakLimitReport:
    """Gap between centroid and max-ent solutions in the weak regime."""

    gap: float
    max_width: float
    scaled_gap: float  # gap * N^2 / C, tracked as a regression constant
    passed: bool
    regime: Regime


def weak_limit_gap_check(constraints: ConstraintSet) -> WeakLimitReport:
    """Check that centroid and max-ent nearly coincide on weak constraints.

    Passes when the max-norm gap is below a tenth of the widest solution-set
    direction.  Raises ``RegimeMismatch`` unless the instance classifies
    weak.
    """
    sp = solve_saddle(constraints)
    p1 = centroid_first_order(constraints, sp)
    summary = classify_strength(constraints, p1)
    if summary.regime is not Regime.WEAK:
        raise RegimeMismatch(
            f"weak-limit check requires the weak regime, got {summary.regime.value}"
        )
    me = solve_maxent(constraints)
    gap = float(np.abs(p1.values - me.distribution.values).max())
    max_width = float(summary.widths.max())
    n = constraints.n_states
    c = max(constraints.n_constraints, 1)
    return WeakLimitReport(
        gap=gap,
        max_width=max_width,
        scaled_gap=gap * n * n / c,
        passed=gap < max_width / 10.0,
        regime=summary.regime,
    )


@dataclass(frozen=True)
class StrongLimitReport:
    """Separation of centroid and max-ent measured in solution-set widths."""

    gap_to_width: np.ndarray
    median_ratio: float
    sign_match_fraction: float
    passed: bool
    regime: Regime

    def __post_init__(self):
        object.__setattr__(self, "gap_to_width", _readonly(self.gap_to_width))


def strong_limit_gap_check(
    constraints: ConstraintSet, stats: SampleStats
) -> StrongLimitReport:
    """Check the order-unity separation and its sign pattern on strong constraints.

    Per component the gap is measured against the sampled standard
    deviation.  Passes when the median ratio is within [0.1, 10] and the
    max-ent solution sits below the sampled centroid on the outer quartiles
    of the centroid but above it on the middle two, for at least 70% of
    components.  Raises ``RegimeMismatch`` in the weak regime, where the
    separation vanishes by construction.
    """
    sp = solve_saddle(constraints)
    p1 = centroid_first_order(constraints, sp)
    summary = classify_strength(constraints, p1)
    if summary.regime is Regime.WEAK:
        raise RegimeMismatch("strong-limit check is meaningless in the weak regime")
    me = solve_maxent(constraints).distribution.values

    sampled_sd = np.sqrt(variance_estimates(stats))
    ratios = np.abs(p1.values - me) / np.maximum(sampled_sd, 1e-300)
    median_ratio = float(np.median(ratios))

    mean = stats.mean
    n = mean.size
    ranks = np.argsort(np.argsort(mean))
    outer = (ranks < n // 4) | (ranks >= n - n // 4)
    matches = np.where(outer, me < mean, me > mean)
    fraction = float(matches.mean())

    return StrongLimitReport(
        gap_to_width=ratios,
        median_ratio=median_ratio,
        sign_match_fraction=fraction,
        passed=(0.1 <= median_ratio <= 10.0) and fraction >= 0.7,
        regime=summary.regime,
    )


@dataclass(frozen=True)
class Figure1Result:
    """All artifacts of the reference experiment, plus its provenance."""

    constraints: ConstraintSet
    saddle_point: object
    p_c1: ProbabilityVector
    p_c2: ProbabilityVector
    maxent: object
    stats: SampleStats
    geometry: GeometrySummary
    table: np.ndarray
    manifest: dict

    def __post_init__(self):
        object.__setattr__(self, "table", _readonly(self.table))


def run_figure1(
    n: int = 16,
    sigma_f: float = 1.0,
    walk_steps: int = 10_000_000,
    seed: int = DEFAULT_EXPERIMENT_SEED,
    burn_in: int = 10_000,
    thinning: int = 10,
) -> Figure1Result:
    """Single strong Gaussian constraint: all estimators vs a long walk.

    Generates a feasible C=1 Gaussian instance (re-drawing coefficients
    from derived sub-seeds until ``min f < 1 < max f``, at most 100 tries),
    solves the first- and second-order centroid estimates and the max-ent
    distribution, runs the walk, and tabulates per-component values and
    relative errors against the sampled centroid.
    """
    if n < 3:
        raise ValueError("need at least 3 states")
    if not sigma_f > 0:
        raise ValueError("sigma_f must be positive")

    start = time.perf_counter()
    constraint_seed = None
    constraints = None
    attempts = 0
    for attempt in range(100):
        attempts = attempt + 1
        candidate_seed = _mix64(seed, attempt)
        candidate = gen_gaussian_constraints(n, 1, sigma_f, candidate_seed)
        row = candidate.coefficients[0]
        if row.min() < 1.0 < row.max():
            constraint_seed = candidate_seed
            constraints = candidate
            break
    if constraints is None:
        raise InfeasibleDomain("no feasible single constraint after 100 draws")

    sp = solve_saddle(constraints)
    p1 = centroid_first_order(constraints, sp)
    p2 = centroid_second_order(constraints, sp)
    me = solve_maxent(constraints)
    solve_elapsed = time.perf_counter() - start

    walk_seed = _mix64(seed, 0xF1C)
    walk_start = time.perf_counter()
    chartdata = chart(constraints, start=p1)
    stats = hit_and_run(chartdata, walk_steps, walk_seed, burn_in, thinning)
    walk_elapsed = time.perf_counter() - walk_start

    sampled = stats.mean
    rel1 = np.abs(p1.values - sampled) / sampled
    rel2 = np.abs(p2.values - sampled) / sampled
    table = np.column_stack(
        [
            np.arange(n, dtype=float),
            sampled,
            p1.values,
            p2.values,
            me.distribution.values,
            widths(p1),
            rel1,
            rel2,
        ]
    )
    manifest = {
        "tool": "polycent",
        "version": __version__,
        "n": n,
        "sigma_f": sigma_f,
        "walk_steps": int(walk_steps),
        "burn_in": int(burn_in),
        "thinning": int(thinning),
        "seed": int(seed),
        "constraint_seed": int(constraint_seed),
        "constraint_attempts": attempts,
        "walk_seed": int(walk_seed),
        "generator": stats.generator,
        "wall_clock_s": {
            "solvers": solve_elapsed,
            "walk": walk_elapsed,
            "total": time.perf_counter() - start,
        },
    }
    return Figure1Result(
        constraints=constraints,
        saddle_point=sp,
        p_c1=p1,
        p_c2=p2,
        maxent=me,
        stats=stats,
        geometry=classify_strength(constraints, p1),
        table=table,
        manifest=manifest,
    )


def format_table_csv(table: np.ndarray) -> str:
    """Render the experiment table deterministically (17 significant digits)."""
    lines = [",".join(TABLE_COLUMNS)]
    for row in table:
        cells = [str(int(row[0]))]
        cells.extend(f"{value:.17g}" for value in row[1:])
        lines.append(",".join(cells))
    return "\n".join(lines) + "\n"


def write_figure1_bundle(result: Figure1Result, outdir) -> Path:
    """Write constraints.json, table.csv, geometry.json, and manifest.json."""
    import json

    outdir = Path(outdir)
    outdir.mkdir(parents=True, exist_ok=True)
    deterministic_manifest = {
        k: v for k, v in result.manifest.items() if k != "wall_clock_s"
    }
    write_constraints(
        result.constraints, outdir / "constraints.json", manifest=deterministic_manifest
    )
    _atomic_write_text(outdir / "table.csv", format_table_csv(result.table))
    _atomic_write_text(
        outdir / "geometry.json",
        json.dumps(result.geometry.to_dict(), indent=2) + "\n",
    )
    _atomic_write_text(
        outdir / "manifest.json", json.dumps(result.manifest, indent=2) + "\n"
    )
    return outdir
