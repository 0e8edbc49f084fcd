"""Domain types, validation, and file formats shared by all other modules.

Types are immutable after construction (arrays are made read-only) and are
safe to share across threads.

File formats
------------
Constraint file (JSON)::

    {"n_states": 16, "constraints": [[f_11, ..., f_1N], ...]}

Every constraint row ``f_j`` encodes the condition ``sum_i p_i f_ji = 1``;
the normalization ``sum_i p_i = 1`` is implicit and always present.  An
optional top-level ``"manifest"`` key is ignored on read.

Distribution file (CSV): header ``index,value``, one row per state, values
written with 17 significant digits so that read/write round-trips are exact.

Sample statistics (JSON): ``n_samples``, ``seed``, per-component ``mean``
and ``variance`` arrays, plus walk metadata.
"""

from __future__ import annotations

import json
import math
import os
import tempfile
import warnings
from dataclasses import InitVar, dataclass, field
from enum import Enum
from pathlib import Path
from typing import IO, Union

import numpy as np

from .errors import ConstraintValidationError, FileFormatError

PathLike = Union[str, os.PathLike]

#: Components of a probability vector may undershoot zero by at most this.
COMPONENT_TOLERANCE = 1e-12

#: A probability vector must sum to one within this tolerance.
SUM_TOLERANCE = 1e-10


def _readonly(values, dtype=float) -> np.ndarray:
    out = np.array(values, dtype=dtype)
    out.setflags(write=False)
    return out


def _semantic_violations(coefficients: np.ndarray) -> list[str]:
    """Row-level violations: zero rows, normalization duplicates, duplicates.

    Rows are compared exactly after dividing by their max-norm, so
    proportional rows count as identical; near-duplicates are not rejected
    (they surface later as ill-conditioned Jacobians).
    """
    violations = []
    scaled = []
    for j, row in enumerate(coefficients):
        peak = np.abs(row).max() if row.size else 0.0
        if peak == 0.0:
            violations.append(f"row {j} is identically zero")
            scaled.append(None)
            continue
        scaled.append(row / peak)
        if np.all(scaled[j] == 1.0):
            violations.append(f"row {j} duplicates normalization")
    for i in range(len(scaled)):
        for j in range(i + 1, len(scaled)):
            if scaled[i] is None or scaled[j] is None:
                continue
            if np.array_equal(scaled[i], scaled[j]):
                violations.append(f"rows {i} and {j} are duplicate constraint rows")
    return violations


@dataclass(frozen=True)
class ConstraintSet:
    """C linear moment conditions over N states, each with target value 1.

    Parameters
    ----------
    n_states : int
        Number of states N.
    coefficients : array_like, shape (C, N)
        Row j holds the coefficients of ``sum_i p_i f_ji = 1``.
    strict : bool, keyword-only
        With the default ``True``, semantic violations (duplicate rows, a
        row equal to the all-ones row after scaling, zero rows) are
        rejected at construction.  ``strict=False`` admits them so that
        solvers can report the resulting degeneracy themselves; structural
        problems (bad shape, C >= N, non-finite entries) always raise.
    """

    n_states: int
    coefficients: np.ndarray
    strict: InitVar[bool] = True

    def __post_init__(self, strict: bool):
        n = int(self.n_states)
        coeffs = np.asarray(self.coefficients, dtype=float)
        if coeffs.size == 0:
            coeffs = coeffs.reshape(0, n if n > 0 else 0)
        structural = []
        if n < 1:
            structural.append("n_states must be a positive integer")
        if coeffs.ndim != 2:
            structural.append("coefficients must be a 2-D matrix")
        elif n >= 1 and coeffs.shape[1] != n:
            structural.append(
                f"coefficient rows must have length {n}, got {coeffs.shape[1]}"
            )
        if structural:
            raise ConstraintValidationError(structural)
        if coeffs.shape[0] >= n:
            structural.append(
                f"n_constraints must be smaller than n_states "
                f"({coeffs.shape[0]} >= {n})"
            )
        if not np.all(np.isfinite(coeffs)):
            structural.append("coefficients must be finite (no NaN/Inf)")
        if structural:
            raise ConstraintValidationError(structural)
        if strict:
            semantic = _semantic_violations(coeffs)
            if semantic:
                raise ConstraintValidationError(semantic)
        if coeffs.shape[0] > n / 4:
            warnings.warn(
                f"{coeffs.shape[0]} constraints on {n} states: the saddle "
                "approximation assumes far fewer constraints than states",
                stacklevel=2,
            )
        object.__setattr__(self, "n_states", n)
        object.__setattr__(self, "coefficients", _readonly(coeffs))

    @property
    def n_constraints(self) -> int:
        return self.coefficients.shape[0]


def validate(constraints: ConstraintSet) -> list[str]:
    """Return the list of semantic violations of a constraint set.

    An empty list means valid.  Structural invariants (shape, finiteness,
    C < N) cannot be violated by a constructed instance, so only row-level
    problems are reported here.
    """
    return _semantic_violations(constraints.coefficients)


@dataclass(frozen=True)
class ProbabilityVector:
    """A point in the probability simplex.

    Components in ``(-1e-12, 0)`` are clamped to zero; anything more
    negative, or a total differing from one by more than 1e-10, is
    rejected.  The vector is never silently renormalized.
    """

    values: np.ndarray

    def __post_init__(self):
        v = np.asarray(self.values, dtype=float)
        if v.ndim != 1 or v.size < 1:
            raise ValueError("probability vector must be a non-empty 1-D array")
        if not np.all(np.isfinite(v)):
            raise ValueError("probability vector must be finite")
        low = v.min()
        if low < -COMPONENT_TOLERANCE:
            raise ValueError(f"component {v.argmin()} is negative ({low:.3e})")
        if v.max() > 1.0 + COMPONENT_TOLERANCE:
            raise ValueError(f"component {v.argmax()} exceeds 1 ({v.max():.17g})")
        if low < 0.0:
            v = np.where(v < 0.0, 0.0, v)
        total = v.sum()
        if abs(total - 1.0) > SUM_TOLERANCE:
            raise ValueError(f"components sum to {total:.17g}, not 1")
        object.__setattr__(self, "values", _readonly(v))

    def __len__(self) -> int:
        return self.values.size

    def __getitem__(self, i):
        return self.values[i]


@dataclass(frozen=True)
class SaddlePoint:
    """Multipliers solving the stationarity conditions of the log-volume.

    ``m_star`` is conjugate to the normalization, ``lambda_star`` to the
    constraint rows.  The identity ``m_star = N - sum(lambda_star)`` is
    built into the solver; ``residual_norm`` is the max-norm of the full
    stationarity residuals at termination.
    """

    m_star: float
    lambda_star: np.ndarray
    residual_norm: float
    iterations: int

    def __post_init__(self):
        lam = np.atleast_1d(np.asarray(self.lambda_star, dtype=float))
        object.__setattr__(self, "m_star", float(self.m_star))
        object.__setattr__(self, "lambda_star", _readonly(lam))

    def augmented(self) -> np.ndarray:
        """Multipliers with m_star prepended (index 0 is the ones row)."""
        return np.concatenate(([self.m_star], self.lambda_star))


@dataclass(frozen=True)
class SampleStats:
    """Running first and second moments of a recorded polytope walk."""

    n_samples: int
    mean: np.ndarray
    second_moment: np.ndarray
    seed: int
    burn_in: int
    thinning: int
    generator: str = "xorshift128+/box-muller"

    def __post_init__(self):
        mean = np.asarray(self.mean, dtype=float)
        m2 = np.asarray(self.second_moment, dtype=float)
        if mean.shape != m2.shape or mean.ndim != 1:
            raise ValueError("mean and second_moment must be 1-D with equal length")
        object.__setattr__(self, "n_samples", int(self.n_samples))
        object.__setattr__(self, "mean", _readonly(mean))
        object.__setattr__(self, "second_moment", _readonly(m2))

    def to_dict(self) -> dict:
        variance = np.maximum(self.second_moment - self.mean**2, 0.0)
        return {
            "n_samples": self.n_samples,
            "seed": int(self.seed),
            "burn_in": int(self.burn_in),
            "thinning": int(self.thinning),
            "generator": self.generator,
            "mean": self.mean.tolist(),
            "variance": variance.tolist(),
            "second_moment": self.second_moment.tolist(),
        }

    @classmethod
    def from_dict(cls, data: dict) -> "SampleStats":
        try:
            mean = np.asarray(data["mean"], dtype=float)
            if "second_moment" in data:
                m2 = np.asarray(data["second_moment"], dtype=float)
            else:
                m2 = np.asarray(data["variance"], dtype=float) + mean**2
            return cls(
                n_samples=int(data["n_samples"]),
                mean=mean,
                second_moment=m2,
                seed=int(data["seed"]),
                burn_in=int(data.get("burn_in", 0)),
                thinning=int(data.get("thinning", 1)),
                generator=str(data.get("generator", "unknown")),
            )
        except (KeyError, TypeError, ValueError) as exc:
            raise FileFormatError(f"invalid sample statistics: {exc}") from exc


class Regime(str, Enum):
    """Constraint-strength classification of a solution set."""

    WEAK = "weak"
    STRONG = "strong"
    INTERMEDIATE = "intermediate"


@dataclass(frozen=True)
class GeometrySummary:
    """Width, volume, and strength diagnostics of the solution set."""

    widths: np.ndarray
    log_volume: float
    log_volume_bound: float
    strength_ratio: float
    regime: Regime

    def __post_init__(self):
        object.__setattr__(self, "widths", _readonly(self.widths))

    @property
    def volume_deficit(self) -> float:
        return self.log_volume_bound - self.log_volume

    def to_dict(self) -> dict:
        return {
            "widths": self.widths.tolist(),
            "log_volume": self.log_volume,
            "log_volume_bound": self.log_volume_bound,
            "strength_ratio": self.strength_ratio,
            "regime": self.regime.value,
        }


# ---------------------------------------------------------------------------
# file I/O


def _atomic_write_text(path: PathLike, text: str) -> None:
    """Write-temp-then-rename so partially written files never appear."""
    path = Path(path)
    fd, tmp = tempfile.mkstemp(dir=path.parent or ".", prefix=path.name + ".")
    try:
        with os.fdopen(fd, "w", encoding="utf-8", newline="\n") as handle:
            handle.write(text)
        os.replace(tmp, path)
    except BaseException:
        if os.path.exists(tmp):
            os.unlink(tmp)
        raise


def write_constraints(
    constraints: ConstraintSet, path: PathLike, manifest: dict | None = None
) -> None:
    """Serialize a constraint set to JSON (atomically)."""
    payload: dict = {
        "n_states": constraints.n_states,
        "constraints": [row.tolist() for row in constraints.coefficients],
    }
    if manifest is not None:
        payload["manifest"] = manifest
    _atomic_write_text(path, json.dumps(payload, indent=2) + "\n")


def read_constraints(source: Union[PathLike, IO[str]]) -> ConstraintSet:
    """Read a constraint set from a JSON file or stream.

    Schema problems (wrong types, row length mismatches) raise
    ``FileFormatError``.  Semantic row checks are deliberately not applied
    here; degenerate rows are reported by the solvers instead.  Use
    ``validate`` to inspect a loaded set.
    """
    if hasattr(source, "read"):
        text = source.read()
    else:
        text = Path(source).read_text(encoding="utf-8")
    try:
        data = json.loads(text)
    except json.JSONDecodeError as exc:
        raise FileFormatError(
            f"parse error at line {exc.lineno}, column {exc.colno}: {exc.msg}"
        ) from exc
    if not isinstance(data, dict):
        raise FileFormatError("top-level value must be an object")
    if "n_states" not in data or "constraints" not in data:
        raise FileFormatError("missing required field 'n_states' or 'constraints'")
    n = data["n_states"]
    if isinstance(n, bool) or not isinstance(n, int):
        raise FileFormatError("field 'n_states' must be an integer")
    rows = data["constraints"]
    if not isinstance(rows, list):
        raise FileFormatError("field 'constraints' must be a list of rows")
    matrix = []
    for j, row in enumerate(rows):
        if not isinstance(row, list):
            raise FileFormatError(f"constraint row {j} must be a list")
        if len(row) != n:
            raise FileFormatError(
                f"row {j} length mismatch: expected {n}, got {len(row)}"
            )
        for k, value in enumerate(row):
            if isinstance(value, bool) or not isinstance(value, (int, float)):
                raise FileFormatError(f"row {j}, entry {k} is not a number")
        matrix.append([float(v) for v in row])
    coeffs = np.asarray(matrix, dtype=float).reshape(len(matrix), n)
    return ConstraintSet(n, coeffs, strict=False)


def write_distribution(values, path: PathLike) -> None:
    """Write a distribution as ``index,value`` CSV with 17 significant digits."""
    v = np.asarray(getattr(values, "values", values), dtype=float)
    lines = ["index,value"]
    lines.extend(f"{i},{x:.17g}" for i, x in enumerate(v))
    _atomic_write_text(path, "\n".join(lines) + "\n")


def read_distribution(source: Union[PathLike, IO[str]]) -> np.ndarray:
    """Read an ``index,value`` CSV back into a raw value array.

    Returns the bare array: files produced by the asymptotic estimator may
    contain negative entries, so validation as a probability vector is
    left to the caller.
    """
    if hasattr(source, "read"):
        text = source.read()
    else:
        text = Path(source).read_text(encoding="utf-8")
    lines = [line for line in text.splitlines() if line.strip()]
    if not lines or lines[0].strip() != "index,value":
        raise FileFormatError("distribution file must start with header 'index,value'")
    values = []
    for lineno, line in enumerate(lines[1:], start=2):
        parts = line.split(",")
        if len(parts) != 2:
            raise FileFormatError(f"line {lineno}: expected 'index,value'")
        try:
            idx = int(parts[0])
            val = float(parts[1])
        except ValueError as exc:
            raise FileFormatError(f"line {lineno}: {exc}") from exc
        if idx != lineno - 2:
            raise FileFormatError(f"line {lineno}: indices must be consecutive")
        if not math.isfinite(val):
            raise FileFormatError(f"line {lineno}: value must be finite")
        values.append(val)
    if not values:
        raise FileFormatError("distribution file has no rows")
    return np.asarray(values, dtype=float)


def write_stats(
    stats: SampleStats, path: PathLike, manifest: dict | None = None
) -> None:
    payload = stats.to_dict()
    if manifest is not None:
        payload["manifest"] = manifest
    _atomic_write_text(path, json.dumps(payload, indent=2) + "\n")


def read_stats(source: Union[PathLike, IO[str]]) -> SampleStats:
    if hasattr(source, "read"):
        text = source.read()
    else:
        text = Path(source).read_text(encoding="utf-8")
    try:
        data = json.loads(text)
    except json.JSONDecodeError as exc:
        raise FileFormatError(
            f"parse error at line {exc.lineno}, column {exc.colno}: {exc.msg}"
        ) from exc
    if not isinstance(data, dict):
        raise FileFormatError("top-level value must be an object")
    return SampleStats.from_dict(data)
