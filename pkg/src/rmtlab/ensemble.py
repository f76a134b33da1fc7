"""Data-matrix ensembles: raw draws, column standardization, column-swap
interpolation, and large-deviation spot checks.

Randomness is counter-based: the stream for column j of trial t is the
Philox stream keyed by the spec seed with counter lane (0, lane, j, t).
Trials therefore parallelize without shared state, a raw draw and its
standardized version are coupled by construction, and any single column
can be resampled independently of the rest.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from enum import Enum

import numpy as np

from .errors import ConfigurationError, DegenerateInputError

__all__ = [
    "EntryDistribution",
    "EnsembleSpec",
    "DataMatrix",
    "LargeDeviationReport",
    "sample_raw",
    "raw_column",
    "standardize_columns",
    "column_swap",
    "large_deviation_check",
]

# lane indices partition the counter space: data columns vs auxiliary draws
_LANE_DATA = 0
_LANE_AUX = 1


class EntryDistribution(Enum):
    """Entry laws for q in x = q / sqrt(M); all have mean 0, variance 1,
    and sub-exponential tails by construction."""

    GAUSSIAN = "gaussian"
    RADEMACHER = "rademacher"
    CENTERED_EXPONENTIAL = "centered_exponential"
    CENTERED_UNIFORM = "centered_uniform"


def _draw_unit_variance(gen: np.random.Generator, dist: EntryDistribution, size: int) -> np.ndarray:
    if dist is EntryDistribution.GAUSSIAN:
        return gen.standard_normal(size)
    if dist is EntryDistribution.RADEMACHER:
        return gen.integers(0, 2, size=size).astype(float) * 2.0 - 1.0
    if dist is EntryDistribution.CENTERED_EXPONENTIAL:
        return gen.standard_exponential(size) - 1.0
    if dist is EntryDistribution.CENTERED_UNIFORM:
        return gen.uniform(-math.sqrt(3.0), math.sqrt(3.0), size=size)
    raise ConfigurationError(f"unknown entry distribution: {dist!r}")


@dataclass(frozen=True)
class EnsembleSpec:
    """Sampling contract: an m x n matrix of i.i.d. entries q / sqrt(m),
    reproducible from a 64-bit seed.

    The aspect ratio d = n/m must stay inside (theta, 1/theta) and away
    from 1 by at least theta.
    """

    m: int
    n: int
    dist: EntryDistribution
    seed: int
    theta: float = 0.05

    def __post_init__(self) -> None:
        if self.m < 1 or self.n < 1:
            raise ConfigurationError(f"dimensions must be positive, got ({self.m}, {self.n})")
        if not (0 < self.theta < 1):
            raise ConfigurationError(f"theta must lie in (0, 1), got {self.theta}")
        d = self.n / self.m
        if not (self.theta < d < 1.0 / self.theta):
            raise ConfigurationError(
                f"aspect ratio d = {d:g} outside ({self.theta:g}, {1/self.theta:g})")
        if abs(d - 1.0) <= self.theta:
            raise ConfigurationError(
                f"aspect ratio d = {d:g} too close to 1 (within theta = {self.theta:g})")
        if not (0 <= self.seed < 2 ** 64):
            raise ConfigurationError("seed must fit in 64 bits")

    @property
    def d(self) -> float:
        return self.n / self.m


@dataclass(frozen=True)
class DataMatrix:
    """An m x n real matrix plus the flag recording whether every column
    has unit Euclidean norm. Entries are frozen after construction."""

    entries: np.ndarray
    standardized: bool

    def __post_init__(self) -> None:
        if self.entries.ndim != 2:
            raise ConfigurationError("entries must be a 2-d array")
        self.entries.setflags(write=False)

    @property
    def m(self) -> int:
        return self.entries.shape[0]

    @property
    def n(self) -> int:
        return self.entries.shape[1]


class _CounterStream:
    """One Philox bit generator reused across columns by resetting its
    counter; equivalent to constructing a fresh generator per column but
    roughly an order of magnitude cheaper."""

    def __init__(self, seed: int):
        self._bg = np.random.Philox(key=seed)
        self.generator = np.random.Generator(self._bg)

    def at(self, column: int, trial: int, lane: int = _LANE_DATA) -> np.random.Generator:
        state = self._bg.state
        state["state"]["counter"] = np.array([0, lane, column, trial], dtype=np.uint64)
        state["buffer_pos"] = 4  # discard buffered words from the previous position
        self._bg.state = state
        return self.generator


def raw_column(spec: EnsembleSpec, column: int, trial: int = 0) -> np.ndarray:
    """The raw (unstandardized) draw of one column, from its own stream;
    bit-identical to the corresponding column of sample_raw."""
    if not (0 <= column < spec.n):
        raise ConfigurationError(f"column {column} outside [0, {spec.n})")
    gen = _CounterStream(spec.seed).at(column, trial)
    return _draw_unit_variance(gen, spec.dist, spec.m) * (1.0 / math.sqrt(spec.m))


def sample_raw(spec: EnsembleSpec, trial: int = 0) -> DataMatrix:
    """Draw the full m x n raw matrix for one trial; bit-identical for
    identical (spec, trial)."""
    stream = _CounterStream(spec.seed)
    scale = 1.0 / math.sqrt(spec.m)
    out = np.empty((spec.m, spec.n))
    for j in range(spec.n):
        out[:, j] = _draw_unit_variance(stream.at(j, trial), spec.dist, spec.m) * scale
    return DataMatrix(entries=out, standardized=False)


def standardize_columns(raw: DataMatrix) -> DataMatrix:
    """Divide every column by its Euclidean norm."""
    if raw.standardized:
        raise ConfigurationError("input is already standardized")
    norms = np.linalg.norm(raw.entries, axis=0)
    if np.any(norms == 0.0):
        raise DegenerateInputError("cannot standardize a zero column")
    return DataMatrix(entries=raw.entries / norms, standardized=True)


def column_swap(standardized: DataMatrix, raw: DataMatrix, gamma: int) -> DataMatrix:
    """Hybrid matrix whose columns 1..gamma (1-based) are raw and whose
    remaining columns are standardized; gamma = 0 reproduces the
    standardized input, gamma = n the raw input."""
    if standardized.entries.shape != raw.entries.shape:
        raise ConfigurationError("matrix shapes differ")
    if not standardized.standardized or raw.standardized:
        raise ConfigurationError("arguments must be (standardized, raw) in that order")
    n = raw.n
    if not (0 <= gamma <= n):
        raise ConfigurationError(f"gamma = {gamma} outside [0, {n}]")
    norms = np.linalg.norm(raw.entries, axis=0)
    if not np.allclose(standardized.entries * norms, raw.entries, atol=1e-12):
        raise ConfigurationError("standardized matrix does not derive from the raw draws")
    out = standardized.entries.copy()
    out[:, :gamma] = raw.entries[:, :gamma]
    return DataMatrix(entries=out, standardized=(gamma == 0))


@dataclass(frozen=True)
class LargeDeviationReport:
    """Empirical frequencies at which the three quadratic-form bounds hold
    with the poly-log factor replaced by `factor`."""

    trials: int
    factor: float
    failures_linear: int
    failures_diagonal: int
    failures_offdiagonal: int

    @property
    def failure_rate(self) -> float:
        worst = max(self.failures_linear, self.failures_diagonal, self.failures_offdiagonal)
        return worst / self.trials


def large_deviation_check(spec: EnsembleSpec, trials: int,
                          factor: float | None = None) -> LargeDeviationReport:
    """Monte Carlo check of the three concentration bounds for a column's
    entries a_i against random test data A (vector) and B (matrix):

      |sum a_i A_i|                        <= factor * sigma   * ||A||
      |sum conj(a_i) B_ii a_i - sigma^2 tr_diag(B)|
                                           <= factor * sigma^2 * (sum_i |B_ii|^2)^(1/2)
      |sum_{i != j} conj(a_i) B_ij a_j|    <= factor * sigma^2 * (sum_{i != j} |B_ij|^2)^(1/2)

    with sigma^2 = 1/m. Both the raw column and its standardized version
    are tested each trial. The poly-log exponent is never pinned by
    theory, so `factor` is a parameter; the default is (log m)^3.
    """
    if trials < 1:
        raise ConfigurationError("need at least one trial")
    if factor is None:
        factor = math.log(spec.m) ** 3
    sigma2 = 1.0 / spec.m
    sigma = math.sqrt(sigma2)
    stream = _CounterStream(spec.seed)
    fail = [0, 0, 0]
    for t in range(trials):
        col = _draw_unit_variance(stream.at(0, t), spec.dist, spec.m) * sigma
        aux = stream.at(0, t, lane=_LANE_AUX)
        vec = aux.standard_normal(spec.m)
        mat = aux.standard_normal((spec.m, spec.m))
        diag = np.diag(mat)
        off = mat - np.diag(diag)
        off_norm = np.linalg.norm(off)
        bad = [False, False, False]
        for a in (col, col / np.linalg.norm(col)):
            bad[0] |= abs(a @ vec) > factor * sigma * np.linalg.norm(vec)
            bad[1] |= abs(a @ (diag * a) - sigma2 * diag.sum()) > factor * sigma2 * np.linalg.norm(diag)
            bad[2] |= abs(a @ off @ a) > factor * sigma2 * off_norm
        for i in range(3):
            fail[i] += bad[i]
    return LargeDeviationReport(trials=trials, factor=factor,
                                failures_linear=fail[0],
                                failures_diagonal=fail[1],
                                failures_offdiagonal=fail[2])
