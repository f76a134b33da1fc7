"""Edge-eigenvalue rescaling, the embedded Tracy-Widom (beta = 1)
reference, Kolmogorov-Smirnov machinery, and the sandwich comparison of
correlation against covariance edge samples.

The reference CDF ships as a static two-column text asset (step 0.01 on
[-10, 6], built once from the Painleve II representation); runtime lookup
is monotone cubic interpolation. Note the true upper tail of the beta = 1
law at the table's right end is 1.94e-6, so tail checks use a 2e-6
envelope.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from functools import lru_cache
from importlib import resources
from typing import Callable, Sequence

import numpy as np
from scipy.interpolate import PchipInterpolator
from scipy.special import kolmogorov

from .ensemble import EnsembleSpec, sample_raw, standardize_columns
from .errors import ConfigurationError, DomainError
from .spectra import Spectrum, eigenvalues

__all__ = [
    "EdgeSample",
    "TW1Reference",
    "SandwichReport",
    "edge_scaling",
    "rescale_edge",
    "tw1_cdf",
    "ks_statistic",
    "ks_pvalue",
    "universality_gap",
    "collect_edge_samples",
]

SIDES = ("largest", "smallest")
ENSEMBLES = ("correlation", "covariance")


@dataclass(frozen=True)
class EdgeSample:
    """Rescaled extreme eigenvalues of one trial: k values ordered most
    extreme first, tagged by ensemble and spectral side."""

    tag: str
    side: str
    values: np.ndarray
    trial: int

    def __post_init__(self) -> None:
        if self.side not in SIDES:
            raise ConfigurationError(f"side must be one of {SIDES}")
        if np.any(np.diff(self.values) > 0):
            raise ConfigurationError("rescaled values must be ordered most extreme first")
        self.values.setflags(write=False)

    @property
    def joint_max(self) -> float:
        """Threshold at which the joint event {all k values <= s} starts
        to hold; the values are descending, so this is the first one."""
        return float(self.values[0])


def edge_scaling(m: int, n: int, side: str) -> tuple[float, float]:
    """Centering and scale for the rescaled extreme eigenvalue m*lambda.

    The largest side uses center (sqrt(n) + sqrt(m))^2 and scale
    (sqrt(n) + sqrt(m)) (1/sqrt(n) + 1/sqrt(m))^{1/3}. The smallest side
    mirrors about (sqrt(n) - sqrt(m))^2; the sign of the rescaled value is
    flipped there so both sides share the same limit law.
    """
    rn, rm = math.sqrt(n), math.sqrt(m)
    if side == "largest":
        return (rn + rm) ** 2, (rn + rm) * (1.0 / rn + 1.0 / rm) ** (1.0 / 3.0)
    if side == "smallest":
        return (rn - rm) ** 2, abs(rn - rm) * abs(1.0 / rn - 1.0 / rm) ** (1.0 / 3.0)
    raise ConfigurationError(f"side must be one of {SIDES}")


def rescale_edge(spectrum: Spectrum, k: int, side: str) -> np.ndarray:
    """Rescale the k most extreme nontrivial eigenvalues; k values are
    returned most extreme first. The smallest side uses only the
    min(m, n) nontrivial eigenvalues."""
    if not (1 <= k <= spectrum.n_nontrivial):
        raise ConfigurationError(f"k = {k} outside [1, {spectrum.n_nontrivial}]")
    center, scale = edge_scaling(spectrum.m, spectrum.n, side)
    if side == "largest":
        lam = spectrum.values[:k]
        return (spectrum.m * lam - center) / scale
    lam = spectrum.values[spectrum.n_nontrivial - k: spectrum.n_nontrivial][::-1]
    return (center - spectrum.m * lam) / scale


@dataclass(frozen=True)
class TW1Reference:
    """Embedded reference CDF with monotone cubic interpolation, clamped
    to {0, 1} beyond the tabulated range."""

    abscissae: np.ndarray
    cdf_values: np.ndarray

    def __post_init__(self) -> None:
        if np.any(np.diff(self.abscissae) <= 0):
            raise ConfigurationError("table abscissae must increase")
        if np.any(np.diff(self.cdf_values) < 0):
            raise ConfigurationError("table CDF must be nondecreasing")
        if np.any((self.cdf_values < 0) | (self.cdf_values > 1)):
            raise ConfigurationError("table CDF must lie in [0, 1]")
        if self.cdf_values[0] > 1e-6 or 1.0 - self.cdf_values[-1] > 2e-6:
            raise ConfigurationError("table tails carry non-negligible mass")
        self.abscissae.setflags(write=False)
        self.cdf_values.setflags(write=False)
        object.__setattr__(self, "_interp",
                           PchipInterpolator(self.abscissae, self.cdf_values))

    @classmethod
    def load(cls) -> "TW1Reference":
        text = resources.files("rmtlab").joinpath("data/tw1_cdf.txt").read_text()
        rows = [line.split() for line in text.splitlines()
                if line.strip() and not line.startswith("#")]
        data = np.array(rows, dtype=float)
        return cls(abscissae=data[:, 0], cdf_values=data[:, 1])

    def cdf(self, s) -> np.ndarray | float:
        s_arr = np.asarray(s, dtype=float)
        lo, hi = self.abscissae[0], self.abscissae[-1]
        inner = self._interp(np.clip(s_arr, lo, hi))
        out = np.clip(np.where(s_arr < lo, 0.0, np.where(s_arr > hi, 1.0, inner)), 0.0, 1.0)
        if np.isscalar(s) or s_arr.ndim == 0:
            return float(out)
        return out

    def mean(self) -> float:
        pdf = np.gradient(self.cdf_values, self.abscissae)
        return float(np.trapezoid(self.abscissae * pdf, self.abscissae))


@lru_cache(maxsize=1)
def _reference() -> TW1Reference:
    return TW1Reference.load()


def tw1_cdf(s) -> np.ndarray | float:
    """CDF of the beta = 1 extreme-eigenvalue limit law."""
    return _reference().cdf(s)


def ks_statistic(sample: Sequence[float] | np.ndarray,
                 reference: Callable | Sequence[float] | np.ndarray) -> float:
    """Kolmogorov-Smirnov sup-distance.

    One-sample if `reference` is a callable CDF, two-sample if it is a
    second array of observations.
    """
    x = np.sort(np.asarray(sample, dtype=float))
    n = len(x)
    if n == 0:
        raise DomainError("empty sample")
    if callable(reference):
        f = np.asarray(reference(x), dtype=float)
        upper = np.max(np.arange(1, n + 1) / n - f)
        lower = np.max(f - np.arange(n) / n)
        return float(max(upper, lower))
    y = np.sort(np.asarray(reference, dtype=float))
    if len(y) == 0:
        raise DomainError("empty reference sample")
    both = np.concatenate([x, y])
    cx = np.searchsorted(x, both, side="right") / n
    cy = np.searchsorted(y, both, side="right") / len(y)
    return float(np.max(np.abs(cx - cy)))


def ks_pvalue(statistic: float, n: int, n_other: int | None = None) -> float:
    """Asymptotic p-value of the KS statistic (Kolmogorov distribution)."""
    eff = n if n_other is None else n * n_other / (n + n_other)
    return float(kolmogorov(statistic * math.sqrt(eff)))


@dataclass(frozen=True)
class SandwichReport:
    """Evaluation of the two-sided comparison
    P_cov(<= s - shift) - tol <= P_corr(<= s) <= P_cov(<= s + shift) + tol
    over a grid of thresholds, using the joint event {all k values <= s}.
    """

    thresholds: np.ndarray
    corr_cdf: np.ndarray
    cov_lower: np.ndarray
    cov_upper: np.ndarray
    shift: float
    tolerance: float
    mc_std_error: float
    k: int
    side: str

    @property
    def worst_violation(self) -> float:
        below = self.cov_lower - self.tolerance - self.corr_cdf
        above = self.corr_cdf - self.cov_upper - self.tolerance
        return float(max(below.max(), above.max(), 0.0))


def _joint_cdf(samples: Sequence[EdgeSample], thresholds: np.ndarray) -> np.ndarray:
    tops = np.sort(np.array([s.joint_max for s in samples]))
    return np.searchsorted(tops, thresholds, side="right") / len(tops)


def universality_gap(corr: Sequence[EdgeSample], cov: Sequence[EdgeSample],
                     shift: float, tolerance: float = 0.0,
                     thresholds: np.ndarray | None = None) -> SandwichReport:
    """Sandwich comparison of correlation against covariance edge samples;
    `shift` plays the role of the vanishing threshold slack and `tolerance`
    absorbs Monte Carlo error."""
    if not corr or not cov:
        raise ConfigurationError("both sample sets must be nonempty")
    k = len(corr[0].values)
    side = corr[0].side
    if any(len(s.values) != k or s.side != side for s in list(corr) + list(cov)):
        raise ConfigurationError("samples disagree in k or side")
    if thresholds is None:
        pool = np.array([s.joint_max for s in corr] + [s.joint_max for s in cov])
        lo, hi = pool.min() - 2 * shift - 0.5, pool.max() + 2 * shift + 0.5
        thresholds = np.linspace(lo, hi, 201)
    mc_se = 0.5 * math.sqrt(1.0 / len(corr) + 1.0 / len(cov))
    return SandwichReport(
        thresholds=thresholds,
        corr_cdf=_joint_cdf(corr, thresholds),
        cov_lower=_joint_cdf(cov, thresholds - shift),
        cov_upper=_joint_cdf(cov, thresholds + shift),
        shift=shift,
        tolerance=tolerance,
        mc_std_error=mc_se,
        k=k,
        side=side,
    )


def collect_edge_samples(spec: EnsembleSpec, trials: int, k: int = 1,
                         side: str = "largest", ensemble: str = "correlation",
                         trial_offset: int = 0) -> list[EdgeSample]:
    """Monte Carlo edge samples for one ensemble. Distinct trial offsets
    give statistically independent sample sets from the same seed."""
    if ensemble not in ENSEMBLES:
        raise ConfigurationError(f"ensemble must be one of {ENSEMBLES}")
    if trials < 1:
        raise ConfigurationError("need at least one trial")
    out = []
    for t in range(trial_offset, trial_offset + trials):
        raw = sample_raw(spec, trial=t)
        x = standardize_columns(raw) if ensemble == "correlation" else raw
        spectrum = eigenvalues(x)
        out.append(EdgeSample(tag=ensemble, side=side,
                              values=rescale_edge(spectrum, k, side), trial=t))
    return out
