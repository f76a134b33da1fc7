"""Closed-form Marchenko-Pastur numerics.

Spectral edges, density, Stieltjes transform, classical eigenvalue
locations, and the poly-log envelope parameter used by the high-probability
gates. Everything here is deterministic; the Monte Carlo side of the
package consumes these functions as oracles.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np
from scipy.integrate import quad
from scipy.optimize import brentq

from .errors import ComputationError, ConfigurationError, DomainError

__all__ = [
    "MPLaw",
    "SpectralDomain",
    "ClassicalLocations",
    "density",
    "stieltjes",
    "tail_mass",
    "spectral_cdf",
    "classical_locations",
    "varphi",
]


@dataclass(frozen=True)
class MPLaw:
    """The limiting spectral law for aspect ratio d = N/M, supported on
    [lambda_minus, lambda_plus] with edges (1 -+ sqrt(d))^2."""

    d: float

    def __post_init__(self) -> None:
        if not (self.d > 0):
            raise ConfigurationError(f"aspect ratio must be positive, got {self.d}")
        if self.d == 1:
            raise ConfigurationError("aspect ratio 1 is excluded (degenerate lower edge)")

    @property
    def lambda_minus(self) -> float:
        return (1.0 - math.sqrt(self.d)) ** 2

    @property
    def lambda_plus(self) -> float:
        return (1.0 + math.sqrt(self.d)) ** 2

    @property
    def mass(self) -> float:
        """Total mass of the continuous part: 1 for d < 1, 1/d for d > 1."""
        return min(1.0, 1.0 / self.d)


@dataclass(frozen=True)
class SpectralDomain:
    """Rectangular z-grid E + i*eta used by the local-law checks.

    Defaults follow the admissible window of the strong local law:
    energies spanning [1_{d>1} * lambda_minus/5, 5 * lambda_plus] and eta
    between a poly-log multiple of 1/N and O(1). Deviations peak near the
    edges and at small eta, hence linear E and logarithmic eta spacing.
    """

    e_min: float
    e_max: float
    eta_min: float
    eta_max: float
    n_energy: int = 48
    n_eta: int = 12

    def __post_init__(self) -> None:
        if not (self.e_min < self.e_max and 0 < self.eta_min < self.eta_max):
            raise ConfigurationError("empty or inverted spectral domain")
        if self.n_energy < 1 or self.n_eta < 1:
            raise ConfigurationError("grid resolution must be positive")

    @classmethod
    def for_law(cls, law: MPLaw, n: int, eta_exponent: float = 0.9,
                n_energy: int = 48, n_eta: int = 12) -> "SpectralDomain":
        e_min = law.lambda_minus / 5.0 if law.d > 1 else 0.0
        return cls(e_min=e_min, e_max=5.0 * law.lambda_plus,
                   eta_min=float(n) ** (-eta_exponent), eta_max=1.0,
                   n_energy=n_energy, n_eta=n_eta)

    def energies(self) -> np.ndarray:
        return np.linspace(self.e_min, self.e_max, self.n_energy)

    def etas(self) -> np.ndarray:
        return np.geomspace(self.eta_min, self.eta_max, self.n_eta)

    def grid(self) -> np.ndarray:
        """Complex grid of shape (n_eta, n_energy)."""
        return self.energies()[None, :] + 1j * self.etas()[:, None]


def density(law: MPLaw, x) -> np.ndarray | float:
    """Spectral density (1/2 pi d) sqrt([(l+ - x)(x - l-)]_+) / x.

    Zero outside the support; the positive-part truncation makes x = 0
    harmless even when d > 1.
    """
    x_arr = np.asarray(x, dtype=float)
    lm, lp = law.lambda_minus, law.lambda_plus
    radicand = np.maximum((lp - x_arr) * (x_arr - lm), 0.0)
    with np.errstate(divide="ignore", invalid="ignore"):
        rho = np.sqrt(radicand) / (2.0 * math.pi * law.d * x_arr)
    rho = np.where(radicand > 0.0, rho, 0.0)
    if np.isscalar(x) or x_arr.ndim == 0:
        return float(rho)
    return rho


def stieltjes(law: MPLaw, z) -> np.ndarray | complex:
    """Stieltjes transform of the law, upper half plane only.

    Closed form (1 - d - z + i sqrt((z - l-)(l+ - z))) / (2 d z) with the
    square-root branch fixed by Im m > 0; the sign is asserted at every
    evaluation.
    """
    z_arr = np.asarray(z, dtype=complex)
    if np.any(z_arr.imag <= 0):
        raise DomainError("stieltjes transform requires Im z > 0")
    lm, lp = law.lambda_minus, law.lambda_plus
    root = np.sqrt((z_arr - lm) * (lp - z_arr))
    denom = 2.0 * law.d * z_arr
    plus = (1.0 - law.d - z_arr + 1j * root) / denom
    minus = (1.0 - law.d - z_arr - 1j * root) / denom
    m = np.where(plus.imag > 0, plus, minus)
    if np.any(m.imag <= 0):
        raise ComputationError("branch selection failed: Im m_W <= 0 on the grid")
    if np.isscalar(z) or z_arr.ndim == 0:
        return complex(m)
    return m


def _mass_integrand_bounds(law: MPLaw):
    # substitution x = c + r sin t turns the edge square-root weight into
    # cos^2, giving a smooth integrand for adaptive quadrature
    c = 0.5 * (law.lambda_plus + law.lambda_minus)
    r = 0.5 * (law.lambda_plus - law.lambda_minus)
    return c, r


def tail_mass(law: MPLaw, x: float) -> float:
    """Mass of the law on [x, lambda_plus], exact to quadrature accuracy."""
    lm, lp = law.lambda_minus, law.lambda_plus
    if x <= lm:
        return law.mass
    if x >= lp:
        return 0.0
    c, r = _mass_integrand_bounds(law)
    t0 = math.asin(min(max((x - c) / r, -1.0), 1.0))
    val, _ = quad(lambda t: math.cos(t) ** 2 / (c + r * math.sin(t)),
                  t0, math.pi / 2.0, epsabs=1e-13, epsrel=1e-13)
    return val * r * r / (2.0 * math.pi * law.d)


def spectral_cdf(law: MPLaw, x) -> np.ndarray | float:
    """Limiting CDF of the N x N spectrum, including the atom at zero
    carrying mass 1 - 1/d when d > 1."""
    x_arr = np.atleast_1d(np.asarray(x, dtype=float))
    atom = max(0.0, 1.0 - 1.0 / law.d)
    out = np.empty_like(x_arr)
    for i, xi in enumerate(x_arr):
        if xi < 0:
            out[i] = 0.0
        else:
            out[i] = atom + (law.mass - tail_mass(law, xi))
    if np.isscalar(x) or np.asarray(x).ndim == 0:
        return float(out[0])
    return out


@dataclass(frozen=True)
class ClassicalLocations:
    """Deterministic quantiles gamma_j of the law, j = 1..n. Entries whose
    quantile exceeds the total continuous mass (possible for d > 1) are
    pinned to lambda_minus and flagged."""

    values: np.ndarray
    pinned: np.ndarray

    def __len__(self) -> int:
        return len(self.values)


def classical_locations(law: MPLaw, n: int) -> ClassicalLocations:
    """Solve tail_mass(gamma_j) = j/n for j = 1..n by bracketed root finding.

    The defining integral is satisfied to well below 1e-8 in the mass; the
    sequence is strictly decreasing while j/n stays within the law's mass.
    """
    if n < 1:
        raise ConfigurationError("need at least one location")
    lm, lp = law.lambda_minus, law.lambda_plus
    values = np.empty(n)
    pinned = np.zeros(n, dtype=bool)
    total = law.mass
    for j in range(1, n + 1):
        target = j / n
        if target >= total - 1e-15:
            values[j - 1] = lm
            pinned[j - 1] = target > total + 1e-12
            continue
        values[j - 1] = brentq(lambda x: tail_mass(law, x) - target,
                               lm, lp, xtol=1e-14, rtol=8.9e-16)
    return ClassicalLocations(values=values, pinned=pinned)


def varphi(n) -> float:
    """(log n)^(log log n), the poly-log envelope base of the
    high-probability gates. Requires log log n > 0, i.e. n > e."""
    n = float(n)
    if n <= 1.0:
        raise DomainError("varphi needs n > e")
    loglog = math.log(math.log(n))
    if loglog <= 0.0:
        raise DomainError(f"varphi undefined for n = {n:g}: log log n <= 0")
    return math.log(n) ** loglog
