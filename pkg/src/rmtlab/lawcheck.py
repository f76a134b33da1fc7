"""Empirical verification of the strong local law, extreme-eigenvalue
confinement, and eigenvalue rigidity.

High-probability statements become frequency assertions at desk scale:
an event gated by a poly-log envelope must hold in at least a configured
fraction of trials (99% by default, envelope exponent 3). Both knobs are
parameters, never asserted constants.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .errors import ConfigurationError
from .mplaw import MPLaw, SpectralDomain, classical_locations, spectral_cdf, stieltjes
from .spectra import Spectrum, empirical_stieltjes

__all__ = [
    "DeviationGrid",
    "RigidityProfile",
    "index_weights",
    "local_law_deviation",
    "extreme_bound_check",
    "rigidity_profile",
    "kolmogorov_distance",
]


@dataclass(frozen=True)
class DeviationGrid:
    """Normalized local-law deviations N*eta*|m - m_W| over a z-grid."""

    energies: np.ndarray
    etas: np.ndarray
    values: np.ndarray  # shape (n_eta, n_energy)

    @property
    def sup(self) -> float:
        return float(self.values.max())


def local_law_deviation(spectrum: Spectrum, law: MPLaw,
                        domain: SpectralDomain) -> DeviationGrid:
    """Evaluate N*eta*|m(z) - m_W(z)| on the domain grid."""
    energies = domain.energies()
    etas = domain.etas()
    if energies.size == 0 or etas.size == 0:
        raise ConfigurationError("empty spectral grid")
    z = energies[None, :] + 1j * etas[:, None]
    m_emp = empirical_stieltjes(spectrum, z)
    m_law = stieltjes(law, z)
    values = spectrum.n * etas[:, None] * np.abs(m_emp - m_law)
    return DeviationGrid(energies=energies, etas=etas, values=values)


def extreme_bound_check(spectrum: Spectrum, law: MPLaw, envelope: float) -> bool:
    """True iff the largest eigenvalue and the smallest nontrivial one sit
    within envelope * N^{-2/3} of the respective spectral edges."""
    if not envelope > 0:
        raise ConfigurationError("envelope must be positive")
    slack = envelope * spectrum.n ** (-2.0 / 3.0)
    nontrivial = spectrum.values[: spectrum.n_nontrivial]
    return bool(nontrivial[0] <= law.lambda_plus + slack
                and nontrivial[-1] >= law.lambda_minus - slack)


def index_weights(n_nontrivial: int) -> np.ndarray:
    """Edge-symmetric index weight min(j, n+1-j) for j = 1..n."""
    j = np.arange(1, n_nontrivial + 1)
    return np.minimum(j, n_nontrivial + 1 - j)


@dataclass(frozen=True)
class RigidityProfile:
    """Per-index eigenvalue deviations from the classical locations, raw
    and normalized by N^{2/3} times the cube root of the edge-symmetric
    index weight."""

    deviations: np.ndarray
    normalized: np.ndarray

    @property
    def max_normalized(self) -> float:
        return float(self.normalized.max())


def rigidity_profile(spectrum: Spectrum, law: MPLaw) -> RigidityProfile:
    """Compare the min(m, n) nontrivial eigenvalues against the classical
    locations of the law at resolution 1/n."""
    k = spectrum.n_nontrivial
    gamma = classical_locations(law, spectrum.n).values[:k]
    dev = np.abs(spectrum.values[:k] - gamma)
    weights = index_weights(k).astype(float)
    normalized = dev * spectrum.n ** (2.0 / 3.0) * weights ** (1.0 / 3.0)
    return RigidityProfile(deviations=dev, normalized=normalized)


def kolmogorov_distance(spectrum: Spectrum, law: MPLaw) -> float:
    """Sup distance between the empirical CDF of the n Gram eigenvalues
    and the limiting spectral CDF.

    For d > 1 the limit carries an atom at zero (the padded kernel block),
    so both one-sided jumps are compared through left limits rather than
    assuming a continuous reference.
    """
    lam = np.sort(spectrum.gram_eigenvalues())
    n = len(lam)
    values, counts = np.unique(lam, return_counts=True)
    cum = np.cumsum(counts)
    emp_right = cum / n
    emp_left = (cum - counts) / n
    atom = max(0.0, 1.0 - 1.0 / law.d)
    cdf_right = np.asarray(spectral_cdf(law, values), dtype=float)
    cdf_left = cdf_right - atom * (values == 0.0)
    return float(max(np.max(np.abs(emp_right - cdf_right)),
                     np.max(np.abs(emp_left - cdf_left))))
