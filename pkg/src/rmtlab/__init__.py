"""rmtlab: a spectral laboratory for covariance and correlation random
matrix ensembles.

Submodules:

  ensemble   raw data matrices, column standardization, column-swap hybrids
  mplaw      closed-form limiting spectral law (edges, density, transform,
             classical locations)
  spectra    eigenvalues and removed-column resolvent quantities
  lawcheck   local-law, extreme-eigenvalue, and rigidity verification
  edgestats  edge rescaling, reference CDF, KS tests, sandwich comparison
  greencmp   resolvent comparison identities and telescoping differences
  momentcmp  set-partition moment calculus and kernel-sum bounds
  experiments / cli / figures   run orchestration, CLI, and plots
"""

from .ensemble import (DataMatrix, EnsembleSpec, EntryDistribution, column_swap,
                       large_deviation_check, raw_column, sample_raw,
                       standardize_columns)
from .errors import (ComputationError, ConfigurationError, DegenerateInputError,
                     DomainError)
from .mplaw import (MPLaw, SpectralDomain, classical_locations, density,
                    spectral_cdf, stieltjes, tail_mass, varphi)
from .spectra import (RemovedColumn, ResolventSample, Spectrum, eigenvalues,
                      empirical_stieltjes, removed_column, resolvent_quantities)

__version__ = "0.1.0"

__all__ = [
    "ComputationError",
    "ConfigurationError",
    "DataMatrix",
    "DegenerateInputError",
    "DomainError",
    "EnsembleSpec",
    "EntryDistribution",
    "MPLaw",
    "RemovedColumn",
    "ResolventSample",
    "SpectralDomain",
    "Spectrum",
    "classical_locations",
    "column_swap",
    "density",
    "eigenvalues",
    "empirical_stieltjes",
    "large_deviation_check",
    "raw_column",
    "removed_column",
    "resolvent_quantities",
    "sample_raw",
    "spectral_cdf",
    "standardize_columns",
    "stieltjes",
    "tail_mass",
    "varphi",
]
