"""Eigenvalue and resolvent computations for the Gram matrix of a data
matrix X.

Eigenvalues are always obtained as squared singular values of X itself
(never by forming the Gram matrix), which is the stable route near the
lower spectral edge. Removed-column resolvent quantities come from one
SVD of the reduced matrix; the factorization is reusable across spectral
parameters z.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .ensemble import DataMatrix
from .errors import ComputationError, DomainError

__all__ = [
    "Spectrum",
    "RemovedColumn",
    "ResolventSample",
    "eigenvalues",
    "empirical_stieltjes",
    "removed_column",
    "resolvent_quantities",
]


@dataclass(frozen=True)
class Spectrum:
    """Descending eigenvalues of the n x n Gram matrix, zero-padded to
    max(m, n) so that both Gram orderings share one array."""

    values: np.ndarray
    m: int
    n: int

    def __post_init__(self) -> None:
        if len(self.values) != max(self.m, self.n):
            raise ComputationError("spectrum must be padded to max(m, n) values")
        if np.any(self.values < 0) or np.any(np.diff(self.values) > 0):
            raise ComputationError("spectrum must be nonnegative and descending")
        self.values.setflags(write=False)

    @property
    def n_nontrivial(self) -> int:
        return min(self.m, self.n)

    def gram_eigenvalues(self) -> np.ndarray:
        """The n eigenvalues of the n x n Gram matrix (padding included
        when n > m)."""
        return self.values[: self.n]


def eigenvalues(x: DataMatrix) -> Spectrum:
    """Squared singular values of X, sorted descending, padded with
    max(m, n) - min(m, n) zeros."""
    try:
        sv = np.linalg.svd(x.entries, compute_uv=False)
    except np.linalg.LinAlgError as exc:
        raise ComputationError(
            f"singular value decomposition failed for shape {x.entries.shape}: {exc}") from exc
    m, n = x.m, x.n
    vals = np.concatenate([sv ** 2, np.zeros(max(m, n) - min(m, n))])
    return Spectrum(values=vals, m=m, n=n)


def empirical_stieltjes(spectrum: Spectrum, z) -> np.ndarray | complex:
    """(1/n) sum_j 1/(lambda_j - z) over the n Gram eigenvalues."""
    z_arr = np.asarray(z, dtype=complex)
    if np.any(z_arr.imag <= 0):
        raise DomainError("empirical Stieltjes transform requires Im z > 0")
    lam = spectrum.gram_eigenvalues()
    m = np.mean(1.0 / (lam.reshape(lam.shape + (1,) * z_arr.ndim) - z_arr), axis=0)
    if np.isscalar(z) or z_arr.ndim == 0:
        return complex(m)
    return m


@dataclass(frozen=True)
class RemovedColumn:
    """SVD factorization of X with one column removed, prepared so that
    traces and quadratic forms of either reduced resolvent are O(r) per
    spectral parameter.

    singular_sq are the r = min(m, n-1) squared singular values; weights
    are the components of the removed column on the left singular vectors;
    orthogonal_sq is its squared norm off that range.
    """

    m: int
    n: int
    singular_sq: np.ndarray
    weights: np.ndarray
    orthogonal_sq: float
    column: np.ndarray

    @property
    def rank(self) -> int:
        return len(self.singular_sq)

    def trace_gram_resolvent(self, z: complex) -> complex:
        """tr (X1' X1 - z)^{-1} over the (n-1) x (n-1) Gram matrix."""
        core = np.sum(1.0 / (self.singular_sq - z))
        return core + (self.n - 1 - self.rank) * (-1.0 / z)

    def trace_outer_resolvent(self, z: complex) -> complex:
        """tr (X1 X1' - z)^{-1} over the m x m outer Gram matrix."""
        core = np.sum(1.0 / (self.singular_sq - z))
        return core + (self.m - self.rank) * (-1.0 / z)

    def trace_outer_resolvent_sq(self, z: complex) -> complex:
        """tr of the squared m x m resolvent."""
        core = np.sum(1.0 / (self.singular_sq - z) ** 2)
        return core + (self.m - self.rank) / z ** 2

    def quad_form(self, z: complex, power: int = 1) -> complex:
        """(x1, R^power x1) for the m x m resolvent R, power in {1, 2}."""
        if power not in (1, 2):
            raise DomainError("only resolvent powers 1 and 2 are supported")
        core = np.sum(self.weights ** 2 / (self.singular_sq - z) ** power)
        return core + self.orthogonal_sq * (-1.0 / z) ** power


def removed_column(x: DataMatrix, column: int = 0) -> RemovedColumn:
    """Factor X with `column` removed; the removed column itself is kept
    for the quadratic forms.

    The eigendecomposition runs on whichever Gram ordering is smaller,
    which is substantially cheaper than a rectangular SVD when the matrix
    is far from square.
    """
    entries = x.entries
    x1 = np.delete(entries, column, axis=1)
    col = entries[:, column].copy()
    m, r = x.m, x.n - 1
    try:
        if m <= r:
            # outer side is square of size m: eigenvectors give the
            # quadratic-form weights directly and span all of R^m
            mu, u = np.linalg.eigh(x1 @ x1.T)
            w = u.T @ col
            orth = 0.0
        else:
            mu, v = np.linalg.eigh(x1.T @ x1)
            sv = np.sqrt(np.maximum(mu, 0.0))
            if np.any(sv == 0.0):
                raise ComputationError("rank-deficient reduced matrix")
            w = ((x1.T @ col) @ v) / sv
            orth = float(max(col @ col - w @ w, 0.0))
    except np.linalg.LinAlgError as exc:
        raise ComputationError(f"reduced factorization failed for shape {x1.shape}: {exc}") from exc
    order = np.argsort(np.maximum(mu, 0.0))[::-1]
    return RemovedColumn(m=x.m, n=x.n, singular_sq=np.maximum(mu, 0.0)[order],
                         weights=w[order], orthogonal_sq=orth, column=col)


@dataclass(frozen=True)
class ResolventSample:
    """Resolvent quantities of one data matrix at one spectral parameter:
    full trace and leading diagonal entry, removed-column traces of both
    Gram orderings, and the quadratic forms of the removed column against
    the first two powers of the outer resolvent."""

    z: complex
    trace_g: complex
    g11: complex
    trace_g1: complex
    trace_outer_g1: complex
    quad1: complex
    quad2: complex


def resolvent_quantities(x: DataMatrix, z: complex) -> ResolventSample:
    if complex(z).imag <= 0:
        raise DomainError("resolvent quantities require Im z > 0")
    z = complex(z)
    try:
        u, sv, vt = np.linalg.svd(x.entries, full_matrices=False)
    except np.linalg.LinAlgError as exc:
        raise ComputationError(f"SVD failed for shape {x.entries.shape}: {exc}") from exc
    lam = sv ** 2
    n = x.n
    # Gram spectrum of the full matrix, padded with zero modes when n > m
    trace_g = np.sum(1.0 / (lam - z)) + (n - len(lam)) * (-1.0 / z)
    w1 = vt[:, 0] ** 2
    g11 = np.sum(w1 / (lam - z)) + (1.0 - w1.sum()) * (-1.0 / z)
    red = removed_column(x, 0)
    sample = ResolventSample(
        z=z,
        trace_g=complex(trace_g),
        g11=complex(g11),
        trace_g1=complex(red.trace_gram_resolvent(z)),
        trace_outer_g1=complex(red.trace_outer_resolvent(z)),
        quad1=complex(red.quad_form(z, 1)),
        quad2=complex(red.quad_form(z, 2)),
    )
    if sample.trace_g.imag <= 0:
        raise ComputationError("positivity violated: Im tr G <= 0 for Im z > 0")
    return sample
