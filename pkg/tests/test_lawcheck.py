import math

import numpy as np
import pytest

from rmtlab import (EnsembleSpec, EntryDistribution, MPLaw, SpectralDomain,
                    Spectrum, classical_locations, eigenvalues, sample_raw,
                    standardize_columns)
from rmtlab.errors import ConfigurationError
from rmtlab.lawcheck import (extreme_bound_check, index_weights, kolmogorov_distance,
                             local_law_deviation, rigidity_profile)


def correlation_spectrum(m, n, seed=0, trial=0):
    spec = EnsembleSpec(m=m, n=n, dist=EntryDistribution.GAUSSIAN, seed=seed)
    return eigenvalues(standardize_columns(sample_raw(spec, trial=trial)))


def synthetic_spectrum(law: MPLaw, n: int, m: int) -> Spectrum:
    """Spectrum placed exactly at the classical locations."""
    values = classical_locations(law, n).values[: min(m, n)]
    padded = np.concatenate([values, np.zeros(max(m, n) - len(values))])
    return Spectrum(values=padded, m=m, n=n)


def test_index_weights_symmetric_edges():
    w = index_weights(10)
    assert w[0] == 1 and w[-1] == 1
    assert w[4] == 5 and w[5] == 5
    assert np.all(w >= 1)


def test_rigidity_zero_for_classical_spectrum():
    law = MPLaw(d=0.25)
    spectrum = synthetic_spectrum(law, 40, 160)
    profile = rigidity_profile(spectrum, law)
    assert profile.max_normalized == 0.0
    assert np.all(profile.deviations == 0.0)


def test_rigidity_profile_deterministic_and_positive():
    law = MPLaw(d=0.25)
    spectrum = correlation_spectrum(160, 40, seed=3)
    p1 = rigidity_profile(spectrum, law)
    p2 = rigidity_profile(spectrum, law)
    assert np.array_equal(p1.normalized, p2.normalized)
    assert len(p1.deviations) == 40
    assert p1.max_normalized > 0


def test_local_law_deviation_grid_properties():
    law = MPLaw(d=0.25)
    n, m = 60, 240
    spectrum = correlation_spectrum(m, n, seed=5)
    domain = SpectralDomain.for_law(law, n)
    grid = local_law_deviation(spectrum, law, domain)
    assert grid.values.shape == (12, 48)
    assert np.all(grid.values >= 0)
    assert grid.sup == grid.values.max()
    # a spectrum at the classical locations tracks the law closely
    synthetic = local_law_deviation(synthetic_spectrum(law, n, m), law, domain)
    assert synthetic.sup < math.log(n) ** 3


def test_local_law_empty_grid_rejected():
    law = MPLaw(d=0.25)
    with pytest.raises(ConfigurationError):
        SpectralDomain(e_min=0, e_max=1, eta_min=0.1, eta_max=1, n_energy=0)
    spectrum = correlation_spectrum(80, 20, seed=1)
    domain = SpectralDomain.for_law(law, 20)
    object.__setattr__(domain, "n_energy", 48)  # keep dataclass honest
    assert local_law_deviation(spectrum, law, domain).values.size > 0


def test_extreme_bound_check_boundaries():
    law = MPLaw(d=0.25)
    spectrum = correlation_spectrum(160, 40, seed=7)
    assert extreme_bound_check(spectrum, law, envelope=1e308)
    # push the top eigenvalue far outside the allowed window
    bad = spectrum.values.copy()
    bad[0] = law.lambda_plus + 1.0
    bad_spectrum = Spectrum(values=bad, m=spectrum.m, n=spectrum.n)
    envelope = 0.5 * spectrum.n ** (2.0 / 3.0)  # envelope * n^(-2/3) = 0.5 < 1
    assert not extreme_bound_check(bad_spectrum, law, envelope)
    with pytest.raises(ConfigurationError):
        extreme_bound_check(spectrum, law, envelope=0.0)


def test_extreme_bound_ignores_padding_zeros():
    # d > 1: the padded zero block must not trip the lower-edge check
    law = MPLaw(d=2.0)
    spectrum = correlation_spectrum(30, 60, seed=9)
    assert np.any(spectrum.values == 0.0)
    assert extreme_bound_check(spectrum, law, envelope=math.log(60) ** 3)


def test_empirical_law_kolmogorov_distance_shrinks_with_n():
    # desk-scale convergence of the spectral distribution: median distance
    # over 50 trials strictly decreasing along n in {100, 200, 400}
    law = MPLaw(d=0.25)
    medians = []
    for n in (100, 200, 400):
        dists = [kolmogorov_distance(correlation_spectrum(4 * n, n, seed=13, trial=t), law)
                 for t in range(50)]
        medians.append(np.median(dists))
    assert medians[0] > medians[1] > medians[2]


def test_kolmogorov_distance_includes_atom_for_wide_matrices():
    law = MPLaw(d=2.0)
    d = kolmogorov_distance(correlation_spectrum(50, 100, seed=3), law)
    assert 0 <= d < 0.2
