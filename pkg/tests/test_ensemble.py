import math

import numpy as np
import pytest

from rmtlab import (DataMatrix, EnsembleSpec, EntryDistribution, column_swap,
                    large_deviation_check, raw_column, sample_raw, standardize_columns)
from rmtlab.errors import ConfigurationError, DegenerateInputError

ALL_DISTS = tuple(EntryDistribution)


def spec_of(m=100, n=40, dist=EntryDistribution.GAUSSIAN, seed=11):
    return EnsembleSpec(m=m, n=n, dist=dist, seed=seed)


def test_spec_validation():
    with pytest.raises(ConfigurationError):
        EnsembleSpec(m=0, n=10, dist=EntryDistribution.GAUSSIAN, seed=1)
    with pytest.raises(ConfigurationError):
        EnsembleSpec(m=10, n=0, dist=EntryDistribution.GAUSSIAN, seed=1)
    # d = 1 excluded
    with pytest.raises(ConfigurationError):
        EnsembleSpec(m=50, n=50, dist=EntryDistribution.GAUSSIAN, seed=1)
    # d outside (theta, 1/theta)
    with pytest.raises(ConfigurationError):
        EnsembleSpec(m=1000, n=10, dist=EntryDistribution.GAUSSIAN, seed=1)
    with pytest.raises(ConfigurationError):
        EnsembleSpec(m=10, n=1000, dist=EntryDistribution.GAUSSIAN, seed=1)
    assert spec_of().d == 0.4


def test_rademacher_entries_are_half_magnitude():
    # m = 4 gives scaling 1/2, so every entry is +-0.5
    spec = EnsembleSpec(m=4, n=2, dist=EntryDistribution.RADEMACHER, seed=3)
    x = sample_raw(spec)
    assert set(np.unique(np.abs(x.entries))) == {0.5}


def test_global_mean_law_of_large_numbers():
    spec = EnsembleSpec(m=10_000, n=1000, dist=EntryDistribution.GAUSSIAN, seed=5)
    x = sample_raw(spec)
    # entries have sd 1e-2; the grand mean over m*n of them has sd 1e-2/sqrt(m*n)
    bound = 5 * 1e-2 / math.sqrt(10_000 * 1000)
    assert abs(x.entries.mean()) < bound


def test_determinism_and_trial_separation():
    spec = spec_of()
    a = sample_raw(spec, trial=4)
    b = sample_raw(spec, trial=4)
    c = sample_raw(spec, trial=5)
    assert np.array_equal(a.entries, b.entries)
    assert not np.array_equal(a.entries, c.entries)
    other_seed = sample_raw(spec_of(seed=12), trial=4)
    assert not np.array_equal(a.entries, other_seed.entries)


def test_columns_have_independent_streams():
    spec = spec_of()
    x = sample_raw(spec, trial=2)
    for j in (0, 7, spec.n - 1):
        assert np.array_equal(raw_column(spec, j, trial=2), x.entries[:, j])
    with pytest.raises(ConfigurationError):
        raw_column(spec, spec.n, trial=0)


@pytest.mark.parametrize("dist", ALL_DISTS)
def test_entry_moments_and_tails(dist):
    spec = EnsembleSpec(m=2000, n=500, dist=dist, seed=29)
    q = sample_raw(spec).entries * math.sqrt(spec.m)  # back to unit variance
    flat = q.ravel()
    n = flat.size
    # mean 0 and variance 1 within 5 standard errors
    assert abs(flat.mean()) < 5 * flat.std() / math.sqrt(n)
    se_var = np.square(flat).std() / math.sqrt(n)
    assert abs(np.square(flat).mean() - 1.0) <= 5 * se_var + 1e-12
    # sub-exponential envelope with theta = 1: P(|q| > u) <= exp(-u)
    for u in (2.0, 3.0, 5.0):
        assert np.mean(np.abs(flat) > u) <= math.exp(-u) + 5 / math.sqrt(n)


def test_standardize_columns_unit_norm():
    x = sample_raw(spec_of())
    std = standardize_columns(x)
    norms = np.linalg.norm(std.entries, axis=0)
    assert np.max(np.abs(norms - 1.0)) < 1e-12
    assert std.standardized


def test_standardize_examples():
    col = np.array([[0.5], [0.5], [0.5], [0.5]])
    out = standardize_columns(DataMatrix(entries=col, standardized=False))
    assert np.allclose(out.entries, col, atol=1e-15)
    pythag = np.array([[3.0], [4.0]])
    out = standardize_columns(DataMatrix(entries=pythag, standardized=False))
    assert np.allclose(out.entries[:, 0], [0.6, 0.8], atol=1e-15)


def test_standardize_degenerate_and_double():
    zero_col = np.zeros((3, 2))
    zero_col[:, 1] = 1.0
    with pytest.raises(DegenerateInputError):
        standardize_columns(DataMatrix(entries=zero_col, standardized=False))
    std = standardize_columns(sample_raw(spec_of()))
    with pytest.raises(ConfigurationError):
        standardize_columns(std)


def test_column_swap_boundaries_and_single_column_change():
    raw = sample_raw(spec_of())
    std = standardize_columns(raw)
    assert np.array_equal(column_swap(std, raw, 0).entries, std.entries)
    assert np.array_equal(column_swap(std, raw, raw.n).entries, raw.entries)
    one = column_swap(std, raw, 1)
    assert np.array_equal(one.entries[:, 0], raw.entries[:, 0])
    assert np.array_equal(one.entries[:, 1:], std.entries[:, 1:])
    assert not one.standardized
    # consecutive swap levels differ in exactly one column
    for gamma in (1, 5, raw.n):
        hi = column_swap(std, raw, gamma).entries
        lo = column_swap(std, raw, gamma - 1).entries
        changed = np.nonzero(np.any(hi != lo, axis=0))[0]
        assert list(changed) == [gamma - 1]


def test_column_swap_validation():
    raw = sample_raw(spec_of())
    std = standardize_columns(raw)
    with pytest.raises(ConfigurationError):
        column_swap(std, raw, -1)
    with pytest.raises(ConfigurationError):
        column_swap(std, raw, raw.n + 1)
    with pytest.raises(ConfigurationError):
        column_swap(raw, std, 1)  # arguments swapped
    other = sample_raw(spec_of(seed=99))
    with pytest.raises(ConfigurationError):
        column_swap(std, other, 1)  # not derived from the same draws
    small = sample_raw(spec_of(m=50, n=20))
    with pytest.raises(ConfigurationError):
        column_swap(std, small, 1)


def test_standardized_gaussian_column_matches_sphere_moment():
    # a standardized Gaussian column is uniform on the sphere, so the
    # first coordinate squared has mean exactly 1/m
    spec = spec_of(m=64, n=20)
    trials = 4000
    vals = np.empty(trials)
    for t in range(trials):
        col = raw_column(spec, 0, trial=t)
        vals[t] = (col[0] / np.linalg.norm(col)) ** 2
    se = vals.std() / math.sqrt(trials)
    assert abs(vals.mean() - 1.0 / spec.m) < 5 * se


def test_standardized_diagonal_identity_is_exact():
    # for a standardized column against the identity kernel the centered
    # diagonal form vanishes by the norm constraint
    spec = spec_of()
    col = raw_column(spec, 0, trial=1)
    a = col / np.linalg.norm(col)
    sigma2 = 1.0 / spec.m
    assert abs(a @ a - sigma2 * spec.m) < 1e-12
    # and the linear bound holds trivially for a zero test vector
    assert abs(a @ np.zeros(spec.m)) <= 0.0


def test_large_deviation_check_calibration():
    # poly-log factor (log m)^3 at m = 400: essentially never violated
    spec = EnsembleSpec(m=400, n=100, dist=EntryDistribution.GAUSSIAN, seed=2)
    report = large_deviation_check(spec, trials=1000)
    assert report.factor == pytest.approx(math.log(400) ** 3)
    assert report.failure_rate <= 0.01


def test_large_deviation_check_custom_factor_fails_sometimes():
    # factor far below the fluctuation scale must be violated: sanity that
    # the check actually measures something
    spec = EnsembleSpec(m=200, n=50, dist=EntryDistribution.GAUSSIAN, seed=2)
    report = large_deviation_check(spec, trials=50, factor=0.1)
    assert report.failure_rate > 0.5
    with pytest.raises(ConfigurationError):
        large_deviation_check(spec, trials=0)
