import cmath
import math

import numpy as np
import pytest

from rmtlab import (DataMatrix, EnsembleSpec, EntryDistribution, MPLaw, column_swap,
                    raw_column, removed_column, sample_raw, standardize_columns)
from rmtlab.errors import ConfigurationError, DomainError
from rmtlab.greencmp import (FUNCTIONALS, baseline_mu, comparison_record, default_edge_z,
                             endpoint_difference, expansion_quantities, identity_suite,
                             telescope_step_samples, telescoping_difference)


def make_pair(m=60, n=24, seed=31, trial=0):
    spec = EnsembleSpec(m=m, n=n, dist=EntryDistribution.GAUSSIAN, seed=seed)
    raw = sample_raw(spec, trial=trial)
    return spec, raw, standardize_columns(raw)


def test_default_edge_z_location():
    law = MPLaw(d=0.4)
    z = default_edge_z(law, 200, epsilon=0.05)
    assert z.real == law.lambda_plus
    assert z.imag == pytest.approx(200 ** (-2 / 3 - 0.05))
    with pytest.raises(ConfigurationError):
        default_edge_z(law, 200, epsilon=0.5)


def test_baseline_mu_ignores_first_column_bitwise():
    spec, raw, std = make_pair()
    z = default_edge_z(MPLaw(d=spec.d), spec.n)
    mu = baseline_mu(std, z)
    # resample column 1 from a different trial stream; mu must not move
    resampled = std.entries.copy()
    resampled[:, 0] = raw_column(spec, 0, trial=77)
    mu_resampled = baseline_mu(DataMatrix(entries=resampled, standardized=False), z)
    assert mu == mu_resampled  # bit-for-bit
    assert isinstance(mu, float)


def test_baseline_mu_vanishes_with_eta():
    _, _, std = make_pair()
    law = MPLaw(d=std.n / std.m)
    for eta in (1e-4, 1e-6, 1e-8):
        mu = baseline_mu(std, complex(law.lambda_plus, eta))
        assert abs(mu) < 50 * eta
    with pytest.raises(DomainError):
        baseline_mu(std, complex(1.0, -0.1))


def test_expansion_terms_follow_geometric_ratio():
    spec, raw, std = make_pair()
    law = MPLaw(d=spec.d)
    z = default_edge_z(law, spec.n)
    q = expansion_quantities(std, z, law)
    assert q.terms[1] == pytest.approx(q.terms[0] * (-q.ratio), rel=1e-12)
    assert q.terms[2] == pytest.approx(q.terms[1] * (-q.ratio), rel=1e-12)


def test_identity_suite_residuals_random_instances():
    rng = np.random.default_rng(12)
    for seed in range(6):
        m, n = (50, 20) if seed % 2 else (20, 50)
        spec, raw, std = make_pair(m=m, n=n, seed=seed)
        z = complex(rng.uniform(0.1, 3.0), rng.uniform(0.05, 1.5))
        for x in (std, raw):
            report = identity_suite(x, z)
            assert report.max_residual <= 1e-8, report.residuals


def test_identity_suite_small_exact_case():
    spec, raw, std = make_pair(m=3, n=2, seed=2)
    report = identity_suite(std, 1j)
    assert report.residuals["removed_trace_gap"] <= 1e-10
    assert report.residuals["rank_one_update"] <= 1e-10
    assert report.residuals["leading_entry_inverse"] <= 1e-10
    with pytest.raises(DomainError):
        identity_suite(std, 1.0)


def test_quadratic_trace_bound_chain_exact():
    # |tr R^2| <= Im tr R / eta for the outer resolvent: an eigenvalue
    # inequality that holds without any residual
    spec, raw, std = make_pair(m=40, n=16, seed=5)
    red = removed_column(std, 0)
    for eta in (1e-1, 1e-3, 1e-5):
        z = complex(1.2, eta)
        lhs = abs(red.trace_outer_resolvent_sq(z))
        rhs = red.trace_outer_resolvent(z).imag / eta
        assert lhs <= rhs * (1 + 1e-12)


def test_comparison_record_bundles_quantities():
    spec, raw, std = make_pair()
    law = MPLaw(d=spec.d)
    z = default_edge_z(law, spec.n)
    record = comparison_record(std, z, law)
    assert record.mu == baseline_mu(std, z)
    assert record.residuals and max(record.residuals.values()) <= 1e-8
    assert len(record.terms) == 3


def test_telescope_step_zero_when_column_already_unit():
    # if column gamma of the raw matrix already has unit norm, the two
    # hybrid matrices coincide and the step difference is exactly zero
    spec, raw, std = make_pair(m=30, n=12, seed=9)
    entries = raw.entries.copy()
    gamma = 4
    entries[:, gamma - 1] /= np.linalg.norm(entries[:, gamma - 1])
    raw_unit = DataMatrix(entries=entries, standardized=False)
    std_unit = standardize_columns(raw_unit)
    upper = column_swap(std_unit, raw_unit, gamma)
    lower = column_swap(std_unit, raw_unit, gamma - 1)
    assert np.array_equal(upper.entries, lower.entries)


def test_telescoping_difference_and_gamma_validation():
    spec, _, _ = make_pair(m=40, n=16, seed=15)
    est = telescoping_difference(spec, 1, FUNCTIONALS[0], trials=24)
    assert est.trials == 24
    assert est.std_error > 0
    with pytest.raises(ConfigurationError):
        telescoping_difference(spec, 0, FUNCTIONALS[0], trials=4)
    with pytest.raises(ConfigurationError):
        telescoping_difference(spec, spec.n + 1, FUNCTIONALS[0], trials=4)


def test_telescoping_sum_reproduces_endpoint_difference():
    # independent trials per step: the summed estimates match a separately
    # estimated endpoint difference within combined Monte Carlo error
    n, m, trials = 16, 40, 160
    spec = EnsembleSpec(m=m, n=n, dist=EntryDistribution.GAUSSIAN, seed=41)
    functional = FUNCTIONALS[0]
    z = default_edge_z(MPLaw(d=spec.d), n)
    total, var = 0.0, 0.0
    for gamma in range(1, n + 1):
        steps = telescope_step_samples(spec, gamma, functional, z, trials=trials,
                                       trial_offset=gamma * trials)
        total += steps.mean()
        var += steps.var(ddof=1) / trials
    end = endpoint_difference(spec, functional, z, trials=4 * trials,
                              trial_offset=(n + 2) * trials)
    combined = math.sqrt(var + end.std_error ** 2)
    assert abs(total - end.estimate) <= 5 * combined


def test_functionals_cover_growth_classes():
    names = [f.name for f in FUNCTIONALS]
    assert names == ["identity", "square", "saturating"]
    assert FUNCTIONALS[1].fn(3.0) == 9.0
    assert abs(FUNCTIONALS[2].fn(50.0)) <= 1.0
