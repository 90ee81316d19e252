import math

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st
from scipy import integrate, optimize, stats

from qoptml import bounds
from qoptml.estimators import SqueezedProbe


def _normal(mean, var):
    return lambda x: math.exp(-((x - mean) ** 2) / (2 * var)) / math.sqrt(2 * math.pi * var)


def test_gaussian_location_fisher():
    res = bounds.fisher_numeric(lambda x, m: _normal(m, 0.25)(x), 0.3, (0.3 - 3, 0.3 + 3))
    assert res.fisher == pytest.approx(4.0, rel=1e-6)
    assert bounds.gaussian_location_fisher(0.25) == 4.0


@pytest.mark.parametrize("A,r,eta", [(2.0, 0.0, 1.0), (3.0, 0.8, 1.0), (1.5, 0.5, 0.8), (5.0, 1.2, 0.6)])
def test_squeezed_phase_fisher_numeric(A, r, eta):
    var = (math.exp(-2 * r) + (1 - eta) / eta) / 4
    sd = math.sqrt(var)
    res = bounds.fisher_numeric(lambda y, psi: _normal(A * math.sin(psi), var)(y), 0.0, (-12 * sd, 12 * sd))
    assert res.fisher == pytest.approx(bounds.homodyne_phase_fisher(A, r, eta), rel=1e-6)
    if eta == 1.0:
        assert res.fisher == pytest.approx(4 * A * A * math.exp(2 * r), rel=1e-6)


@pytest.mark.parametrize("eta,alpha_sq", [(0.3, 1.0), (0.7, 1.0), (0.95, 1.0), (0.5, 0.05), (0.9, 4.0)])
def test_onoff_fisher_numeric(eta, alpha_sq):
    def pmf(k, e):
        p0 = math.exp(-e * alpha_sq)
        return p0 if k == 0 else 1 - p0

    res = bounds.fisher_numeric(pmf, eta, outcomes=(0, 1))
    assert res.fisher == pytest.approx(bounds.onoff_fisher(eta, alpha_sq).fisher, rel=1e-8)


@pytest.mark.parametrize("eta,r", [(0.3, 1.0), (0.7, 2.65), (1.0, 0.5)])
def test_linear_detector_fisher_numeric(eta, r):
    probe = SqueezedProbe(x0=0.8, r=r)

    def pdf(x, e):
        return _normal(e * probe.x0, (math.exp(-2 * r) + 1 - e) / 4)(x)

    sd = math.sqrt(probe.variance(eta))
    res = bounds.fisher_numeric(pdf, eta, (eta * probe.x0 - 12 * sd, eta * probe.x0 + 12 * sd))
    assert res.fisher == pytest.approx(probe.fisher(eta), rel=1e-6)


def test_random_phase_homodyne_fisher():
    # coherent amplitude A, uniform LO phase, quadrature variance 1/4: F = 2 A^2 per record
    A = 2.0

    def fixed_phase(phi):
        mean = lambda psi: A * math.cos(phi - psi)
        return bounds.fisher_numeric(lambda x, psi: _normal(mean(psi), 0.25)(x), 0.0, (-A - 4, A + 4)).fisher

    avg, _ = integrate.quad(fixed_phase, 0, 2 * math.pi, limit=200)
    assert avg / (2 * math.pi) == pytest.approx(2 * A * A, rel=1e-6)
    assert bounds.phase_crlb_coherent(A * A, 1) == pytest.approx(1 / math.sqrt(2 * A * A))


def test_fisher_needs_exactly_one_domain():
    with pytest.raises(ValueError):
        bounds.fisher_numeric(lambda x, l: 1.0, 0.0)


def test_coherent_bound_values():
    assert bounds.phase_crlb_coherent(50, 5000) == pytest.approx(1.414e-3, rel=1e-3)
    assert bounds.phase_crlb_coherent(50, 20000) == pytest.approx(bounds.phase_crlb_coherent(50, 5000) / 2)
    assert bounds.phase_crlb_coherent(1, 1) == pytest.approx(1 / math.sqrt(2))


def test_squeezed_bound_values():
    assert bounds.phase_crlb_squeezed(2.0, 0.7, 1.0, 10) == pytest.approx(math.exp(-1.4) / (4 * 10 * 4))
    assert bounds.phase_crlb_squeezed(1.0, 0.0, 0.8, 1) == pytest.approx(0.3125)


def test_unsqueezed_fixed_phase_beats_random_phase():
    # with r = 0 the fixed-phase scheme reads the full amplitude on every record
    n, N = 50.0, 5000
    s2 = bounds.phase_crlb_squeezed(math.sqrt(n), 0.0, 1.0, N)
    assert math.sqrt(s2) == pytest.approx(bounds.phase_crlb_coherent(n, N) / math.sqrt(2), rel=1e-12)


def test_optimal_squeezing_example():
    assert bounds.optimal_squeezing(1.0) == pytest.approx(2 * (1 + math.sqrt(1.25)), rel=1e-12)
    assert bounds.optimal_squeezing(1.0) == pytest.approx(4.23607, abs=1e-5)


@pytest.mark.parametrize("A", [0.5, 1.0, 2.0, 10.0])
def test_cubic_matches_closed_form_at_unit_efficiency(A):
    x = optimize.brentq(lambda x: x**3 + 4 * A * A * x * x - x, 1e-12, 1.0, xtol=1e-16, rtol=1e-15)
    assert x == pytest.approx(1.0 / bounds.optimal_squeezing(A, 1.0), abs=1e-10)


@pytest.mark.parametrize("A,eta", [(1.0, 1.0), (3.0, 1.0), (1.0, 0.8), (4.0, 0.6)])
def test_optimal_squeezing_maximizes_fisher_at_fixed_photons(A, eta):
    e2r = bounds.optimal_squeezing(A, eta)
    r_opt = 0.5 * math.log(e2r)
    n = A * A + math.sinh(r_opt) ** 2
    k = (1 - eta) / eta

    def neg_fisher(r):
        return -(n - math.sinh(r) ** 2) / (math.exp(-2 * r) + k)

    res = optimize.minimize_scalar(neg_fisher, bounds=(0, math.asinh(math.sqrt(n))), method="bounded",
                                   options={"xatol": 1e-12})
    assert res.x == pytest.approx(r_opt, abs=1e-5)


def test_large_amplitude_splits_photons_evenly():
    r = 0.5 * math.log(bounds.optimal_squeezing(100.0))
    n_sq = math.sinh(r) ** 2
    assert n_sq / (n_sq + 1e4) == pytest.approx(0.5, rel=0.01)


def test_heisenberg_scaling_of_optimal_bound():
    N = 5000
    for n in (100.0, 1000.0):
        A, r = bounds.optimal_probe(n)
        assert A * A + math.sinh(r) ** 2 == pytest.approx(n, rel=1e-12)
        s2 = bounds.phase_crlb_squeezed(A, r, 1.0, N)
        assert s2 == pytest.approx(1 / (4 * N * n * n), rel=2 / n)


def test_optimal_squeezing_monotone_in_eta():
    for A in (0.5, 2.0, 7.0):
        vals = [bounds.optimal_squeezing(A, eta) for eta in (1.0, 0.99, 0.9, 0.7, 0.4, 0.1)]
        assert all(a >= b for a, b in zip(vals, vals[1:]))
        assert vals[-1] >= 1.0


@settings(max_examples=50, deadline=None)
@given(st.floats(0.1, 30.0), st.floats(0.05, 1.0))
def test_optimal_squeezing_root_property(A, eta):
    x = 1.0 / bounds.optimal_squeezing(A, eta)
    k = (1 - eta) / eta
    assert 0 < x <= 1
    assert abs(x**3 + (4 * A * A + k) * x**2 - x - k) < 1e-10 * (1 + 4 * A * A + k)


def test_optimal_squeezing_errors():
    with pytest.raises(ValueError):
        bounds.optimal_squeezing(0.0)
    with pytest.raises(ValueError):
        bounds.optimal_squeezing(1.0, 0.0)


def test_onoff_fisher_limits():
    a2 = 1.0
    weak = bounds.onoff_fisher(1e-4, a2).fisher
    assert weak == pytest.approx(a2 / 1e-4, rel=1e-3)
    assert bounds.onoff_fisher(1.0, 60.0).fisher < 1e-20
    # the weak-pulse shortcut is a different function altogether
    assert bounds.onoff_fisher_simplified(0.7, 1.0) == pytest.approx(0.7)
    assert bounds.onoff_std_simplified(0.7, 1.0, 10**4) == pytest.approx(1 / math.sqrt(0.7e4))


def test_propagate_phase_error():
    assert bounds.propagate_phase_error(0.0, 0.1, 2.0) == pytest.approx(0.05)
    A = 3.0
    assert bounds.propagate_phase_error(A / math.sqrt(2), 0.1, A) == pytest.approx(0.1 * math.sqrt(2) / A)
    with pytest.raises(ValueError):
        bounds.propagate_phase_error(4.0, 0.1, 3.0)


def test_propagation_recovers_bound():
    A, r, N = 4.0, 0.9, 5000
    sigma_mean = math.sqrt(math.exp(-2 * r) / (4 * N))
    prop = bounds.propagate_phase_error(0.0, sigma_mean, A)
    assert prop**2 == pytest.approx(bounds.phase_crlb_squeezed(A, r, 1.0, N), rel=1e-12)


def test_bound_is_lower_bound_empirically():
    # sample mean of a Gaussian location family is efficient
    rng = np.random.default_rng(0)
    N, reps = 400, 400
    est = rng.normal(0.0, 0.5, size=(reps, N)).mean(axis=1)
    crlb = bounds.FisherResult.from_fisher(4.0, n=N).crlb_variance
    assert est.var(ddof=1) >= 0.9 * crlb
    assert stats.chi2.sf((reps - 1) * est.var(ddof=1) / crlb, reps - 1) > 1e-3
