import math
import time

import numpy as np
import pytest

from compsum.basis import Exponential, Gamma, Risk
from compsum.errors import DomainError
from compsum.exact import ExpModel, defect_mass, exact_cdf, exact_cdf_curve, exact_cdf_interpolant, integrand_f

# frozen: exact_cdf(varrho=2, rho=1, c=2, t=10, x=200), cross-checked against the
# published reading 0.699 and by simulation
FROZEN_CSTAR = 0.6991589814851091


def _numpy_ruin_by_time(varrho, rho, c, level, horizon, n, seed):
    """Independent oracle: plain numpy simulation of V_n = sum(Y - cX)."""
    rng = np.random.default_rng(seed)
    v = np.zeros(n)
    s = np.zeros(n)
    alive = np.ones(n, dtype=bool)
    hit = np.zeros(n, dtype=bool)
    while alive.any():
        k = np.flatnonzero(alive)
        x = rng.exponential(1.0 / varrho, k.size)
        y = rng.exponential(1.0 / rho, k.size)
        s[k] += x
        v[k] += y - c * x
        over = s[k] > horizon
        up = (v[k] > level) & ~over
        hit[k[up]] = True
        alive[k[up | over]] = False
    return hit.mean()


def test_anchor_value_and_runtime():
    m = ExpModel(2.0, 1.0, 2.0, 10.0)
    t0 = time.perf_counter()
    val = exact_cdf(m, 200.0)
    assert time.perf_counter() - t0 < 1.0
    assert val == pytest.approx(FROZEN_CSTAR, abs=1e-8)
    assert abs(val - 0.699) <= 0.005


@pytest.mark.parametrize("c,x", [(1.5, 30.0), (2.5, 100.0), (3.0, 20.0)])
def test_against_independent_simulation(c, x):
    n = 100_000
    p_mc = _numpy_ruin_by_time(2.0, 1.0, c, 10.0, x, n, seed=int(10 * c))
    val = exact_cdf(ExpModel(2.0, 1.0, c, 10.0), x)
    se = math.sqrt(max(val * (1 - val), 1e-12) / n)
    assert abs(p_mc - val) < 4.5 * se + 1e-4


@pytest.mark.parametrize("c", [2.5, 3.0, 4.0])
def test_defect_is_classical_infinite_horizon_ruin(c):
    varrho, rho, t = 2.0, 1.0, 10.0
    # psi(u) = lambda/(c beta) exp(-(beta - lambda/c) u), lambda = varrho, beta = rho
    psi = varrho / (c * rho) * math.exp(-(rho - varrho / c) * t)
    m = ExpModel(varrho, rho, c, t)
    assert defect_mass(m) == pytest.approx(psi, rel=1e-14)
    assert exact_cdf(m, 1e4) == pytest.approx(psi, rel=1e-7)


def test_proper_case_tends_to_one():
    m = ExpModel(2.0, 1.0, 1.5, 10.0)
    assert defect_mass(m) == 1.0
    assert exact_cdf(m, 2000.0) == pytest.approx(1.0, abs=1e-9)


def test_monotone_in_horizon():
    m = ExpModel(2.0, 1.0, 2.3, 10.0)
    ys = exact_cdf_curve(m, [1.0, 5.0, 20.0, 80.0, 300.0, 1000.0])
    assert np.all(np.diff(ys) >= -1e-10)
    assert np.all((ys >= 0) & (ys <= defect_mass(m) + 1e-10))


def test_integrand_stable_at_critical_premium():
    m = ExpModel(2.0, 1.0, 2.0, 10.0)
    # removable singularity at 0 for r == 1; the small-z values must approach it
    lim = integrand_f(0.0, m, 200.0)
    assert lim == pytest.approx(2.0 * (10.0 + 1.0))
    assert integrand_f(1e-9, m, 200.0) == pytest.approx(lim, rel=1e-6)
    other = ExpModel(2.0, 1.0, 2.5, 10.0)
    assert integrand_f(0.0, other, 200.0) == 0.0
    assert abs(integrand_f(1e-9, other, 200.0)) < 1e-6


def test_interpolant_matches_pointwise():
    m = ExpModel(2.0, 1.0, 1.5, 10.0)
    f = exact_cdf_interpolant(m, 150.0, n_grid=600)
    xs = np.array([0.3, 2.7, 11.1, 19.9, 41.0, 77.7, 149.0])
    np.testing.assert_allclose(f(xs), exact_cdf_curve(m, xs), atol=2e-6)
    assert f(-1.0) == 0.0
    assert f(np.inf) == pytest.approx(1.0)


def test_validation_and_basis_roundtrip():
    with pytest.raises(DomainError):
        ExpModel(2.0, 1.0, -1.0, 10.0)
    with pytest.raises(DomainError):
        exact_cdf(ExpModel(2.0, 1.0, 2.0, 10.0), 0.0)
    b = Risk(Exponential(2.0), Exponential(1.0), 2.0)
    assert ExpModel.from_basis(b, 10.0).basis() == b
    with pytest.raises(DomainError):
        ExpModel.from_basis(Risk(Exponential(2.0), Gamma(2.0, 1.0), 2.0), 10.0)
