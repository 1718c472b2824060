import math

import numpy as np
import pytest
import sympy as sp
from hypothesis import given, settings
from hypothesis import strategies as st
from scipy import integrate

from compsum.basis import (
    Deterministic,
    Direct,
    Equilibrium,
    Exponential,
    Gamma,
    Modified,
    Risk,
    TiltedUniform,
    Uniform,
    critical_premium,
    equilibrium_mean,
    log_mgf_T,
    moments,
    sample_pair,
    sample_pairs,
)
from compsum.errors import DomainError, UnsupportedError


def _sympy_risk_moments(varrho, rho, c):
    x, y = sp.symbols("x y", positive=True)
    dens = varrho * sp.exp(-varrho * x) * rho * sp.exp(-rho * y)
    mx = sp.Rational(1) / varrho
    mt = sp.Rational(1) / rho - c * mx
    out = {}
    for i in range(4):
        for j in range(4 - i):
            f = (x - mx) ** i * (y - c * x - mt) ** j * dens
            out[(i, j)] = float(sp.integrate(f, (x, 0, sp.oo), (y, 0, sp.oo)))
    return out


@pytest.mark.parametrize("varrho,rho,c", [(2, 1, sp.Rational(3, 2)), (3, 2, 4)])
def test_risk_mixed_moments_against_symbolic(varrho, rho, c):
    ref = _sympy_risk_moments(varrho, rho, c)
    m = moments(Risk(Exponential(varrho), Exponential(rho), float(c)))
    for key, val in ref.items():
        assert m.h[key] == pytest.approx(val, rel=1e-12, abs=1e-12), key


def test_direct_moments_independent_product():
    m = moments(Direct(Gamma(2.0, 3.0), Uniform(0.0, 2.0)))
    assert m.mu_T == pytest.approx(2.0 / 3.0)
    assert m.var_T == pytest.approx(2.0 / 9.0)
    assert m.h[(0, 3)] == pytest.approx(4.0 / 27.0)
    assert m.var_X == pytest.approx(4.0 / 12.0)
    assert m.cov_XT == 0.0
    assert m.h[(2, 1)] == 0.0


def test_raw_moments_consistent_with_central():
    m = moments(Risk(Exponential(2.0), Gamma(2.0, 1.0), 1.7))
    raw = m.raw
    assert raw[(1, 0)] == pytest.approx(m.mu_X)
    assert raw[(0, 2)] - m.mu_T**2 == pytest.approx(m.var_T)
    assert raw[(1, 1)] - m.mu_X * m.mu_T == pytest.approx(m.cov_XT)


@settings(max_examples=25, deadline=None)
@given(st.floats(0.2, 5.0), st.floats(0.2, 5.0))
def test_rescaled_moments_match_rescaled_laws(a, b):
    base = Direct(Exponential(1.5), Gamma(2.0, 1.0))
    scaled = Direct(Exponential(1.5 / b), Gamma(2.0, 1.0 / a))
    m1 = moments(base).rescaled(x_scale=a, t_scale=b)
    m2 = moments(scaled)
    for key in m1.h:
        assert m1.h[key] == pytest.approx(m2.h[key], rel=1e-10, abs=1e-12)


@pytest.mark.parametrize(
    "d", [Exponential(2.0), Gamma(0.7, 1.3), Uniform(0.5, 2.0), Deterministic(1.5), TiltedUniform(0.0, 1.0, 2.5)]
)
def test_raw_moments_by_quadrature(d):
    if isinstance(d, Deterministic):
        assert d.raw_moment(3) == 1.5**3
        return
    rng = np.random.default_rng(0)
    s = np.asarray(d.sample(rng, 400_000))
    for k in (1, 2, 3):
        se = np.std(s**k) / math.sqrt(len(s))
        assert abs(np.mean(s**k) - d.raw_moment(k)) < 5 * se


def test_log_mgf_and_tilt():
    u = Uniform(0.0, 2.0)
    x = 0.7
    ref = math.log(integrate.quad(lambda v: math.exp(x * v) / 2.0, 0.0, 2.0)[0])
    assert u.log_mgf(x) == pytest.approx(ref, rel=1e-13)
    tu = u.tilt(0.4)
    assert isinstance(tu, TiltedUniform)
    assert tu.log_mgf(0.3) == pytest.approx(u.log_mgf(0.7) - u.log_mgf(0.4), rel=1e-12)
    assert Exponential(2.0).tilt(0.5) == Exponential(1.5)
    with pytest.raises(DomainError):
        Exponential(2.0).tilt(2.0)


def test_critical_premium_and_log_mgf_T():
    b = Risk(Exponential(2.0), Exponential(1.0), 3.0)
    assert critical_premium(b) == 2.0
    # log E e^{s(Y - cX)} for exponentials
    s = 0.3
    assert log_mgf_T(b, s) == pytest.approx(-math.log(1 - s) - math.log(1 + 3.0 * s / 2.0))
    with pytest.raises(UnsupportedError):
        critical_premium(Direct(Exponential(1.0), Exponential(1.0)))


def test_validation():
    with pytest.raises(DomainError):
        Direct(Uniform(-1.0, 1.0), Exponential(1.0))
    with pytest.raises(DomainError):
        Risk(Exponential(1.0), Exponential(1.0), 0.0)
    with pytest.raises(DomainError):
        Gamma(-1.0, 1.0)
    with pytest.raises(DomainError):
        Uniform(1.0, 1.0)


def test_equilibrium_sampling_matches_integrated_tail():
    d = Uniform(0.0, 1.0)
    b = Direct(d, Exponential(1.0), Equilibrium())
    rng = np.random.default_rng(3)
    draws = np.array([sample_pair(b, rng, first=True)[0] for _ in range(100_000)])
    # integrated tail of U(0,1): density 2(1 - t), mean 1/3
    assert equilibrium_mean(d) == pytest.approx(1.0 / 3.0)
    assert abs(draws.mean() - 1.0 / 3.0) < 5 * draws.std() / math.sqrt(len(draws))
    assert np.mean(draws <= 0.5) == pytest.approx(0.75, abs=0.01)


def test_modified_first_interval_and_vector_draws():
    b = Direct(Exponential(1.0), Deterministic(2.0), Modified(Deterministic(5.0)))
    rng = np.random.default_rng(1)
    assert sample_pair(b, rng, first=True) == (5.0, 2.0)
    t, x = sample_pairs(Risk(Exponential(2.0), Exponential(1.0), 2.0), rng, 1000)
    assert t.shape == x.shape == (1000,)
    assert np.all(x > 0)
