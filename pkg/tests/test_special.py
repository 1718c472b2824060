import math

import mpmath
import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st
from scipy import stats

from compsum.errors import AccuracyError, DomainError
from compsum.special import (
    GAMMA_QUARTER,
    QuadratureSpec,
    gauss_legendre,
    hermite2,
    integrate,
    inv_gaussian_cdf,
    inv_gaussian_cdf_scaled,
    inv_gaussian_pdf,
    log_std_normal_cdf,
    std_normal_cdf,
    std_normal_pdf,
)


@given(st.floats(-30, 30))
def test_normal_cdf_matches_mpmath(x):
    # argument rounding in erfc costs about x^2 ulps in the far tail
    ref = float(mpmath.ncdf(x))
    assert std_normal_cdf(x) == pytest.approx(ref, rel=4e-16 * (4.0 + x * x), abs=1e-300)


def test_normal_cdf_vectorised_and_pdf():
    xs = np.linspace(-5, 5, 11)
    np.testing.assert_allclose(std_normal_cdf(xs), stats.norm.cdf(xs), rtol=1e-14)
    np.testing.assert_allclose(std_normal_pdf(xs), stats.norm.pdf(xs), rtol=1e-14)


def test_normal_rejects_nan():
    with pytest.raises(DomainError):
        std_normal_cdf(float("nan"))


@pytest.mark.parametrize("x", [-5.0, -8.5, -20.0, -40.0, -300.0])
def test_log_cdf_tail_against_mpmath(x):
    ref = float(mpmath.log(mpmath.ncdf(x)))
    assert log_std_normal_cdf(x) == pytest.approx(ref, rel=1e-12)


@pytest.mark.parametrize("mean,shape", [(1.0, 1.0), (0.5, 3.0), (4.0, 20.0)])
def test_inverse_gaussian_against_scipy(mean, shape):
    dist = stats.invgauss(mean / shape, scale=shape)
    for z in [0.1, 0.5, 1.0, 3.0, 10.0]:
        assert inv_gaussian_cdf(z, 1.0 / mean, shape) == pytest.approx(dist.cdf(z), rel=1e-9, abs=1e-15)
        assert inv_gaussian_pdf(z, mean, shape) == pytest.approx(dist.pdf(z), rel=1e-10)


def test_inverse_gaussian_infinite_mean_limit():
    # inverse mean 0 is the Levy-type first-passage law of driftless Brownian motion
    lam, z = 2.0, 3.0
    ref = 2.0 * stats.norm.sf(math.sqrt(lam / z))
    assert inv_gaussian_cdf(z, 0.0, lam) == pytest.approx(ref, rel=1e-12)


def test_inverse_gaussian_scaled_log_space():
    # a log scale far below the double range is handled without underflow to nan
    v = inv_gaussian_cdf_scaled(2.0, 0.5, 1.0, log_scale=-800.0)
    assert v == 0.0 or (v > 0 and math.isfinite(v))
    a = inv_gaussian_cdf_scaled(2.0, 0.5, 1.0, log_scale=-1.0)
    assert a == pytest.approx(math.exp(-1.0) * inv_gaussian_cdf(2.0, 0.5, 1.0), rel=1e-12)


def test_hermite2():
    assert hermite2(3.0) == 8.0


def test_integrate_smooth_and_oscillatory():
    assert integrate(math.sin, 0.0, math.pi) == pytest.approx(2.0, abs=1e-10)
    val = integrate(lambda z: math.cos(40.0 * math.sin(z)), 0.0, math.pi, points=np.linspace(0, math.pi, 60)[1:-1])
    # J_0(40) * pi
    assert val == pytest.approx(math.pi * float(mpmath.besselj(0, 40)), abs=1e-9)


def test_integrate_reports_failure():
    spec = QuadratureSpec(abs_tol=1e-14, rel_tol=1e-14, max_depth=3)
    with pytest.raises(AccuracyError) as info:
        integrate(lambda z: math.sqrt(abs(z - 0.3)), 0.0, 1.0, spec)
    assert info.value.estimate is not None


def test_quadrature_spec_validation():
    with pytest.raises(DomainError):
        QuadratureSpec(abs_tol=-1.0)


def test_gauss_legendre_polynomial_exact():
    val = gauss_legendre(lambda x: x**7 - 3 * x**2, [0.0, 0.5, 2.0], order=10)
    assert val == pytest.approx(2.0**8 / 8 - 8.0, rel=1e-14)


@settings(max_examples=30)
@given(st.floats(0.05, 0.95))
def test_cdf_symmetry(x):
    assert std_normal_cdf(x) + std_normal_cdf(-x) == pytest.approx(1.0, abs=1e-15)


def test_gamma_quarter():
    assert GAMMA_QUARTER == pytest.approx(float(mpmath.gamma(0.25)), rel=1e-15)
