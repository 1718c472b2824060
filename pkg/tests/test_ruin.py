import math

import pytest

from compsum.basis import Direct, Exponential, Gamma, Risk, Uniform, log_mgf_T, moments
from compsum.errors import RegimeError, UnsupportedError
from compsum.exact import ExpModel, exact_cdf
from compsum.ruin import (
    associated_basis,
    exponential_closed_forms,
    inverse_gaussian_cdf_approx,
    inverse_gaussian_params,
    lundberg_exponent,
    normal_params,
    proper_cdf_normal,
    quasi_normal_cdf,
    quasi_normal_params,
    reverse_lundberg_exponent,
)


def risk(c, x=None, y=None):
    return Risk(x or Exponential(2.0), y or Exponential(1.0), c)


@pytest.mark.parametrize("c", [2.5, 3.0, 4.0, 8.0])
def test_lundberg_against_closed_form(c):
    assert abs(lundberg_exponent(risk(c)) - 1.0 * (1.0 - 2.0 / c)) <= 1e-10


def test_lundberg_general_laws_solve_equation():
    b = risk(3.0, x=Uniform(0.0, 1.0), y=Gamma(2.0, 3.0))
    k = lundberg_exponent(b)
    assert k > 0
    assert abs(log_mgf_T(b, k)) < 1e-12
    with pytest.raises(RegimeError):
        lundberg_exponent(risk(2.0))
    with pytest.raises(UnsupportedError):
        lundberg_exponent(Direct(Exponential(1.0), Exponential(1.0)))


def test_reverse_exponent():
    b = risk(1.5)
    g = reverse_lundberg_exponent(b)
    assert abs(log_mgf_T(b, -g)) < 1e-12
    with pytest.raises(RegimeError):
        reverse_lundberg_exponent(risk(3.0))


def test_associated_pair_is_proper():
    b = risk(4.0)
    assoc = associated_basis(b, lundberg_exponent(b))
    assert moments(assoc).mu_T > 0
    # exponentials stay exponential with swapped-drift rates
    assert assoc.x_dist == Exponential(2.0 + 4.0 * 0.5)
    assert assoc.y_dist == Exponential(0.5)


def test_normal_and_quasi_normal_parameters_match_closed_forms():
    cf = exponential_closed_forms(2.0, 1.0, 1.5)
    p = normal_params(risk(1.5))
    assert p.m_down == pytest.approx(cf["m_down"], rel=1e-13)
    assert p.d_down_sq == pytest.approx(cf["d_down_sq"], rel=1e-12)
    cf = exponential_closed_forms(2.0, 1.0, 4.0)
    q = quasi_normal_params(risk(4.0))
    assert q.kappa == pytest.approx(cf["kappa"], abs=1e-12)
    assert q.cramer_c == pytest.approx(cf["cramer_c"])
    assert q.m_up == pytest.approx(cf["m_up"], rel=1e-12)
    assert q.d_up_sq == pytest.approx(cf["d_up_sq"], rel=1e-12)
    with pytest.raises(RegimeError):
        normal_params(risk(2.5))


def test_spitzer_cramer_constant_for_non_exponential_claims():
    q = quasi_normal_params(risk(3.0, x=Uniform(0.0, 1.0)), method="spitzer", n_paths=20_000, seed=3)
    assert 0 < q.cramer_c < 1.0
    assert q.cramer_c_se > 0
    with pytest.raises(UnsupportedError):
        quasi_normal_params(risk(3.0, x=Uniform(0.0, 1.0)), method="closed")


def test_quasi_normal_tracks_exact_far_from_critical():
    for c in (2.6, 3.0):
        m = ExpModel(2.0, 1.0, c, 10.0)
        assert quasi_normal_cdf(quasi_normal_params(risk(c)), 10.0, 200.0) == pytest.approx(exact_cdf(m, 200.0), abs=1e-4)


def test_normal_tracks_exact_far_from_critical():
    m = ExpModel(2.0, 1.0, 1.5, 10.0)
    assert float(proper_cdf_normal(normal_params(risk(1.5)), 10.0, 200.0)) == pytest.approx(exact_cdf(m, 200.0), abs=1e-3)


def test_inverse_gaussian_at_critical_premium():
    p = inverse_gaussian_params(risk(2.0), 10.0)
    assert p.M == pytest.approx(0.5)
    assert p.inv_mu == 0.0
    v = inverse_gaussian_cdf_approx(p, 200.0)
    assert abs(v - exact_cdf(ExpModel(2.0, 1.0, 2.0, 10.0), 200.0)) < 0.005
    assert abs(v - 0.699) < 0.005


@pytest.mark.parametrize("c", [1.3, 1.9, 2.1, 3.0])
def test_inverse_gaussian_is_a_probability(c):
    v = inverse_gaussian_cdf_approx(inverse_gaussian_params(risk(c), 10.0), 200.0)
    assert 0.0 <= v <= 1.0
