import math

import numpy as np
import pytest

from compsum.basis import Deterministic, Direct, Exponential, Gamma, Uniform, moments
from compsum.errors import DegeneracyError, ModelError
from compsum.modular import (
    BlockStats,
    MarkovModulatedBasis,
    extract_blocks,
    is_irreducible,
    kac_return_time,
    modular_clt_params,
    modular_clt_standard_errors,
    simulate_modulated,
    single_state,
    stationary_distribution,
)
from compsum.montecarlo import SimConfig, available
from compsum.renewal import reward_params


def two_state(p=0.3):
    return MarkovModulatedBasis.per_state(
        [[1 - p, p], [p, 1 - p]], [Exponential(1.0), Exponential(2.0)], [Exponential(1.0), Uniform(0.0, 2.0)]
    )


def test_validation():
    with pytest.raises(ModelError):
        MarkovModulatedBasis.per_state([[1.0, 0.0], [0.0, 1.0]], [Exponential(1.0)] * 2, [Exponential(1.0)] * 2)
    with pytest.raises(ModelError):
        MarkovModulatedBasis.per_state([[0.5, 0.6], [0.5, 0.5]], [Exponential(1.0)] * 2, [Exponential(1.0)] * 2)
    with pytest.raises(ModelError):
        MarkovModulatedBasis.per_state([[0.5, 0.5], [0.5, 0.5]], [Uniform(-1.0, 1.0)] * 2, [Exponential(1.0)] * 2)
    assert is_irreducible(np.array([[0.0, 1.0], [1.0, 0.0]]))
    assert not is_irreducible(np.array([[1.0, 0.0], [0.5, 0.5]]))


def test_stationary_distribution_oracle():
    p = np.array([[0.2, 0.8, 0.0], [0.1, 0.4, 0.5], [0.6, 0.0, 0.4]])
    pi = stationary_distribution(p)
    np.testing.assert_allclose(pi @ p, pi, atol=1e-14)
    # independent oracle: left eigenvector for eigenvalue 1
    w, v = np.linalg.eig(p.T)
    ref = np.real(v[:, np.argmin(abs(w - 1))])
    np.testing.assert_allclose(pi, ref / ref.sum(), atol=1e-12)


def test_single_state_reproduces_marginal_moments():
    b = single_state(Gamma(2.0, 1.0), Exponential(3.0))
    s = extract_blocks(b, 20_000, SimConfig(10, seed=1))
    assert np.all(s.tau == 1)
    m = moments(Direct(Gamma(2.0, 1.0), Exponential(3.0)))
    assert abs(s.mu_T - m.mu_T) < 4 * math.sqrt(m.var_T / s.n)
    assert abs(s.mu_X - m.mu_X) < 4 * math.sqrt(m.var_X / s.n)
    p = modular_clt_params(s)
    se_m, se_s2 = modular_clt_standard_errors(s)
    ref = reward_params(m)
    assert abs(p.m_S - ref.m_S) < 4 * se_m
    assert abs(p.sigma_S**2 - ref.sigma_S**2) < 4 * se_s2
    assert s.Q.shape == (2, 2)  # constant block length dropped


def test_kac_and_block_independence():
    b = two_state()
    assert kac_return_time(b) == pytest.approx(2.0)
    s = extract_blocks(b, 20_000, SimConfig(10, seed=2))
    assert abs(s.mu_tau - 2.0) < 3 * s.mu_tau_se()
    # lag-1 correlation of consecutive stationary blocks
    for arr in (s.T, s.X):
        a, c = arr[:, 1:-1].ravel(), arr[:, 2:].ravel()
        r = np.corrcoef(a, c)[0, 1]
        assert abs(r) < 4 / math.sqrt(len(a))


def test_permutation_invariance():
    s = extract_blocks(two_state(), 500, SimConfig(4, seed=3))
    rng = np.random.default_rng(0)
    perm = rng.permutation(500) + 1
    cols = np.concatenate([[0], perm])
    sp = BlockStats(s.tau[:, cols], s.T[:, cols], s.X[:, cols])
    np.testing.assert_allclose(sp.mean, s.mean, rtol=1e-13)
    np.testing.assert_allclose(sp.cov, s.cov, rtol=1e-11)
    assert modular_clt_params(sp).m_S == pytest.approx(modular_clt_params(s).m_S, rel=1e-13)


def test_condition_v_degenerate_blocks():
    # X = T on every transition: perfectly correlated columns
    tau = np.ones((1, 101), dtype=np.int64)
    t = np.random.default_rng(0).exponential(size=(1, 101))
    s = BlockStats(tau, t, 2.0 * t)
    assert s.det_Q < 1e-10
    with pytest.raises(DegeneracyError):
        modular_clt_params(s)


def test_unreachable_reference_reported():
    b = MarkovModulatedBasis.per_state(
        [[0.999999, 0.000001], [0.5, 0.5]], [Exponential(1.0)] * 2, [Exponential(1.0)] * 2, initial_state=0, reference_state=1
    )
    with pytest.raises(ModelError):
        extract_blocks(b, 5, SimConfig(3, seed=1, step_cap=10))


@pytest.mark.skipif("cython" not in available(), reason="compiled kernels not built")
def test_backend_parity():
    b = two_state()
    a = extract_blocks(b, 40, SimConfig(6, seed=8), backend="python")
    c = extract_blocks(b, 40, SimConfig(6, seed=8), backend="cython")
    np.testing.assert_array_equal(a.T, c.T)
    np.testing.assert_array_equal(a.tau, c.tau)
    sa = simulate_modulated(b, 30.0, SimConfig(50, seed=1), backend="python")
    sc = simulate_modulated(b, 30.0, SimConfig(50, seed=1), backend="cython")
    for u, v in zip(sa, sc):
        np.testing.assert_array_equal(u, v)


def test_per_transition_laws():
    det = MarkovModulatedBasis(
        np.array([[0.0, 1.0], [1.0, 0.0]]),
        ((Deterministic(1.0), Deterministic(2.0)), (Deterministic(3.0), Deterministic(1.0))),
        ((Deterministic(1.0),) * 2,) * 2,
    )
    # alternating chain with fixed laws: every block is identical
    with pytest.raises(DegeneracyError):
        extract_blocks(det, 10, SimConfig(1))
    b = MarkovModulatedBasis(
        np.array([[0.0, 1.0], [1.0, 0.0]]),
        ((Deterministic(1.0), Deterministic(2.0)), (Exponential(1.0), Deterministic(1.0))),
        ((Exponential(1.0),) * 2,) * 2,
    )
    s = extract_blocks(b, 4000, SimConfig(5, seed=4))
    assert np.all(s.tau == 2)
    assert np.all(s.T[:, 1:] > 2.0)
    assert abs(s.mu_T - 3.0) < 4 * math.sqrt(1.0 / s.n)
