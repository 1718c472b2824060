"""Renewal-theoretic approximations for sums with positive T.

Expected renewal counts, the normal and first-order Edgeworth laws of
cumulated rewards, and the limit law of the garbage term.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from functools import lru_cache

import numpy as np
from scipy.interpolate import PchipInterpolator

from .basis import MomentSet
from .errors import DegeneracyError, DomainError
from .special import (
    GAMMA_QUARTER,
    QuadratureSpec,
    gauss_legendre,
    hermite2,
    std_normal_cdf,
    std_normal_pdf,
)


@dataclass(frozen=True)
class RewardApproxParams:
    m_S: float
    sigma_S: float

    def standardize(self, t: float, x):
        return (np.asarray(x, dtype=float) - self.m_S * t) / (self.sigma_S * math.sqrt(t))


@dataclass(frozen=True)
class EdgeworthQ1:
    kappa30: float
    I1: float

    def __call__(self, x):
        """Q_1(x) = -(kappa30 He_2(x) + 3 I1) / 6."""
        return -(self.kappa30 * hermite2(x) + 3.0 * self.I1) / 6.0


def renewal_mean_elementary(mu_T: float, t: float) -> float:
    if not mu_T > 0:
        raise DomainError("mean interval must be positive")
    return t / mu_T


def renewal_mean_refined(mom: MomentSet, t: float) -> float:
    """t / mu_T + (var_T - mu_T^2) / (2 mu_T^2)."""
    mu = mom.mu_T
    if not mu > 0:
        raise DomainError("mean interval must be positive")
    return t / mu + (mom.var_T - mu * mu) / (2.0 * mu * mu)


def _sigma_sq(mu_X, mu_T, var_X, var_T, cov):
    # E(mu_X T - mu_T X)^2 / mu_T^3
    return (mu_X**2 * var_T - 2.0 * mu_X * mu_T * cov + mu_T**2 * var_X) / mu_T**3


def reward_params(mom: MomentSet, rtol: float = 1e-12) -> RewardApproxParams:
    if not mom.mu_T > 0:
        raise DomainError("mean interval must be positive")
    s2 = _sigma_sq(mom.mu_X, mom.mu_T, mom.var_X, mom.var_T, mom.cov_XT)
    scale = (mom.mu_X**2 * mom.var_T + mom.mu_T**2 * mom.var_X) / mom.mu_T**3
    if not s2 > rtol * max(scale, 1e-300):
        raise DegeneracyError(f"sigma_S^2 = {s2:g}: X is (a.s.) proportional to T")
    return RewardApproxParams(mom.mu_X / mom.mu_T, math.sqrt(s2))


def cumulated_rewards_cdf_normal(p: RewardApproxParams, t: float, x):
    if not t > 0:
        raise DomainError("t must be positive")
    return std_normal_cdf(p.standardize(t, x))


def edgeworth_q1(mom: MomentSet) -> EdgeworthQ1:
    """Skewness combination and boundary constant of the first Edgeworth term.

    The ``mu_X mu_T^-2`` factors in the first two lines are the dimensionally
    consistent ones (the result must be invariant under X -> aX); with this
    form, exponential T reproduces the exact compound Poisson skewness.
    """
    p = reward_params(mom)
    h = mom.h
    mx, mt = mom.mu_X, mom.mu_T
    sx2, st2, cov = mom.var_X, mom.var_T, mom.cov_XT
    line1 = (h[(3, 0)] - 3.0 * sx2 * cov / mt + 6.0 * sx2 * st2 * mx / mt**2 - 6.0 * st2 * cov * mx**2 / mt**3) / mt
    line2 = -3.0 * (h[(2, 1)] - 2.0 * cov**2 / mt + sx2 * st2 / mt) * mx / mt**2
    line3 = 3.0 * (h[(1, 2)] - st2 * cov / mt) * mx**2 / mt**3
    line4 = -(h[(0, 3)] - 3.0 * st2**2 / mt) * mx**3 / mt**4
    kappa30 = (line1 + line2 + line3 + line4) / p.sigma_S**3
    I1 = mx * (st2 / mt**2 + 1.0) / p.sigma_S
    return EdgeworthQ1(kappa30, I1)


def cumulated_rewards_cdf_edgeworth(p: RewardApproxParams, q1: EdgeworthQ1, t: float, x):
    """Phi(y) + Q_1(y) phi(y) / sqrt(t) at the standardised point y.

    The boundary term ``I1`` is the mean shift of the unaltered sum
    S_{N_inf(t)}; compare against that sum, not S_{N_inf(t) - 1}.
    """
    y = p.standardize(t, x)
    return std_normal_cdf(y) + q1(y) * std_normal_pdf(y) / math.sqrt(t)


# garbage limit law --------------------------------------------------------
#
# Y = sqrt(|Z|) W with Z, W independent standard normals.  Substituting
# z = s^2 removes the |z|^-1/2 singularity of the mixture integrals.

_GARBAGE_EDGES = np.linspace(0.0, 4.0, 33)  # s in [0, 4] covers |z| <= 16


def garbage_limit_cdf(x: float, spec: QuadratureSpec | None = None) -> float:
    """P{sqrt|Z| W <= x} = int Phi(x / sqrt|z|) phi(z) dz."""
    x = float(x)
    if math.isinf(x):
        return 1.0 if x > 0 else 0.0
    if not math.isfinite(x):
        raise DomainError("non-finite argument")
    if x == 0.0:
        return 0.5

    # 2 int_0^inf Phi(x/s) phi(s^2) 2s ds, tail beyond |z|=16 is < 1e-50
    def g(s):
        with np.errstate(divide="ignore"):
            arg = np.where(s > 0, x / np.where(s > 0, s, 1.0), np.sign(x) * np.inf)
        return 4.0 * s * std_normal_cdf_inf(arg) * std_normal_pdf(s * s)

    return gauss_legendre(g, _refine_edges(x), order=30)


def garbage_limit_pdf(y: float) -> float:
    """int phi(y / sqrt|z|) |z|^-1/2 phi(z) dz, by quadrature at every y (including 0)."""
    y = float(y)
    if not math.isfinite(y):
        raise DomainError("non-finite argument")

    def g(s):
        with np.errstate(divide="ignore", over="ignore", invalid="ignore"):
            ratio = np.where(s > 0, y / np.where(s > 0, s, 1.0), np.inf)
            val = 4.0 * std_normal_pdf_inf(ratio) * std_normal_pdf(s * s)
        return np.where(s > 0, val, 0.0)

    return gauss_legendre(g, _refine_edges(y), order=30)


def _refine_edges(x: float) -> np.ndarray:
    # the integrand switches behaviour around s ~ |x|; add nodes there
    a = abs(x)
    extra = [a * k for k in (0.05, 0.1, 0.2, 0.35, 0.5, 0.75, 1.0, 1.5, 2.0) if a * k < 4.0]
    return np.unique(np.concatenate([_GARBAGE_EDGES, extra]))


def std_normal_cdf_inf(x):
    x = np.asarray(x, dtype=float)
    return np.where(np.isposinf(x), 1.0, np.where(np.isneginf(x), 0.0, std_normal_cdf(np.where(np.isfinite(x), x, 0.0))))


def std_normal_pdf_inf(x):
    x = np.asarray(x, dtype=float)
    return np.where(np.isfinite(x), std_normal_pdf(np.where(np.isfinite(x), x, 0.0)), 0.0)


def garbage_limit_pdf_at_zero() -> float:
    """Closed form Gamma(1/4) / (2^{3/4} pi) of the limit density at the origin."""
    return GAMMA_QUARTER / (2.0**0.75 * math.pi)


def garbage_scale(mom: MomentSet, t: float) -> float:
    """Factor mu_T^{3/4} / (sigma_X sigma_T^{1/2} t^{1/4}) applied to the garbage term."""
    if not (mom.var_X > 0 and mom.var_T > 0):
        raise DegeneracyError("garbage scaling needs sigma_X > 0 and sigma_T > 0")
    return mom.mu_T**0.75 / (math.sqrt(mom.var_X) * mom.var_T**0.25 * t**0.25)


@lru_cache(maxsize=1)
def _garbage_table():
    xs = np.linspace(-12.0, 12.0, 2401)
    return xs, np.array([garbage_limit_cdf(x) for x in xs])


def garbage_limit_cdf_vec(x):
    """Vectorised ``garbage_limit_cdf`` via a monotone interpolant on [-12, 12]."""
    xs, ys = _garbage_table()
    x = np.asarray(x, dtype=float)
    out = PchipInterpolator(xs, ys, extrapolate=False)(np.clip(x, xs[0], xs[-1]))
    return np.where(x <= xs[0], np.where(np.isneginf(x), 0.0, out), np.where(x >= xs[-1], np.where(np.isposinf(x), 1.0, out), out))
