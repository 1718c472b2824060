"""Approximations for the risk-form sum T = Y - c X.

* proper case (c < c*): normal law with (m_down, D_down^2);
* defective case (c > c*): Lundberg exponent, associated (tilted) pair,
  Cramer constant and the quasi-normal law;
* both sides and c = c* itself: the inverse Gaussian approximation.
"""

from __future__ import annotations

import math
import warnings
from dataclasses import dataclass

import numpy as np
from scipy.optimize import brentq

from .basis import (
    BasisSpec,
    Exponential,
    Risk,
    critical_premium,
    log_mgf_T,
    mgf_T_bound,
    moments,
)
from .errors import DomainError, RegimeError, UnsupportedError
from .renewal import _sigma_sq
from .special import inv_gaussian_cdf_scaled, std_normal_cdf


@dataclass(frozen=True)
class NormalApproxParams:
    m_down: float
    d_down_sq: float


@dataclass(frozen=True)
class QuasiNormalParams:
    kappa: float
    cramer_c: float
    m_up: float
    d_up_sq: float
    cramer_c_se: float = 0.0


@dataclass(frozen=True)
class InverseGaussianParams:
    M: float
    D_sq: float
    c: float
    level_t: float

    @property
    def lam(self) -> float:
        return self.level_t / (self.c**2 * self.D_sq)

    @property
    def defective(self) -> bool:
        return self.c * self.M > 1.0

    @property
    def inv_mu(self) -> float:
        """|1 - c M|; zero exactly at the critical premium."""
        return abs(1.0 - self.c * self.M)


def _require_risk(b) -> Risk:
    if not isinstance(b, Risk):
        raise UnsupportedError("operation defined for the risk form T = Y - cX only")
    return b


def _is_exponential(b: Risk) -> bool:
    return isinstance(b.x_dist, Exponential) and isinstance(b.y_dist, Exponential)


# Lundberg exponent ---------------------------------------------------------


def _positive_root(g, bound: float, what: str) -> float:
    lo = 1e-8 * min(1.0, bound if math.isfinite(bound) else 1.0)
    while g(lo) >= 0.0:
        lo *= 0.5
        if lo < 1e-300:
            raise RegimeError(f"{what}: no positive root (drift is not negative)")
    if math.isfinite(bound):
        hi = None
        for k in range(1, 200):
            cand = bound * (1.0 - 2.0**-k)
            if cand <= lo:
                continue
            if g(cand) > 0.0:
                hi = cand
                break
        if hi is None:
            raise DomainError(f"{what}: mgf diverges before the equation changes sign")
    else:
        hi = max(2.0 * lo, 1.0)
        while g(hi) <= 0.0:
            hi *= 2.0
            if hi > 1e12:
                raise DomainError(f"{what}: no sign change found")
    # shrink the bracket on the convex side before polishing
    return brentq(g, lo, hi, xtol=1e-300, rtol=4 * np.finfo(float).eps, maxiter=500)


def lundberg_exponent(b: BasisSpec) -> float:
    """Positive root of E exp(x T) = 1 (defective regime, c > c*)."""
    b = _require_risk(b)
    if b.premium_c <= critical_premium(b):
        raise RegimeError(f"c = {b.premium_c} <= c* = {critical_premium(b)}: no positive Lundberg root")
    return _positive_root(lambda x: log_mgf_T(b, x), mgf_T_bound(b), "Lundberg equation")


def reverse_lundberg_exponent(b: Risk) -> float:
    """Positive root of E exp(-x T) = 1 (proper regime, used to bound returns below a level)."""
    b = _require_risk(b)
    if b.premium_c >= critical_premium(b):
        raise RegimeError("reverse exponent needs c < c*")
    bound = b.x_dist.mgf_bound() / b.premium_c
    return _positive_root(lambda x: log_mgf_T(b, -x), bound, "reverse Lundberg equation")


def associated_basis(b: BasisSpec, kappa: float) -> Risk:
    """Tilt F(dt, dx) -> exp(kappa t) F(dt, dx); factorises over independent X and Y."""
    b = _require_risk(b)
    if kappa < 0:
        raise DomainError("tilt must be nonnegative")
    try:
        y_hat = b.y_dist.tilt(kappa)
    except DomainError as exc:
        raise DomainError(f"invalid tilt: {exc}") from None
    return Risk(b.x_dist.tilt(-b.premium_c * kappa), y_hat, b.premium_c)


# parameter sets --------------------------------------------------------------


def normal_params(b: BasisSpec) -> NormalApproxParams:
    b = _require_risk(b)
    if b.premium_c >= critical_premium(b):
        raise RegimeError(f"normal approximation needs c < c* = {critical_premium(b)}")
    mom = moments(b)
    return NormalApproxParams(
        mom.mu_X / mom.mu_T, _sigma_sq(mom.mu_X, mom.mu_T, mom.var_X, mom.var_T, mom.cov_XT)
    )


def proper_cdf_normal(p: NormalApproxParams, t: float, x):
    return std_normal_cdf((np.asarray(x, dtype=float) - p.m_down * t) / math.sqrt(p.d_down_sq * t))


def exponential_closed_forms(varrho: float, rho: float, c: float) -> dict:
    """Closed forms of the exponential model (X ~ Exp(varrho), Y ~ Exp(rho))."""
    r = varrho / (c * rho)
    out = {"r": r, "c_star": varrho / rho}
    if r > 1:
        out["m_down"] = -1.0 / (c * (1.0 - r))
        out["d_down_sq"] = -2.0 * r / (c**2 * rho * (1.0 - r) ** 3)
    if r < 1:
        out["kappa"] = rho * (1.0 - r)
        out["cramer_c"] = r
        out["m_up"] = r / (c * (1.0 - r))
        out["d_up_sq"] = 2.0 * r / (c**2 * rho * (1.0 - r) ** 3)
    return out


def cramer_constant_spitzer(
    b: Risk,
    kappa: float,
    n_max: int = 200,
    n_paths: int = 100_000,
    seed: int = 0,
    workers: int = 1,
    max_rel_se: float = 0.05,
) -> tuple[float, float]:
    """Cramer constant from Monte Carlo estimates of the two Spitzer series.

    C = exp(-sum P{V_n > 0}/n - sum P{V^_n <= 0}/n) / (kappa E T^).
    Both series are truncated at ``n_max`` and completed with a geometric
    tail fitted to the last summands. Returns (estimate, standard error).
    """
    from .montecarlo import spitzer_sums

    assoc = associated_basis(b, kappa)
    mu_hat = moments(assoc).mu_T
    a, a_se = spitzer_sums(b, n_max, n_paths, seed=seed, positive=True, workers=workers)
    bb, b_se = spitzer_sums(assoc, n_max, n_paths, seed=seed + 1, positive=False, workers=workers)
    est = math.exp(-a - bb) / (kappa * mu_hat)
    se = est * math.hypot(a_se, b_se)
    if se > max_rel_se * est:
        warnings.warn(f"Spitzer estimate of the Cramer constant is noisy (rel. s.e. {se / est:.3g})", stacklevel=2)
    return est, se


def quasi_normal_params(b: BasisSpec, method: str = "auto", **spitzer_kw) -> QuasiNormalParams:
    """Lundberg exponent, Cramer constant and tilted (m_up, D_up^2).

    ``method``: ``"closed"`` (exponential components only), ``"spitzer"``
    (Monte Carlo series), or ``"auto"`` (closed when available).
    """
    b = _require_risk(b)
    kappa = lundberg_exponent(b)
    assoc = associated_basis(b, kappa)
    mh = moments(assoc)
    if not mh.mu_T > 0:
        raise RegimeError("associated pair must have positive drift")
    m_up = mh.mu_X / mh.mu_T
    d_up_sq = _sigma_sq(mh.mu_X, mh.mu_T, mh.var_X, mh.var_T, mh.cov_XT)
    if method == "auto":
        method = "closed" if _is_exponential(b) else "spitzer"
    if method == "closed":
        if not _is_exponential(b):
            raise UnsupportedError("closed-form Cramer constant needs exponential X and Y")
        cc, se = b.x_dist.rate / (b.premium_c * b.y_dist.rate), 0.0
    elif method == "spitzer":
        cc, se = cramer_constant_spitzer(b, kappa, **spitzer_kw)
    else:
        raise DomainError(f"unknown method {method!r}")
    return QuasiNormalParams(kappa, cc, m_up, d_up_sq, se)


def quasi_normal_cdf(p: QuasiNormalParams, t: float, x):
    """C exp(-kappa t) Phi((x - m_up t) / (D_up sqrt t)); a sub-probability."""
    z = (np.asarray(x, dtype=float) - p.m_up * t) / math.sqrt(p.d_up_sq * t)
    return p.cramer_c * math.exp(-p.kappa * t) * std_normal_cdf(z)


def inverse_gaussian_params(b: BasisSpec, level_t: float) -> InverseGaussianParams:
    b = _require_risk(b)
    ex, ey = b.x_dist.mean(), b.y_dist.mean()
    dx, dy = b.x_dist.var(), b.y_dist.var()
    return InverseGaussianParams(ex / ey, (ex**2 * dy + ey**2 * dx) / ey**3, b.premium_c, level_t)


def inverse_gaussian_cdf_approx(p: InverseGaussianParams, x: float) -> float:
    """F(z+1) - F(1) with z = c x / t; defective side weighted by exp(-2 lam / mu^)."""
    if not x > 0:
        raise DomainError("horizon must be positive")
    z = p.c * x / p.level_t
    lam, nu = p.lam, p.inv_mu
    log_scale = -2.0 * lam * nu if p.defective else 0.0
    val = inv_gaussian_cdf_scaled(z + 1.0, nu, lam, log_scale) - inv_gaussian_cdf_scaled(1.0, nu, lam, log_scale)
    return min(max(val, 0.0), 1.0)
