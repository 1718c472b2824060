"""Exact law of the ruin-type sum when X and Y are both exponential.

Roles: ``level_t`` is the level the walk V_n = sum(Y_i - c X_i) must exceed
(initial capital), and ``x`` is the bound on S = sum X_i (time horizon), so
``exact_cdf`` is the probability of ruin before time ``x``.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np
from scipy.interpolate import PchipInterpolator

from .basis import Exponential, Risk
from .errors import AccuracyError, DomainError
from .special import QuadratureSpec, integrate

_DEFAULT_QUAD = QuadratureSpec(abs_tol=1e-11, rel_tol=1e-10, max_depth=40)


@dataclass(frozen=True)
class ExpModel:
    varrho: float  # rate of X
    rho: float  # rate of Y
    c: float
    level_t: float

    def __post_init__(self):
        for name in ("varrho", "rho", "c", "level_t"):
            if not getattr(self, name) > 0:
                raise DomainError(f"{name} must be positive, got {getattr(self, name)}")

    @property
    def r(self) -> float:
        return self.varrho / (self.c * self.rho)

    @classmethod
    def from_basis(cls, b: Risk, level_t: float) -> "ExpModel":
        if not (isinstance(b, Risk) and isinstance(b.x_dist, Exponential) and isinstance(b.y_dist, Exponential)):
            raise DomainError("exact formula needs the risk form with exponential X and Y")
        return cls(b.x_dist.rate, b.y_dist.rate, b.premium_c, level_t)

    def basis(self) -> Risk:
        return Risk(Exponential(self.varrho), Exponential(self.rho), self.c)


def defect_mass(m: ExpModel) -> float:
    """P{S < inf}: 1 in the proper case, r exp(-t (c rho - varrho) / c) otherwise."""
    r = m.r
    if r >= 1.0:
        return 1.0
    return r * math.exp(-m.level_t * (m.c * m.rho - m.varrho) / m.c)


def integrand_f(z: float, m: ExpModel, x: float) -> float:
    r = m.r
    sr = math.sqrt(r)
    tr = m.level_t * m.rho
    if z <= 0.0:
        # removable singularity: 0 unless r == 1, where q ~ z^2 cancels sin^2
        return 2.0 * (tr + 1.0) if r == 1.0 else 0.0
    # q = 1 + r - 2 sqrt(r) cos z, written without cancellation
    q = (1.0 - sr) ** 2 + 4.0 * sr * math.sin(0.5 * z) ** 2
    a = tr * sr * math.sin(z)
    expo = tr * (sr * math.cos(z) - 1.0) - x * m.c * m.rho * q
    # cos(a) - cos(a + 2z) = 2 sin(a + z) sin(z)
    return r / q * math.exp(expo) * 2.0 * math.sin(a + z) * math.sin(z)


def _breakpoints(m: ExpModel, x: float) -> list[float]:
    sr = math.sqrt(m.r)
    freq = m.level_t * m.rho * sr
    # >= 8 panels per oscillation period of cos(t rho sqrt(r) sin z)
    n_osc = max(16, int(math.ceil(8.0 * freq / math.pi)) + 1)
    pts = list(np.linspace(0.0, math.pi, n_osc + 1)[1:-1])
    # resolve the exp(-x c rho q) peak at z -> 0 for large horizons
    width = 1.0 / math.sqrt(max(x * m.c * m.rho * sr, 1e-300))
    pts += [k * width for k in (0.125, 0.25, 0.5, 1.0, 2.0, 4.0, 8.0, 16.0) if k * width < math.pi]
    return sorted(set(pts))


def exact_cdf(m: ExpModel, x: float, spec: QuadratureSpec | None = None) -> float:
    """P{S_{N(t)} <= x} for the exponential model."""
    if not x > 0:
        raise DomainError(f"horizon must be positive, got {x}")
    spec = spec or _DEFAULT_QUAD
    integral = integrate(lambda z: integrand_f(z, m, x), 0.0, math.pi, spec, points=_breakpoints(m, x))
    value = defect_mass(m) - integral / math.pi
    slack = 100.0 * max(spec.abs_tol, spec.rel_tol)
    if value < 0.0:
        if value < -slack:
            raise AccuracyError(f"exact CDF {value:g} below 0 beyond quadrature tolerance", estimate=value)
        return 0.0
    if value > 1.0:
        if value > 1.0 + slack:
            raise AccuracyError(f"exact CDF {value:g} above 1 beyond quadrature tolerance", estimate=value)
        return 1.0
    return value


def exact_cdf_curve(m: ExpModel, xs, spec: QuadratureSpec | None = None) -> np.ndarray:
    return np.array([exact_cdf(m, float(x), spec) for x in xs])


def exact_cdf_interpolant(m: ExpModel, x_max: float, n_grid: int = 1500):
    """Monotone interpolant of ``exact_cdf`` on (0, x_max]; vectorised callable.

    Beyond ``x_max`` the exact value is computed pointwise, below the first
    node the curve is pinned to 0 at x = 0.
    """
    lo = min(1e-3, x_max / 1e4)
    xs = np.unique(np.concatenate([[0.0], np.geomspace(lo, x_max, n_grid // 3), np.linspace(lo, x_max, n_grid)]))
    ys = np.concatenate([[0.0], exact_cdf_curve(m, xs[1:])])
    ys = np.maximum.accumulate(ys)
    interp = PchipInterpolator(xs, ys, extrapolate=False)

    def cdf(x):
        x = np.asarray(x, dtype=float)
        out = np.where(x <= 0, 0.0, interp(np.clip(x, 0.0, x_max)))
        far = x > x_max
        if np.any(far):
            out = np.array(out, dtype=float)
            for idx in np.flatnonzero(far.ravel()):
                xv = x.ravel()[idx]
                out.ravel()[idx] = defect_mass(m) if math.isinf(xv) else exact_cdf(m, float(xv))
        return out

    return cdf
