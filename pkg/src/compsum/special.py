"""Scalar special functions and adaptive quadrature.

Everything downstream (exact ruin formula, normal / Edgeworth / inverse
Gaussian approximations, the garbage limit law) goes through the helpers
here, so they are kept small and strict about their domains.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Callable, Iterable, Sequence

import numpy as np
from scipy import special as _sp

from .errors import AccuracyError, DomainError

SQRT2 = math.sqrt(2.0)
INV_SQRT_2PI = 1.0 / math.sqrt(2.0 * math.pi)
LOG_SQRT_2PI = 0.5 * math.log(2.0 * math.pi)
GAMMA_QUARTER = math.gamma(0.25)

# below this argument log Phi switches to the asymptotic tail series
_TAIL_SWITCH = -8.0


@dataclass(frozen=True)
class QuadratureSpec:
    abs_tol: float = 1e-10
    rel_tol: float = 1e-10
    max_depth: int = 40

    def __post_init__(self):
        if not (self.abs_tol > 0 and self.rel_tol > 0):
            raise DomainError("quadrature tolerances must be positive")
        if self.max_depth < 1:
            raise DomainError("max_depth must be >= 1")


def _check_finite(x):
    arr = np.asarray(x, dtype=float)
    if not np.all(np.isfinite(arr)):
        raise DomainError(f"non-finite argument: {x!r}")
    return arr


def std_normal_cdf(x):
    """Standard normal CDF via the complementary error function.

    Accepts scalars or arrays; returns the same shape.
    """
    arr = _check_finite(x)
    out = 0.5 * _sp.erfc(-arr / SQRT2)
    return float(out) if out.ndim == 0 else out


def std_normal_pdf(x):
    arr = _check_finite(x)
    out = INV_SQRT_2PI * np.exp(-0.5 * arr * arr)
    return float(out) if out.ndim == 0 else out


def _log_mills_series(x: float) -> float:
    # log of 1 - 1/x^2 + 3/x^4 - 15/x^6 + ... ; stops at the smallest term
    x2 = x * x
    term = 1.0
    total = 1.0
    k = 1
    while k < 60:
        nxt = -term * (2 * k - 1) / x2
        if abs(nxt) >= abs(term):
            break
        term = nxt
        total += term
        if abs(term) < 1e-17 * abs(total):
            break
        k += 1
    return math.log(total)


def log_std_normal_cdf(x: float) -> float:
    """log Phi(x), accurate far into the lower tail."""
    x = float(x)
    if not math.isfinite(x):
        raise DomainError(f"non-finite argument: {x!r}")
    if x < _TAIL_SWITCH:
        return -0.5 * x * x - math.log(-x) - LOG_SQRT_2PI + _log_mills_series(x)
    return math.log(0.5 * math.erfc(-x / SQRT2))


def _ig_log_second_term(z: float, inv_mean: float, shape: float) -> float:
    # log[ exp(2 lam nu) * Phi(-sqrt(lam/z) (z nu + 1)) ]
    return 2.0 * shape * inv_mean + log_std_normal_cdf(-math.sqrt(shape / z) * (z * inv_mean + 1.0))


def inv_gaussian_cdf_scaled(z: float, inv_mean: float, shape: float, log_scale: float = 0.0) -> float:
    """exp(log_scale) * F(z; 1/inv_mean, shape), every product formed in log space.

    The scale lets callers fold a tiny prefactor such as exp(-2 lam / mu) into
    the terms before they are exponentiated.
    """
    if not z > 0:
        raise DomainError(f"inverse Gaussian CDF needs z > 0, got {z}")
    if not shape > 0:
        raise DomainError(f"inverse Gaussian shape must be positive, got {shape}")
    if inv_mean < 0:
        raise DomainError(f"inverse mean must be nonnegative, got {inv_mean}")
    root = math.sqrt(shape / z)
    first = log_std_normal_cdf(root * (z * inv_mean - 1.0)) + log_scale
    second = _ig_log_second_term(z, inv_mean, shape) + log_scale
    return math.exp(first) + math.exp(second)


def inv_gaussian_cdf(z: float, inv_mean: float, shape: float) -> float:
    """Inverse Gaussian CDF parameterised by the inverse mean ``1/mu``.

    ``inv_mean = 0`` is the infinite-mean limit, 2 Phi(-sqrt(shape/z)).
    """
    return min(1.0, inv_gaussian_cdf_scaled(z, inv_mean, shape))


def inv_gaussian_pdf(z: float, mean: float, shape: float) -> float:
    if z <= 0:
        return 0.0
    return math.sqrt(shape / (2.0 * math.pi * z**3)) * math.exp(-shape * (z - mean) ** 2 / (2.0 * mean * mean * z))


def hermite2(x):
    """Chebyshev-Hermite polynomial He_2(x) = x^2 - 1."""
    return np.asarray(x) ** 2 - 1.0


def _simpson(fa, fm, fb, h):
    return h / 6.0 * (fa + 4.0 * fm + fb)


def integrate(
    f: Callable[[float], float],
    a: float,
    b: float,
    spec: QuadratureSpec | None = None,
    points: Iterable[float] | None = None,
) -> float:
    """Adaptive Simpson quadrature of ``f`` over ``[a, b]``.

    ``points`` are optional interior breakpoints used as initial panels; the
    tolerance budget is shared between panels in proportion to their width.
    Raises :class:`AccuracyError` (carrying the best estimate) if some panel
    still misses its tolerance at ``max_depth``.
    """
    spec = spec or QuadratureSpec()
    if not (math.isfinite(a) and math.isfinite(b)) or not a < b:
        raise DomainError(f"need finite a < b, got [{a}, {b}]")
    edges = [a]
    if points is not None:
        edges.extend(sorted(p for p in points if a < p < b))
    edges.append(b)

    # a coarse pass fixes the relative part of the tolerance
    panels = []
    coarse = 0.0
    for lo, hi in zip(edges[:-1], edges[1:]):
        m = 0.5 * (lo + hi)
        flo, fm, fhi = f(lo), f(m), f(hi)
        whole = _simpson(flo, fm, fhi, hi - lo)
        coarse += whole
        panels.append((lo, hi, flo, fm, fhi, whole))
    tol = max(spec.abs_tol, spec.rel_tol * abs(coarse))

    total = 0.0
    failed = False
    width = b - a
    for lo, hi, flo, fm, fhi, whole in panels:
        stack = [(lo, hi, flo, fm, fhi, whole, tol * (hi - lo) / width, 0)]
        while stack:
            lo_, hi_, fa, fmid, fb, s, eps, depth = stack.pop()
            mid = 0.5 * (lo_ + hi_)
            lm, rm = 0.5 * (lo_ + mid), 0.5 * (mid + hi_)
            flm, frm = f(lm), f(rm)
            left = _simpson(fa, flm, fmid, mid - lo_)
            right = _simpson(fmid, frm, fb, hi_ - mid)
            err = left + right - s
            if abs(err) <= 15.0 * eps or depth >= spec.max_depth:
                if abs(err) > 15.0 * eps:
                    failed = True
                total += left + right + err / 15.0
            else:
                stack.append((mid, hi_, fmid, frm, fb, right, 0.5 * eps, depth + 1))
                stack.append((lo_, mid, fa, flm, fmid, left, 0.5 * eps, depth + 1))
    if failed:
        raise AccuracyError(f"adaptive Simpson missed tolerance {tol:g} at depth {spec.max_depth}", estimate=total)
    return total


def gauss_legendre(f: Callable[[np.ndarray], np.ndarray], edges: Sequence[float], order: int = 20) -> float:
    """Composite Gauss-Legendre rule for vectorised integrands on fixed panels."""
    nodes, weights = np.polynomial.legendre.leggauss(order)
    edges = np.asarray(edges, dtype=float)
    lo, hi = edges[:-1, None], edges[1:, None]
    half = 0.5 * (hi - lo)
    z = lo + half * (nodes[None, :] + 1.0)
    return float(np.sum(half * weights[None, :] * f(z)))
