"""Stochastic model of the basis (T_i, X_i).

Two forms are supported:

* :class:`Direct` -- ``T`` and ``X`` drawn independently, ``T`` positive
  (regular summation), with an ordinary, modified or equilibrium first
  interval;
* :class:`Risk` -- ``T = Y - c X`` built from independent positive ``X``
  (inter-claim times) and ``Y`` (claim sizes), so the pair (T, X) is
  dependent and summation is irregular.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from functools import cached_property
from math import comb
from typing import Union

import numpy as np
from scipy import integrate as _quad

from .errors import DomainError, UnsupportedError

# kernel distribution codes; keep in sync with montecarlo/_kernels.pyx
DET, EXP, GAMMA, UNIFORM, TILTED_UNIFORM = 0, 1, 2, 3, 4


class DistributionSpec:
    """Common interface of the supported one-dimensional laws."""

    code: int = -1

    def mean(self) -> float:
        return self.raw_moment(1)

    def var(self) -> float:
        return self.central_moment(2)

    def raw_moment(self, k: int) -> float:
        raise NotImplementedError

    def central_moment(self, k: int) -> float:
        mu = self.raw_moment(1)
        return sum(comb(k, j) * self.raw_moment(j) * (-mu) ** (k - j) for j in range(k + 1))

    def log_mgf(self, x: float) -> float:
        raise NotImplementedError

    def mgf_bound(self) -> float:
        """Supremum of the right half of the mgf domain."""
        return math.inf

    def tilt(self, theta: float) -> "DistributionSpec":
        """Law with density proportional to exp(theta * x) times the original."""
        raise NotImplementedError

    def lower(self) -> float:
        raise NotImplementedError

    def sample(self, rng: np.random.Generator, size=None):
        raise NotImplementedError

    def size_biased_sample(self, rng: np.random.Generator, size=None):
        """Draw from x F(dx) / E x (requires nonnegative support)."""
        raise NotImplementedError

    def params(self) -> tuple[float, float, float]:
        raise NotImplementedError

    def encode(self) -> tuple[int, float, float, float]:
        return (self.code, *self.params())


@dataclass(frozen=True)
class Exponential(DistributionSpec):
    rate: float
    code = EXP

    def __post_init__(self):
        if not self.rate > 0:
            raise DomainError(f"exponential rate must be positive, got {self.rate}")

    def raw_moment(self, k):
        return math.factorial(k) / self.rate**k

    def central_moment(self, k):
        if k == 2:
            return 1.0 / self.rate**2
        if k == 3:
            return 2.0 / self.rate**3
        return super().central_moment(k)

    def log_mgf(self, x):
        if x >= self.rate:
            return math.inf
        return -math.log1p(-x / self.rate)

    def mgf_bound(self):
        return self.rate

    def tilt(self, theta):
        if theta >= self.rate:
            raise DomainError(f"tilt {theta} leaves the mgf domain (rate {self.rate})")
        return self if theta == 0 else Exponential(self.rate - theta)

    def lower(self):
        return 0.0

    def sample(self, rng, size=None):
        return rng.exponential(1.0 / self.rate, size)

    def size_biased_sample(self, rng, size=None):
        return rng.gamma(2.0, 1.0 / self.rate, size)

    def params(self):
        return (self.rate, 0.0, 0.0)

    def __str__(self):
        return f"exp({self.rate:g})"


@dataclass(frozen=True)
class Gamma(DistributionSpec):
    shape: float
    rate: float
    code = GAMMA

    def __post_init__(self):
        if not (self.shape > 0 and self.rate > 0):
            raise DomainError(f"gamma parameters must be positive, got ({self.shape}, {self.rate})")

    def raw_moment(self, k):
        out = 1.0
        for j in range(k):
            out *= (self.shape + j) / self.rate
        return out

    def central_moment(self, k):
        if k == 2:
            return self.shape / self.rate**2
        if k == 3:
            return 2.0 * self.shape / self.rate**3
        return super().central_moment(k)

    def log_mgf(self, x):
        if x >= self.rate:
            return math.inf
        return -self.shape * math.log1p(-x / self.rate)

    def mgf_bound(self):
        return self.rate

    def tilt(self, theta):
        if theta >= self.rate:
            raise DomainError(f"tilt {theta} leaves the mgf domain (rate {self.rate})")
        return self if theta == 0 else Gamma(self.shape, self.rate - theta)

    def lower(self):
        return 0.0

    def sample(self, rng, size=None):
        return rng.gamma(self.shape, 1.0 / self.rate, size)

    def size_biased_sample(self, rng, size=None):
        return rng.gamma(self.shape + 1.0, 1.0 / self.rate, size)

    def params(self):
        return (self.shape, self.rate, 0.0)

    def __str__(self):
        return f"gamma({self.shape:g},{self.rate:g})"


@dataclass(frozen=True)
class Uniform(DistributionSpec):
    lo: float
    hi: float
    code = UNIFORM

    def __post_init__(self):
        if not self.lo < self.hi:
            raise DomainError(f"uniform needs lo < hi, got ({self.lo}, {self.hi})")

    def raw_moment(self, k):
        return (self.hi ** (k + 1) - self.lo ** (k + 1)) / ((k + 1) * (self.hi - self.lo))

    def central_moment(self, k):
        if k == 2:
            return (self.hi - self.lo) ** 2 / 12.0
        if k == 3:
            return 0.0
        return super().central_moment(k)

    def log_mgf(self, x):
        w = self.hi - self.lo
        if x == 0:
            return 0.0
        return x * self.lo + math.log(math.expm1(x * w) / (x * w))

    def tilt(self, theta):
        return self if theta == 0 else TiltedUniform(self.lo, self.hi, theta)

    def lower(self):
        return self.lo

    def sample(self, rng, size=None):
        return rng.uniform(self.lo, self.hi, size)

    def size_biased_sample(self, rng, size=None):
        if self.lo < 0:
            raise DomainError("size-biasing needs nonnegative support")
        u = rng.random(size)
        return np.sqrt(self.lo**2 + u * (self.hi**2 - self.lo**2))

    def params(self):
        return (self.lo, self.hi, 0.0)

    def __str__(self):
        return f"uniform({self.lo:g},{self.hi:g})"


@dataclass(frozen=True)
class Deterministic(DistributionSpec):
    value: float
    code = DET

    def raw_moment(self, k):
        return self.value**k

    def central_moment(self, k):
        return 0.0 if k >= 1 else 1.0

    def log_mgf(self, x):
        return x * self.value

    def tilt(self, theta):
        return self

    def lower(self):
        return self.value

    def sample(self, rng, size=None):
        return self.value if size is None else np.full(size, float(self.value))

    def size_biased_sample(self, rng, size=None):
        return self.sample(rng, size)

    def params(self):
        return (self.value, 0.0, 0.0)

    def __str__(self):
        return f"det({self.value:g})"


@dataclass(frozen=True)
class TiltedUniform(DistributionSpec):
    """Density proportional to exp(theta x) on [lo, hi]; arises from tilting Uniform."""

    lo: float
    hi: float
    theta: float
    code = TILTED_UNIFORM

    def __post_init__(self):
        if not self.lo < self.hi:
            raise DomainError(f"need lo < hi, got ({self.lo}, {self.hi})")

    def _log_norm(self, theta):
        w = self.hi - self.lo
        if theta == 0:
            return math.log(w)
        return theta * self.lo + math.log(abs(math.expm1(theta * w) / theta))

    def raw_moment(self, k):
        if k == 0:
            return 1.0
        c = self._log_norm(self.theta)
        val, _ = _quad.quad(lambda x: x**k * math.exp(self.theta * x - c), self.lo, self.hi, epsabs=0, epsrel=1e-13)
        return val

    def log_mgf(self, x):
        return self._log_norm(self.theta + x) - self._log_norm(self.theta)

    def tilt(self, theta):
        return self if theta == 0 else TiltedUniform(self.lo, self.hi, self.theta + theta)

    def lower(self):
        return self.lo

    def sample(self, rng, size=None):
        u = rng.random(size)
        w = self.hi - self.lo
        if self.theta == 0:
            return self.lo + w * u
        return self.lo + np.log1p(u * np.expm1(self.theta * w)) / self.theta

    def params(self):
        return (self.lo, self.hi, self.theta)

    def __str__(self):
        return f"tilted_uniform({self.lo:g},{self.hi:g},{self.theta:g})"


# first-interval modes -------------------------------------------------------


@dataclass(frozen=True)
class Ordinary:
    pass


@dataclass(frozen=True)
class Modified:
    first: DistributionSpec


@dataclass(frozen=True)
class Equilibrium:
    pass


FirstIntervalMode = Union[Ordinary, Modified, Equilibrium]


@dataclass(frozen=True)
class Direct:
    t_dist: DistributionSpec
    x_dist: DistributionSpec
    first_interval: FirstIntervalMode = field(default_factory=Ordinary)

    def __post_init__(self):
        if self.t_dist.lower() < 0 or isinstance(self.t_dist, Deterministic) and self.t_dist.value <= 0:
            raise DomainError("direct basis needs T supported on (0, inf)")
        if isinstance(self.first_interval, Modified) and self.first_interval.first.lower() < 0:
            raise DomainError("modified first interval must be nonnegative")

    @property
    def regular(self) -> bool:
        return True


@dataclass(frozen=True)
class Risk:
    """T = Y - c X with independent positive X (times) and Y (claims)."""

    x_dist: DistributionSpec
    y_dist: DistributionSpec
    premium_c: float

    def __post_init__(self):
        if not self.premium_c > 0:
            raise DomainError(f"premium must be positive, got {self.premium_c}")
        if self.x_dist.lower() < 0 or self.y_dist.lower() < 0:
            raise DomainError("risk form needs positive X and Y")

    @property
    def regular(self) -> bool:
        return False

    def with_premium(self, c: float) -> "Risk":
        return Risk(self.x_dist, self.y_dist, c)


BasisSpec = Union[Direct, Risk]


@dataclass(frozen=True)
class MomentSet:
    """Means, variances and mixed central moments h[(i, j)] = E (X-mu_X)^i (T-mu_T)^j, i+j <= 3."""

    mu_T: float
    mu_X: float
    var_T: float
    var_X: float
    h: dict

    @property
    def cov_XT(self) -> float:
        return self.h[(1, 1)]

    def rescaled(self, x_scale: float = 1.0, t_scale: float = 1.0) -> "MomentSet":
        """Moments of (t_scale T, x_scale X)."""
        return MomentSet(
            mu_T=t_scale * self.mu_T,
            mu_X=x_scale * self.mu_X,
            var_T=t_scale**2 * self.var_T,
            var_X=x_scale**2 * self.var_X,
            h={(i, j): x_scale**i * t_scale**j * v for (i, j), v in self.h.items()},
        )

    @cached_property
    def raw(self) -> dict:
        """Raw mixed moments E X^i T^j, i+j <= 3."""
        out = {}
        for i in range(4):
            for j in range(4 - i):
                s = 0.0
                for a in range(i + 1):
                    for b in range(j + 1):
                        s += comb(i, a) * comb(j, b) * self.h[(a, b)] * self.mu_X ** (i - a) * self.mu_T ** (j - b)
                out[(i, j)] = s
        return out


def _central_list(d: DistributionSpec) -> list[float]:
    return [1.0, 0.0, d.central_moment(2), d.central_moment(3)]


def critical_premium(b: BasisSpec) -> float:
    """c* = E Y / E X; the sum is proper for c <= c* and defective above."""
    if not isinstance(b, Risk):
        raise UnsupportedError("critical premium is defined for the risk form only")
    return b.y_dist.mean() / b.x_dist.mean()


def moments(b: BasisSpec) -> MomentSet:
    """Exact moments of the stationary basis (first-interval modes are ignored)."""
    h = {}
    if isinstance(b, Direct):
        mx, mt = _central_list(b.x_dist), _central_list(b.t_dist)
        for i in range(4):
            for j in range(4 - i):
                h[(i, j)] = mx[i] * mt[j]
        return MomentSet(b.t_dist.mean(), b.x_dist.mean(), b.t_dist.var(), b.x_dist.var(), h)
    if isinstance(b, Risk):
        c = b.premium_c
        mx, my = _central_list(b.x_dist), _central_list(b.y_dist)
        # T~ = Y~ - c X~, expand E X~^i (Y~ - c X~)^j over independent X, Y
        for i in range(4):
            for j in range(4 - i):
                s = 0.0
                for k in range(j + 1):
                    s += comb(j, k) * my[k] * (-c) ** (j - k) * _central_any(b.x_dist, mx, i + j - k)
                h[(i, j)] = s
        mu_T = b.y_dist.mean() - c * b.x_dist.mean()
        return MomentSet(mu_T, b.x_dist.mean(), h[(0, 2)], h[(2, 0)], h)
    raise TypeError(f"not a basis: {b!r}")


def _central_any(d, cached, k):
    return cached[k] if k < len(cached) else d.central_moment(k)


def log_mgf_T(b: BasisSpec, x: float) -> float:
    """log E exp(x T)."""
    if isinstance(b, Risk):
        return b.y_dist.log_mgf(x) + b.x_dist.log_mgf(-b.premium_c * x)
    return b.t_dist.log_mgf(x)


def mgf_T_bound(b: BasisSpec) -> float:
    if isinstance(b, Risk):
        return b.y_dist.mgf_bound()
    return b.t_dist.mgf_bound()


def equilibrium_mean(d: DistributionSpec) -> float:
    """E T_eq = E T^2 / (2 E T)."""
    return d.raw_moment(2) / (2.0 * d.raw_moment(1))


def sample_first_t(b: Direct, rng: np.random.Generator) -> float:
    fi = b.first_interval
    if isinstance(fi, Modified):
        return float(fi.first.sample(rng))
    if isinstance(fi, Equilibrium):
        # equilibrium law = U * (size-biased T)
        return float(rng.random() * b.t_dist.size_biased_sample(rng))
    return float(b.t_dist.sample(rng))


def sample_pair(b: BasisSpec, rng: np.random.Generator, first: bool = False) -> tuple[float, float]:
    """One draw of (T_i, X_i); ``first=True`` applies the first-interval mode."""
    if isinstance(b, Risk):
        x = float(b.x_dist.sample(rng))
        y = float(b.y_dist.sample(rng))
        return y - b.premium_c * x, x
    t = sample_first_t(b, rng) if first else float(b.t_dist.sample(rng))
    return t, float(b.x_dist.sample(rng))


def sample_pairs(b: BasisSpec, rng: np.random.Generator, n: int) -> tuple[np.ndarray, np.ndarray]:
    """Vectorised i.i.d. draws of the stationary pair."""
    if isinstance(b, Risk):
        x = np.asarray(b.x_dist.sample(rng, n), dtype=float)
        y = np.asarray(b.y_dist.sample(rng, n), dtype=float)
        return y - b.premium_c * x, x
    return np.asarray(b.t_dist.sample(rng, n), dtype=float), np.asarray(b.x_dist.sample(rng, n), dtype=float)
