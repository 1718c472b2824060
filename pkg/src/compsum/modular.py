"""Markov-modulated bases and their regeneration blocks.

The driving chain J_0, J_1, ... is a finite irreducible Markov chain; the
summand (T_i, X_i) is drawn from a law attached to the transition
(J_{i-1}, J_i). Returns of the chain to a reference state cut the sequence
into an initial block and i.i.d. blocks (tau_k, T_k, X_k) with positive
T-sums, which reduces the modulated sum to a simple one over blocks.
"""

from __future__ import annotations

import math
from collections import deque
from dataclasses import dataclass, field

import numpy as np

from .basis import Deterministic, DistributionSpec
from .errors import DegeneracyError, DomainError, ModelError
from .montecarlo import OK, SimConfig, _run, get_backend
from .montecarlo import _enc_dist
from .montecarlo._backend import backend_name
from .renewal import RewardApproxParams

DET_FLOOR = 1e-6


@dataclass(frozen=True, eq=False)
class MarkovModulatedBasis:
    transition: np.ndarray
    t_dists: tuple  # t_dists[i][j]: law of T on the transition i -> j
    x_dists: tuple
    initial_state: int = 0
    reference_state: int = 0

    def __post_init__(self):
        p = np.asarray(self.transition, dtype=float)
        object.__setattr__(self, "transition", p)
        k = p.shape[0]
        if p.ndim != 2 or p.shape[1] != k or k < 1:
            raise ModelError("transition matrix must be square")
        if np.any(p < 0) or not np.allclose(p.sum(axis=1), 1.0, rtol=0, atol=1e-12):
            raise ModelError("transition rows must be probability vectors")
        for name in ("initial_state", "reference_state"):
            if not 0 <= getattr(self, name) < k:
                raise ModelError(f"{name} out of range")
        for dists, what in ((self.t_dists, "T"), (self.x_dists, "X")):
            if len(dists) != k or any(len(row) != k for row in dists):
                raise ModelError(f"need a {k}x{k} table of {what} laws")
        for i in range(k):
            for j in range(k):
                d = self.t_dists[i][j]
                if d.lower() < 0 or (isinstance(d, Deterministic) and d.value <= 0):
                    raise ModelError(f"T law on {i}->{j} must live on (0, inf)")
        if not is_irreducible(p):
            raise ModelError("transition matrix is not irreducible")

    @property
    def n_states(self) -> int:
        return self.transition.shape[0]

    @classmethod
    def per_state(cls, transition, t_by_state, x_by_state, initial_state=0, reference_state=0):
        """Laws depending only on the state being left."""
        k = len(t_by_state)
        t = tuple(tuple(t_by_state[i] for _ in range(k)) for i in range(k))
        x = tuple(tuple(x_by_state[i] for _ in range(k)) for i in range(k))
        return cls(np.asarray(transition, dtype=float), t, x, initial_state, reference_state)

    def _tables(self):
        k = self.n_states
        tt = np.zeros((k, k, 4))
        xx = np.zeros((k, k, 4))
        for i in range(k):
            for j in range(k):
                tt[i, j] = _enc_dist(self.t_dists[i][j])
                xx[i, j] = _enc_dist(self.x_dists[i][j])
        pcum = np.cumsum(self.transition, axis=1)
        pcum[:, -1] = 1.0
        return pcum, tt, xx


def is_irreducible(p: np.ndarray) -> bool:
    """Every state reaches every other one (breadth-first search on p > 0)."""
    k = p.shape[0]
    for s in range(k):
        seen = {s}
        queue = deque([s])
        while queue:
            i = queue.popleft()
            for j in np.flatnonzero(p[i] > 0):
                if j not in seen:
                    seen.add(int(j))
                    queue.append(int(j))
        if len(seen) < k:
            return False
    return True


def stationary_distribution(p: np.ndarray) -> np.ndarray:
    k = p.shape[0]
    a = np.vstack([p.T - np.eye(k), np.ones(k)])
    rhs = np.zeros(k + 1)
    rhs[-1] = 1.0
    pi, *_ = np.linalg.lstsq(a, rhs, rcond=None)
    return pi


def kac_return_time(b: MarkovModulatedBasis) -> float:
    """Mean return time to the reference state, 1 / pi(ref)."""
    return 1.0 / stationary_distribution(b.transition)[b.reference_state]


def _kernel_args(kern, b: MarkovModulatedBasis):
    pcum, tt, xx = b._tables()
    if backend_name(kern) == "python":
        return pcum.tolist(), tt.tolist(), xx.tolist()
    return pcum, tt, xx


# block statistics ----------------------------------------------------------


@dataclass
class BlockStats:
    """Regeneration blocks of ``n_replicates`` independent trajectories.

    Column 0 holds the initial block, columns 1.. the stationary ones; the
    estimates pool all stationary blocks.
    """

    tau: np.ndarray
    T: np.ndarray
    X: np.ndarray
    labels: tuple = ("X", "T", "tau")
    mean: np.ndarray = field(init=False)
    cov: np.ndarray = field(init=False)
    Q: np.ndarray = field(init=False)
    det_Q: float = field(init=False)
    n: int = field(init=False)

    def __post_init__(self):
        z = self.stationary()
        self.n = z.shape[0]
        if self.n < 3:
            raise DomainError("need at least three stationary blocks")
        self.mean = z.mean(axis=0)
        self.cov = np.cov(z, rowvar=False)
        if not self.mean[1] > 0:
            raise DegeneracyError("mean block T must be positive")
        self.Q, self.det_Q = _correlation(self.cov)

    def stationary(self) -> np.ndarray:
        """(X, T, tau) rows of every block k >= 1."""
        return np.column_stack([self.X[:, 1:].ravel(), self.T[:, 1:].ravel(), self.tau[:, 1:].ravel().astype(float)])

    @property
    def mu_tau(self) -> float:
        return float(self.mean[2])

    @property
    def mu_T(self) -> float:
        return float(self.mean[1])

    @property
    def mu_X(self) -> float:
        return float(self.mean[0])

    def mu_tau_se(self) -> float:
        return float(math.sqrt(self.cov[2, 2] / self.n))


def _correlation(cov: np.ndarray) -> tuple[np.ndarray, float]:
    sd = np.sqrt(np.diag(cov))
    keep = sd > 0
    if keep.sum() < 2:
        raise DegeneracyError("block X and T must both vary")
    c = cov[np.ix_(keep, keep)] / np.outer(sd[keep], sd[keep])
    # a constant block length (single-state chain) carries no information; drop it
    return c, float(np.linalg.det(c))


def extract_blocks(
    b: MarkovModulatedBasis, n_blocks: int, cfg: SimConfig, backend: str | None = None
) -> BlockStats:
    """Simulate ``cfg.n_paths`` trajectories, each cut into 1 + ``n_blocks`` blocks."""
    if n_blocks < 1:
        raise DomainError("n_blocks must be positive")
    kern = get_backend(backend)
    pcum, tt, xx = _kernel_args(kern, b)
    r = cfg.n_paths
    tau = np.zeros((r, n_blocks + 1), dtype=np.int64)
    t_out = np.zeros((r, n_blocks + 1))
    x_out = np.zeros((r, n_blocks + 1))
    status = np.zeros(r, dtype=np.int8)

    def job(a, z):
        kern.markov_blocks(
            pcum, tt, xx, b.n_states, b.initial_state, b.reference_state, n_blocks, cfg.seed, a, z, cfg.step_cap,
            tau[a:z], t_out[a:z], x_out[a:z], status[a:z],
        )

    _run(job, r, cfg.workers)
    if np.any(status != OK):
        raise ModelError(f"reference state {b.reference_state} not reached within {cfg.step_cap} steps")
    return BlockStats(tau, t_out, x_out)


def simulate_modulated(b: MarkovModulatedBasis, t: float, cfg: SimConfig, backend: str | None = None):
    """S_{N_inf(t)} per path; returns (status, n_inf, s_inf)."""
    kern = get_backend(backend)
    pcum, tt, xx = _kernel_args(kern, b)
    n = cfg.n_paths
    status = np.zeros(n, dtype=np.int8)
    n_inf = np.zeros(n, dtype=np.int64)
    s_inf = np.zeros(n)

    def job(a, z):
        kern.markov_walk(
            pcum, tt, xx, b.n_states, b.initial_state, float(t), cfg.seed, a, z, cfg.step_cap,
            status[a:z], n_inf[a:z], s_inf[a:z],
        )

    _run(job, n, cfg.workers)
    return status, n_inf, s_inf


# normal approximation over blocks ------------------------------------------


def _clt_from_moments(a: np.ndarray) -> tuple[float, float]:
    # a = (E T, E X, E T^2, E X^2, E XT)
    mt, mx, t2, x2, xt = a
    m = mx / mt
    s2 = (mt * mt * x2 - 2.0 * mt * mx * xt + mx * mx * t2) / mt**3
    return m, s2


def modular_clt_params(s: BlockStats, det_floor: float = DET_FLOOR) -> RewardApproxParams:
    """m_S = mu_X / mu_T, sigma_S^2 = E(mu_T X - mu_X T)^2 / mu_T^3 over blocks."""
    if not s.det_Q > det_floor:
        raise DegeneracyError(f"block correlation matrix is degenerate: det Q = {s.det_Q:.3g} <= {det_floor:g}")
    m, s2 = _clt_from_moments(_block_moments(s).mean(axis=0))
    if not s2 > 0:
        raise DegeneracyError("sigma_S^2 estimate is not positive")
    return RewardApproxParams(m, math.sqrt(s2))


def _block_moments(s: BlockStats) -> np.ndarray:
    z = s.stationary()
    x, t = z[:, 0], z[:, 1]
    return np.column_stack([t, x, t * t, x * x, x * t])


def modular_clt_standard_errors(s: BlockStats) -> tuple[float, float]:
    """Delta-method standard errors of (m_S, sigma_S^2)."""
    w = _block_moments(s)
    a = w.mean(axis=0)
    cov = np.cov(w, rowvar=False) / w.shape[0]
    grad = np.zeros((2, 5))
    for j in range(5):
        h = 1e-6 * max(abs(a[j]), 1.0)
        up, dn = a.copy(), a.copy()
        up[j] += h
        dn[j] -= h
        grad[:, j] = (np.array(_clt_from_moments(up)) - np.array(_clt_from_moments(dn))) / (2.0 * h)
    var = np.einsum("ij,jk,ik->i", grad, cov, grad)
    return float(math.sqrt(var[0])), float(math.sqrt(var[1]))


def single_state(t_dist: DistributionSpec, x_dist: DistributionSpec) -> MarkovModulatedBasis:
    """Degenerate modulation: one state, every block is one summand."""
    return MarkovModulatedBasis(np.ones((1, 1)), ((t_dist,),), ((x_dist,),))
