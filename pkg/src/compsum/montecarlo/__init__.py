"""Monte Carlo oracle for compound sums.

Every path draws from its own counter-based stream derived from
``(seed, path index)``, so results do not depend on the number of workers or
on which kernel backend (compiled or pure Python) runs them.
"""

from __future__ import annotations

import csv
import math
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass
from typing import Callable, Iterable, TextIO

import numpy as np

from ..basis import (
    BasisSpec,
    Deterministic,
    Direct,
    Equilibrium,
    Exponential,
    Gamma,
    Modified,
    Ordinary,
    Risk,
    TiltedUniform,
    Uniform,
    critical_premium,
    moments,
)
from ..errors import DomainError, UnsupportedError
from ._backend import available, backend_name, get_backend

__all__ = [
    "SimConfig",
    "PathOutcome",
    "PathOutcomes",
    "EmpiricalCdf",
    "LadderBlocks",
    "GarbageSample",
    "simulate_paths",
    "simulate_path",
    "ladder_dissection",
    "simulate_garbage",
    "spitzer_sums",
    "renewal_count_mean",
    "empirical_cdf",
    "sup_distance",
    "encode_basis",
    "get_backend",
    "available",
]

OK, CAPPED, ABANDONED, HORIZON, BAD_JUMP = 0, 1, 2, 3, 4
STATUS_NAMES = {OK: "ok", CAPPED: "capped", ABANDONED: "abandoned", HORIZON: "horizon", BAD_JUMP: "bad_jump"}

ENC_LEN = 19
# a path is dropped once its chance of ever crossing is below this (Lundberg bound)
ABANDON_EPS = 1e-12
# garbage sampling jumps to E N - GARBAGE_JUMP_SD standard deviations
GARBAGE_JUMP_SD = 8.0


@dataclass(frozen=True)
class SimConfig:
    n_paths: int
    seed: int = 0
    step_cap: int = 10**6
    workers: int = 1

    def __post_init__(self):
        if int(self.n_paths) != self.n_paths or self.n_paths < 1:
            raise DomainError(f"n_paths must be a positive integer, got {self.n_paths}")
        if not 0 <= int(self.seed) < 2**64:
            raise DomainError("seed must fit in an unsigned 64-bit integer")
        if self.step_cap < 1:
            raise DomainError("step_cap must be positive")
        if self.workers < 1:
            raise DomainError("workers must be positive")


# encoding -----------------------------------------------------------------


def _enc_dist(d) -> tuple[float, float, float, float]:
    if isinstance(d, TiltedUniform) and d.theta == 0:
        d = Uniform(d.lo, d.hi)
    code, p1, p2, p3 = d.encode()
    return float(code), float(p1), float(p2), float(p3)


def encode_basis(b: BasisSpec) -> np.ndarray:
    """Flat float64 layout read by the kernels (see ``_pykernels`` offsets)."""
    enc = np.zeros(ENC_LEN)
    if isinstance(b, Risk):
        enc[0] = 1.0
        enc[1] = b.premium_c
        enc[7:11] = _enc_dist(b.x_dist)
        enc[11:15] = _enc_dist(b.y_dist)
        return enc
    if not isinstance(b, Direct):
        raise TypeError(f"not a basis: {b!r}")
    fi = b.first_interval
    enc[3:7] = _enc_dist(b.t_dist)
    enc[7:11] = _enc_dist(b.x_dist)
    if isinstance(fi, Modified):
        enc[2] = 1.0
        enc[15:19] = _enc_dist(fi.first)
    elif isinstance(fi, Equilibrium):
        if not isinstance(b.t_dist, (Exponential, Gamma, Uniform, Deterministic)):
            raise UnsupportedError(f"equilibrium first interval not available for {b.t_dist}")
        enc[2] = 2.0
    return enc


def _kernel_enc(kern, enc: np.ndarray):
    # the Python kernels run faster on plain floats
    return [float(v) for v in enc] if backend_name(kern) == "python" else enc


def _chunks(n: int, workers: int) -> list[tuple[int, int]]:
    k = max(1, min(n, workers * 4 if workers > 1 else 1))
    edges = np.linspace(0, n, k + 1).astype(np.int64)
    return [(int(a), int(b)) for a, b in zip(edges[:-1], edges[1:]) if b > a]


def _run(job: Callable[[int, int], object], n: int, workers: int) -> list:
    parts = _chunks(n, workers)
    if workers == 1 or len(parts) == 1:
        return [job(a, b) for a, b in parts]
    with ThreadPoolExecutor(max_workers=workers) as pool:
        return list(pool.map(lambda ab: job(*ab), parts))


# path outcomes --------------------------------------------------------------


@dataclass(frozen=True)
class PathOutcome:
    crossed: bool
    n_inf: float  # int, or math.inf when the level is never crossed
    s_at_inf: float
    s_at_sup: float
    n_tsup: int  # -1 when untracked

    @property
    def n_sup(self) -> float:
        return self.n_inf - 1


@dataclass
class PathOutcomes:
    """Columnar outcomes of ``n`` paths."""

    level: float
    status: np.ndarray
    n_inf: np.ndarray
    s_inf: np.ndarray
    s_sup: np.ndarray
    n_tsup: np.ndarray
    s_tsup: np.ndarray
    stop_sum: float = math.inf

    def __len__(self) -> int:
        return len(self.status)

    @property
    def crossed(self) -> np.ndarray:
        return self.status == OK

    def fraction(self, code: int) -> float:
        return float(np.mean(self.status == code))

    @property
    def crossing_fraction(self) -> float:
        return self.fraction(OK)

    @property
    def capped_fraction(self) -> float:
        return self.fraction(CAPPED)

    def crossing_se(self) -> float:
        p = self.crossing_fraction
        return math.sqrt(max(p * (1.0 - p), 0.0) / len(self))

    def sample(self, which: str = "inf") -> np.ndarray:
        """S_{N_inf} (``"inf"``) or S_{N_inf - 1} (``"sup"``); +inf where not crossed."""
        vals = self.s_inf if which == "inf" else self.s_sup
        return np.where(self.crossed, vals, np.inf)

    def outcome(self, i: int) -> PathOutcome:
        crossed = bool(self.status[i] == OK)
        return PathOutcome(
            crossed,
            int(self.n_inf[i]) if crossed else math.inf,
            float(self.s_inf[i]) if crossed else math.inf,
            float(self.s_sup[i]) if crossed else math.inf,
            int(self.n_tsup[i]),
        )

    def write_csv(self, fh: TextIO, comment: str | None = None) -> None:
        """One row per path: crossed, n_inf, s_at_inf, s_at_sup (``inf`` if not crossed)."""
        if comment:
            fh.write(f"# {comment}\n")
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(["crossed", "n_inf", "s_at_inf", "s_at_sup"])
        for st, n, si, ss in zip(self.status.tolist(), self.n_inf.tolist(), self.s_inf.tolist(), self.s_sup.tolist()):
            if st == OK:
                w.writerow([1, n, repr(si), repr(ss)])
            else:
                w.writerow([0, "inf", "inf", "inf"])


def _abandon_level(b: BasisSpec, t: float) -> float:
    if isinstance(b, Risk) and b.premium_c > critical_premium(b):
        from ..ruin import lundberg_exponent

        return t - math.log(1.0 / ABANDON_EPS) / lundberg_exponent(b)
    return -math.inf


def _tsup_margin(b: BasisSpec) -> float:
    if b.regular:
        return 0.0
    if b.premium_c < critical_premium(b):
        from ..ruin import reverse_lundberg_exponent

        return math.log(1.0 / ABANDON_EPS) / reverse_lundberg_exponent(b)
    return -1.0  # V drifts to -inf or oscillates: last visit below t is infinite


def simulate_paths(
    b: BasisSpec,
    t: float,
    cfg: SimConfig,
    *,
    stop_sum: float = math.inf,
    abandon: bool = True,
    track_tsup: bool = True,
    backend: str | None = None,
) -> PathOutcomes:
    """Walk V_n = sum T_i and S_n = sum X_i until V_n > t, for every path.

    ``stop_sum`` stops a path once S exceeds it (valid for X >= 0: the sum
    at crossing can only be larger). In the defective risk regime paths whose
    chance of ever crossing has dropped below ``ABANDON_EPS`` are abandoned.
    """
    if not math.isfinite(t):
        raise DomainError("level must be finite")
    if math.isfinite(stop_sum) and _x_dist(b).lower() < 0:
        raise DomainError("stop_sum needs nonnegative X")
    kern = get_backend(backend)
    enc = _kernel_enc(kern, encode_basis(b))
    n = cfg.n_paths
    status = np.zeros(n, dtype=np.int8)
    n_inf = np.zeros(n, dtype=np.int64)
    s_inf = np.zeros(n)
    s_sup = np.zeros(n)
    n_tsup = np.zeros(n, dtype=np.int64)
    s_tsup = np.zeros(n)
    below = _abandon_level(b, t) if abandon else -math.inf
    margin = _tsup_margin(b) if track_tsup else -1.0

    def job(a, z):
        kern.run_paths(
            enc, float(t), cfg.seed, a, z, cfg.step_cap, below, float(stop_sum), margin,
            status[a:z], n_inf[a:z], s_inf[a:z], s_sup[a:z], n_tsup[a:z], s_tsup[a:z],
        )

    _run(job, n, cfg.workers)
    return PathOutcomes(float(t), status, n_inf, s_inf, s_sup, n_tsup, s_tsup, float(stop_sum))


def simulate_path(b: BasisSpec, t: float, cfg: SimConfig, index: int = 0, backend: str | None = None) -> PathOutcome:
    """Outcome of the single path ``index`` of the run described by ``cfg``."""
    kern = get_backend(backend)
    enc = _kernel_enc(kern, encode_basis(b))
    arr = [np.zeros(1, dtype=np.int8), np.zeros(1, dtype=np.int64), np.zeros(1), np.zeros(1), np.zeros(1, dtype=np.int64), np.zeros(1)]
    kern.run_paths(enc, float(t), cfg.seed, index, index + 1, cfg.step_cap, _abandon_level(b, t), math.inf, _tsup_margin(b), *arr)
    return PathOutcomes(float(t), *arr).outcome(0)


def _x_dist(b: BasisSpec):
    return b.x_dist


def renewal_count_mean(b: Direct, t: float, cfg: SimConfig, backend: str | None = None) -> tuple[float, float]:
    """Monte Carlo E N_sup(t) = E(N_inf(t) - 1) with its standard error."""
    if not isinstance(b, Direct):
        raise UnsupportedError("renewal counts need positive T (direct form)")
    out = simulate_paths(b, t, cfg, track_tsup=False, backend=backend)
    if out.capped_fraction > 0:
        raise DomainError("step cap reached before crossing; raise step_cap")
    n_sup = out.n_inf - 1
    return float(n_sup.mean()), float(n_sup.std(ddof=1) / math.sqrt(len(n_sup)))


# ladder (Blackwell) dissection --------------------------------------------


@dataclass
class LadderBlocks:
    """Blocks between strictly ascending ladder epochs, stored flat.

    Path ``i`` owns entries ``first[i] : first[i] + nblocks[i]``; a negative
    ``length`` marks a block cut short by the step cap.
    """

    level: float
    t: np.ndarray
    x: np.ndarray
    length: np.ndarray
    first: np.ndarray
    nblocks: np.ndarray
    status: np.ndarray
    n_inf: np.ndarray
    s_inf: np.ndarray

    def blocks(self, i: int) -> tuple[np.ndarray, np.ndarray, np.ndarray]:
        sl = slice(int(self.first[i]), int(self.first[i] + self.nblocks[i]))
        return self.t[sl], self.x[sl], self.length[sl]

    def truncated(self) -> np.ndarray:
        return self.status != OK

    def first_blocks(self) -> tuple[np.ndarray, np.ndarray, np.ndarray]:
        """(nu_1, T-bar_1, X-bar_1) over paths whose first block is complete."""
        idx = self.first[self.nblocks > 0]
        ok = self.length[idx] > 0
        idx = idx[ok]
        return self.length[idx], self.t[idx], self.x[idx]


def ladder_dissection(
    b: BasisSpec, t: float, cfg: SimConfig, backend: str | None = None, buffer_hint: int | None = None
) -> LadderBlocks:
    """Regroup each path into ladder blocks up to the first passage of ``t``."""
    if isinstance(b, Risk) and b.premium_c >= critical_premium(b):
        raise DomainError("ladder dissection needs the proper regime (E T > 0)")
    kern = get_backend(backend)
    enc = _kernel_enc(kern, encode_basis(b))
    n = cfg.n_paths
    first = np.zeros(n, dtype=np.int64)
    nblocks = np.zeros(n, dtype=np.int64)
    status = np.zeros(n, dtype=np.int8)
    n_inf = np.zeros(n, dtype=np.int64)
    s_inf = np.zeros(n)

    def job(a, z):
        size = buffer_hint or max(64, 8 * (z - a))
        bt, bx, bl = np.zeros(size), np.zeros(size), np.zeros(size, dtype=np.int64)
        nxt, used = a, 0
        while True:
            nxt, used = kern.ladder_walk(
                enc, float(t), cfg.seed, nxt, z, cfg.step_cap, bt, bx, bl, used,
                first[nxt:z], nblocks[nxt:z], status[nxt:z], n_inf[nxt:z], s_inf[nxt:z],
            )
            if nxt >= z:
                return bt[:used], bx[:used], bl[:used]
            size *= 2
            bt, bx, bl = (np.concatenate([arr, np.zeros(size - len(arr), dtype=arr.dtype)]) for arr in (bt, bx, bl))

    parts = _run(job, n, cfg.workers)
    offset = 0
    for (a, z), (bt, _, _) in zip(_chunks(n, cfg.workers), parts):
        first[a:z] += offset
        offset += len(bt)
    return LadderBlocks(
        float(t),
        np.concatenate([p[0] for p in parts]),
        np.concatenate([p[1] for p in parts]),
        np.concatenate([p[2] for p in parts]),
        first,
        nblocks,
        status,
        n_inf,
        s_inf,
    )


# garbage term ---------------------------------------------------------------


@dataclass
class GarbageSample:
    values: np.ndarray  # scaled, finite entries only
    raw: np.ndarray  # unscaled G_t per path (nan on failure)
    n_sup: np.ndarray
    status: np.ndarray
    scale: float
    n_center: int
    jump_m0: int

    @property
    def failed_fraction(self) -> float:
        return float(np.mean(self.status != OK))


def _jump(b: Direct, t: float, n_center: int, mom) -> tuple[int, float, float]:
    if not isinstance(b.first_interval, Ordinary):
        return 0, 0.0, 0.0
    sd = math.sqrt(t * mom.var_T / mom.mu_T**3)
    m0 = int(max(0, min(n_center, math.floor(t / mom.mu_T - GARBAGE_JUMP_SD * sd - 1.0))))
    if m0 == 0:
        return 0, 0.0, 0.0
    d = b.t_dist
    if isinstance(d, Exponential):
        return m0, float(m0), d.rate
    if isinstance(d, Gamma):
        return m0, m0 * d.shape, d.rate
    if isinstance(d, Deterministic):
        return m0, m0 * d.value, 0.0
    return 0, 0.0, 0.0


def simulate_garbage(b: Direct, t: float, cfg: SimConfig, jump: bool = True, backend: str | None = None) -> GarbageSample:
    """Scaled garbage G_t = S~_{N_sup(t)} - S~_{floor(E N_sup(t))} with centred X.

    E N_sup(t) comes from the refined renewal mean. For exponential, gamma and
    deterministic T the T-walk starts with an exact draw of V_{m0}, m0 lying
    ``GARBAGE_JUMP_SD`` standard deviations below E N.
    """
    from ..renewal import garbage_scale, renewal_mean_refined

    if not isinstance(b, Direct):
        raise UnsupportedError("garbage term is defined for regular summation (positive T)")
    mom = moments(b)
    scale = garbage_scale(mom, t)
    n_center = int(math.floor(renewal_mean_refined(mom, t)))
    m0, shape, rate = _jump(b, t, n_center, mom) if jump else (0, 0.0, 0.0)
    kern = get_backend(backend)
    enc = _kernel_enc(kern, encode_basis(b))
    n = cfg.n_paths
    g = np.zeros(n)
    nsup = np.zeros(n, dtype=np.int64)
    status = np.zeros(n, dtype=np.int8)

    def job(a, z):
        kern.garbage_walk(
            enc, float(t), cfg.seed, a, z, n_center, m0, shape, rate, mom.mu_X, cfg.step_cap,
            g[a:z], nsup[a:z], status[a:z],
        )

    _run(job, n, cfg.workers)
    ok = status == OK
    return GarbageSample(g[ok] * scale, g, nsup, status, scale, n_center, m0)


# Spitzer series ---------------------------------------------------------------


def spitzer_sums(
    b: BasisSpec,
    n_max: int,
    n_paths: int,
    seed: int = 0,
    positive: bool = True,
    workers: int = 1,
    backend: str | None = None,
) -> tuple[float, float]:
    """Estimate sum_n P{V_n > 0}/n (or P{V_n <= 0}/n) and its standard error.

    Terms beyond ``n_max`` are added from a geometric fit to the tail of the
    per-n hit frequencies.
    """
    cfg = SimConfig(n_paths, seed, workers=workers)
    kern = get_backend(backend)
    enc = _kernel_enc(kern, encode_basis(b))
    weights = np.zeros(n_paths)

    def job(a, z):
        counts = np.zeros(n_max, dtype=np.int64)
        kern.spitzer_walk(enc, n_max, cfg.seed, a, z, bool(positive), counts, weights[a:z])
        return counts

    counts = np.sum(_run(job, n_paths, workers), axis=0)
    head = float(weights.mean())
    se = float(weights.std(ddof=1) / math.sqrt(n_paths))
    return head + _geometric_tail(counts / n_paths, n_max), se


def _geometric_tail(p: np.ndarray, n_max: int, window: int = 50) -> float:
    lo = max(0, n_max - window)
    ns = np.arange(lo + 1, n_max + 1)
    seg = p[lo:]
    mask = seg > 0
    if mask.sum() < 5:
        return 0.0
    slope, icpt = np.polyfit(ns[mask], np.log(seg[mask]), 1)
    q = math.exp(slope)
    if q >= 1.0:
        return 0.0
    k = np.arange(n_max + 1, n_max + 1 + 20000)
    return float(np.sum(np.exp(icpt + slope * k) / k))


# empirical distribution functions ------------------------------------------


@dataclass(frozen=True)
class EmpiricalCdf:
    """Right-continuous step function; non-finite samples are mass at +inf."""

    values: np.ndarray
    n_total: int

    @property
    def defect(self) -> float:
        return 1.0 - len(self.values) / self.n_total

    def __call__(self, x):
        return np.searchsorted(self.values, x, side="right") / self.n_total

    def left(self, x):
        return np.searchsorted(self.values, x, side="left") / self.n_total

    def quantile(self, q: float) -> float:
        k = int(math.ceil(q * self.n_total)) - 1
        return float(self.values[k]) if 0 <= k < len(self.values) else math.inf


def empirical_cdf(samples: Iterable[float]) -> EmpiricalCdf:
    arr = np.asarray(list(samples) if not isinstance(samples, np.ndarray) else samples, dtype=float).ravel()
    if arr.size == 0:
        raise DomainError("empty sample")
    if np.any(np.isnan(arr)):
        raise DomainError("sample contains nan")
    finite = np.sort(arr[np.isfinite(arr) | (arr == -np.inf)])
    return EmpiricalCdf(finite, int(arr.size))


def _eval(f, x: np.ndarray) -> np.ndarray:
    try:
        out = np.asarray(f(x), dtype=float)
        if out.shape == x.shape:
            return out
    except (TypeError, ValueError):
        pass
    return np.array([float(f(float(v))) for v in x])


def sup_distance(e: EmpiricalCdf, f: Callable, grid: Iterable[float] | None = None) -> float:
    """sup_x |e(x) - f(x)| over jump points (both one-sided limits), ``grid`` and +inf."""
    v = np.unique(e.values)
    best = 0.0
    if v.size:
        fv = _eval(f, v)
        fl = _eval(f, np.nextafter(v, -np.inf))
        best = max(float(np.max(np.abs(e(v) - fv))), float(np.max(np.abs(e.left(v) - fl))))
    if grid is not None:
        g = np.asarray(list(grid), dtype=float)
        if g.size:
            best = max(best, float(np.max(np.abs(e(g) - _eval(f, g)))))
    try:
        f_inf = float(np.asarray(f(np.inf), dtype=float))
    except (ValueError, ArithmeticError, TypeError):
        f_inf = None
    if f_inf is not None and math.isfinite(f_inf):
        best = max(best, abs(1.0 - e.defect - f_inf))
    return best
