"""Command-line interface: ``compsum <command> --config model.cfg ...``.

Every command writes CSV (to ``--out`` or stdout) starting with a comment
line that records the command, the config digest and the seed.
"""

from __future__ import annotations

import argparse
import csv
import io
import math
import sys
from contextlib import contextmanager
from pathlib import Path

import numpy as np

from . import __version__
from .basis import Direct, Risk, critical_premium, moments
from .config import ModelConfig, load_config
from .errors import CompsumError, ConfigError, RegimeError, UnsupportedError
from .exact import ExpModel, exact_cdf
from .montecarlo import (
    SimConfig,
    empirical_cdf,
    renewal_count_mean,
    simulate_garbage,
    simulate_paths,
    sup_distance,
)
from .renewal import (
    cumulated_rewards_cdf_edgeworth,
    cumulated_rewards_cdf_normal,
    edgeworth_q1,
    garbage_limit_cdf_vec,
    renewal_mean_elementary,
    renewal_mean_refined,
    reward_params,
)
from .ruin import (
    inverse_gaussian_cdf_approx,
    inverse_gaussian_params,
    normal_params,
    proper_cdf_normal,
    quasi_normal_cdf,
    quasi_normal_params,
)

SWEEP_METHODS = ("exact", "ig", "normal", "qnormal", "simulate")
METHOD_ALIASES = {"inverse-gaussian": "ig", "quasi-normal": "qnormal"}


def _count(text: str) -> int:
    try:
        v = float(text)
    except ValueError:
        raise argparse.ArgumentTypeError(f"not a number: {text!r}") from None
    if v != int(v) or v < 1:
        raise argparse.ArgumentTypeError(f"expected a positive integer, got {text!r}")
    return int(v)


def _seed(text: str) -> int:
    v = int(text, 0)
    if not 0 <= v < 2**64:
        raise argparse.ArgumentTypeError("seed must be an unsigned 64-bit integer")
    return v


def _range(text: str) -> tuple[float, float, int]:
    try:
        lo, hi, steps = text.split(":")
        lo, hi, steps = float(lo), float(hi), int(steps)
    except ValueError:
        raise argparse.ArgumentTypeError(f"expected lo:hi:steps, got {text!r}") from None
    if not lo < hi or steps < 2:
        raise argparse.ArgumentTypeError("need lo < hi and steps >= 2")
    return lo, hi, steps


def _floats(text: str) -> list[float]:
    try:
        return [float(v) for v in text.split(",") if v.strip()]
    except ValueError:
        raise argparse.ArgumentTypeError(f"expected comma-separated numbers, got {text!r}") from None


def _methods(text: str) -> list[str]:
    out = []
    for m in (s.strip() for s in text.split(",")):
        m = METHOD_ALIASES.get(m, m)
        if m == "edgeworth":
            raise argparse.ArgumentTypeError("edgeworth applies to positive T; use 'approx' with a direct config")
        if m not in SWEEP_METHODS:
            raise argparse.ArgumentTypeError(f"unknown method {m!r}; choose from {', '.join(SWEEP_METHODS)}")
        out.append(m)
    return out


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="compsum", description="Distributions of compound sums with random stopping")
    parser.add_argument("--version", action="version", version=f"%(prog)s {__version__}")
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--config", required=True, help="model config file")
    common.add_argument("--seed", type=_seed, default=0)
    common.add_argument("--paths", type=_count, default=100_000, help="Monte Carlo paths")
    common.add_argument("--cap", type=_count, default=10**6, help="step cap per path")
    common.add_argument("--workers", type=_count, default=1)
    common.add_argument("--out", help="output CSV (default: stdout)")
    common.add_argument("--level", type=float, help="level t (overrides the config)")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("exact", parents=[common], help="exact CDF of the exponential risk model")
    p.add_argument("--horizon", type=_floats, help="horizon(s) x, comma separated")

    p = sub.add_parser("approx", parents=[common], help="one approximation on a grid of x")
    p.add_argument("--method", required=True, choices=["normal", "qnormal", "ig", "edgeworth"])
    p.add_argument("--horizon", type=_floats, help="point(s) x, comma separated")
    p.add_argument("--grid", type=_range, help="lo:hi:steps grid of x")

    p = sub.add_parser("simulate", parents=[common], help="dump simulated path outcomes")

    p = sub.add_parser("sweep", parents=[common], help="sweep the premium c")
    p.add_argument("--c", type=_range, required=True, dest="c_range", help="lo:hi:steps")
    p.add_argument("--horizon", type=float)
    p.add_argument("--methods", type=_methods, default=list(SWEEP_METHODS[:4]))

    p = sub.add_parser("renewal", parents=[common], help="expected renewal count E N_sup(t)")

    p = sub.add_parser("garbage", parents=[common], help="scaled garbage term sample and limit law")
    p.add_argument("--t", type=float, dest="t_level", help="level t (alias of --level)")

    p = sub.add_parser("modular", parents=[common], help="regeneration-block normal approximation")
    p.add_argument("--blocks", type=_count, default=100_000, help="stationary blocks per replicate")
    p.add_argument("--replicates", type=_count, default=50)
    return parser


@contextmanager
def _sink(path: str | None):
    if path is None:
        yield sys.stdout
    else:
        with open(path, "w", encoding="utf-8", newline="") as fh:
            yield fh


def _write(fh, header: str, columns: list[str], rows) -> None:
    fh.write(f"# {header}\n")
    w = csv.writer(fh, lineterminator="\n")
    w.writerow(columns)
    for row in rows:
        w.writerow([_fmt(v) for v in row])


def _fmt(v) -> str:
    if isinstance(v, (float, np.floating)):
        v = float(v)
        return "nan" if math.isnan(v) else repr(v)
    return str(v)


def _header(args, cfg: ModelConfig, extra: str = "") -> str:
    s = f"compsum {__version__} {args.command} config={cfg.digest} seed={args.seed}"
    return s + (f" {extra}" if extra else "")


def _level(args, cfg: ModelConfig) -> float:
    t = getattr(args, "t_level", None) or args.level or cfg.level
    if t is None:
        raise ConfigError("no level: pass --level or set 'level' in the config")
    return float(t)


def _horizons(args, cfg: ModelConfig) -> list[float]:
    xs = []
    if getattr(args, "horizon", None):
        xs = list(args.horizon) if isinstance(args.horizon, list) else [args.horizon]
    if getattr(args, "grid", None):
        lo, hi, n = args.grid
        xs += list(np.linspace(lo, hi, n))
    if not xs and cfg.horizon is not None:
        xs = [cfg.horizon]
    if not xs:
        raise ConfigError("no horizon: pass --horizon/--grid or set 'horizon' in the config")
    return [float(x) for x in xs]


def _sim_cfg(args) -> SimConfig:
    return SimConfig(args.paths, args.seed, args.cap, args.workers)


def _risk(cfg: ModelConfig) -> Risk:
    if not isinstance(cfg.basis, Risk):
        raise UnsupportedError("this command needs form = risk")
    return cfg.basis


def _direct(cfg: ModelConfig) -> Direct:
    if not isinstance(cfg.basis, Direct):
        raise UnsupportedError("this command needs form = direct")
    return cfg.basis


def cmd_exact(args, cfg, fh):
    b = _risk(cfg)
    m = ExpModel.from_basis(b, _level(args, cfg))
    rows = [(x, exact_cdf(m, x)) for x in _horizons(args, cfg)]
    _write(fh, _header(args, cfg), ["x", "exact"], rows)


def _approx_value(method: str, b, t: float, x: float) -> float:
    if method == "normal":
        return float(proper_cdf_normal(normal_params(b), t, x))
    if method == "qnormal":
        return float(quasi_normal_cdf(quasi_normal_params(b), t, x))
    if method == "ig":
        return inverse_gaussian_cdf_approx(inverse_gaussian_params(b, t), x)
    raise ValueError(method)


def cmd_approx(args, cfg, fh):
    t = _level(args, cfg)
    xs = _horizons(args, cfg)
    b = cfg.basis
    if args.method == "edgeworth":
        if not isinstance(b, Direct):
            raise UnsupportedError(
                "edgeworth needs the direct form with positive T and finite third moments of (T, X); "
                f"config form is {cfg.form!r}"
            )
        mom = moments(b)
        p = reward_params(mom)
        q1 = edgeworth_q1(mom)
        rows = [(x, float(cumulated_rewards_cdf_edgeworth(p, q1, t, x))) for x in xs]
    elif args.method == "normal" and isinstance(b, Direct):
        p = reward_params(moments(b))
        rows = [(x, float(cumulated_rewards_cdf_normal(p, t, x))) for x in xs]
    else:
        rows = [(x, _approx_value(args.method, _risk(cfg), t, x)) for x in xs]
    _write(fh, _header(args, cfg, f"level={t!r}"), ["x", args.method], rows)


def cmd_simulate(args, cfg, fh):
    t = _level(args, cfg)
    out = simulate_paths(cfg.basis, t, _sim_cfg(args))
    out.write_csv(fh, comment=_header(args, cfg, f"level={t!r} paths={args.paths}"))
    print(
        f"crossed {out.crossing_fraction:.6g} +- {out.crossing_se():.2g}, capped {out.capped_fraction:.3g}",
        file=sys.stderr,
    )


def cmd_sweep(args, cfg, fh):
    base = _risk(cfg)
    t = _level(args, cfg)
    x = args.horizon if args.horizon is not None else cfg.horizon
    if x is None:
        raise ConfigError("no horizon: pass --horizon or set 'horizon' in the config")
    lo, hi, steps = args.c_range
    rows = []
    for c in np.linspace(lo, hi, steps):
        b = base.with_premium(float(c))
        row = [float(c)]
        for m in args.methods:
            row.append(_sweep_cell(m, b, t, x, args))
        rows.append(row)
    _write(fh, _header(args, cfg, f"level={t!r} horizon={x!r}"), ["c", *args.methods], rows)


def _sweep_cell(method, b, t, x, args) -> float:
    if method == "exact":
        return exact_cdf(ExpModel.from_basis(b, t), x)
    if method == "simulate":
        out = simulate_paths(b, t, _sim_cfg(args), stop_sum=x, track_tsup=False)
        return float(np.mean(out.crossed & (out.s_inf <= x)))
    c_star = critical_premium(b)
    if (method == "normal" and b.premium_c >= c_star) or (method == "qnormal" and b.premium_c <= c_star):
        return math.nan  # outside the method's regime
    return _approx_value(method, b, t, x)


def cmd_renewal(args, cfg, fh):
    b = _direct(cfg)
    t = _level(args, cfg)
    mom = moments(b)
    mean, se = renewal_count_mean(b, t, _sim_cfg(args))
    rows = [(t, renewal_mean_elementary(mom.mu_T, t), renewal_mean_refined(mom, t), mean, se)]
    _write(fh, _header(args, cfg, f"paths={args.paths}"), ["t", "elementary", "refined", "simulated", "simulated_se"], rows)


def cmd_garbage(args, cfg, fh_unused):
    b = _direct(cfg)
    t = _level(args, cfg)
    if args.out is None:
        raise ConfigError("garbage writes two files; pass --out PREFIX")
    g = simulate_garbage(b, t, _sim_cfg(args))
    e = empirical_cdf(g.values)
    header = _header(args, cfg, f"level={t!r} paths={args.paths} scale={g.scale!r}")
    prefix = Path(args.out)
    sample_path = prefix.with_name(prefix.name + "_sample.csv")
    limit_path = prefix.with_name(prefix.name + "_limit.csv")
    with open(sample_path, "w", encoding="utf-8", newline="") as fh:
        _write(fh, header, ["g", "ecdf"], zip(e.values.tolist(), (np.arange(1, len(e.values) + 1) / e.n_total).tolist()))
    grid = np.linspace(-5.0, 5.0, 201)
    with open(limit_path, "w", encoding="utf-8", newline="") as fh:
        _write(fh, header, ["g", "limit_cdf"], zip(grid.tolist(), garbage_limit_cdf_vec(grid).tolist()))
    d = sup_distance(e, garbage_limit_cdf_vec, grid)
    print(f"sup distance to the limit law {d:.4g}; failed paths {g.failed_fraction:.3g}", file=sys.stderr)


def cmd_modular(args, cfg, fh):
    from .modular import (
        MarkovModulatedBasis,
        extract_blocks,
        kac_return_time,
        modular_clt_params,
        modular_clt_standard_errors,
        simulate_modulated,
    )

    b = cfg.basis
    if not isinstance(b, MarkovModulatedBasis):
        raise UnsupportedError("modular needs form = markov")
    t = _level(args, cfg)
    s = extract_blocks(b, args.blocks, SimConfig(args.replicates, args.seed, args.cap, args.workers))
    p = modular_clt_params(s)
    se_m, se_s2 = modular_clt_standard_errors(s)
    status, _, s_inf = simulate_modulated(b, t, SimConfig(args.paths, args.seed + 1, args.cap, args.workers))
    e = empirical_cdf(np.where(status == 0, p.standardize(t, s_inf), np.inf))
    from .special import std_normal_cdf

    d = sup_distance(e, std_normal_cdf)
    cols = ["level", "m_S", "m_S_se", "sigma_S_sq", "sigma_S_sq_se", "mu_tau", "mu_tau_se", "kac", "det_Q", "sup_distance"]
    row = (t, p.m_S, se_m, p.sigma_S**2, se_s2, s.mu_tau, s.mu_tau_se(), kac_return_time(b), s.det_Q, d)
    _write(fh, _header(args, cfg, f"blocks={args.blocks}x{args.replicates} paths={args.paths}"), cols, [row])


COMMANDS = {
    "exact": cmd_exact,
    "approx": cmd_approx,
    "simulate": cmd_simulate,
    "sweep": cmd_sweep,
    "renewal": cmd_renewal,
    "garbage": cmd_garbage,
    "modular": cmd_modular,
}


def main(argv: list[str] | None = None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        cfg = load_config(args.config)
        # buffer so a failing command leaves no half-written file behind
        buf = io.StringIO()
        COMMANDS[args.command](args, cfg, buf)
        if args.command != "garbage":
            with _sink(args.out) as fh:
                fh.write(buf.getvalue())
    except RegimeError as exc:
        print(f"regime error: {exc}", file=sys.stderr)
        return 3
    except CompsumError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2
    return 0


if __name__ == "__main__":
    sys.exit(main())
