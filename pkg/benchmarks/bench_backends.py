"""Time the compiled and pure-Python kernels on the same workloads.

    python3 benchmarks/bench_backends.py [--paths N] [--repeat R]

Both backends produce identical output for the same seed, so only the time
per path is compared. The Python backend runs on ``--paths / --py-fraction``
paths to keep the run short.
"""

from __future__ import annotations

import argparse
import time

from compsum.basis import Direct, Exponential, Risk, Uniform
from compsum.modular import MarkovModulatedBasis, simulate_modulated
from compsum.montecarlo import SimConfig, available, simulate_garbage, simulate_paths


def workloads():
    risk = Risk(Exponential(2.0), Exponential(1.0), 1.5)
    direct = Direct(Exponential(1.0), Exponential(1.0))
    markov = MarkovModulatedBasis.per_state(
        [[0.7, 0.3], [0.3, 0.7]], [Exponential(1.0), Exponential(2.0)], [Exponential(1.0), Uniform(0.0, 2.0)]
    )
    return {
        "paths (risk, level 10)": lambda n, be: simulate_paths(risk, 10.0, SimConfig(n, seed=1), track_tsup=False, backend=be),
        "garbage (t = 1e4)": lambda n, be: simulate_garbage(direct, 1e4, SimConfig(n, seed=1), backend=be),
        "markov walk (t = 200)": lambda n, be: simulate_modulated(markov, 200.0, SimConfig(n, seed=1), backend=be),
    }


def best_time(fn, n, backend, repeat):
    best = float("inf")
    for _ in range(repeat):
        t0 = time.perf_counter()
        fn(n, backend)
        best = min(best, time.perf_counter() - t0)
    return best


def main(argv=None):
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--paths", type=int, default=100_000)
    ap.add_argument("--py-fraction", type=int, default=50)
    ap.add_argument("--repeat", type=int, default=3)
    args = ap.parse_args(argv)
    backends = available()
    print(f"backends: {', '.join(backends)}")
    print(f"{'workload':<26}{'backend':>8}{'paths':>10}{'us/path':>12}{'speedup':>10}")
    for name, fn in workloads().items():
        py = None
        for be in sorted(backends, key=lambda b: b != "python"):
            n = args.paths if be == "cython" else max(1, args.paths // args.py_fraction)
            us = best_time(fn, n, be, args.repeat) / n * 1e6
            if be == "python":
                py = us
            speed = f"{py / us:.1f}x" if be == "cython" and py else ""
            print(f"{name:<26}{be:>8}{n:>10}{us:>12.2f}{speed:>10}")


if __name__ == "__main__":
    main()
