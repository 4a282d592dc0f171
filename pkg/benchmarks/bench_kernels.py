"""Wall-clock comparison of the compiled and pure-Python kernels.

    python benchmarks/bench_kernels.py [--t-final 5] [--repeat 3] [names...]
"""
import argparse
import time

import numpy as np

from formsync.kernels import load_backend
from formsync.sim import integrate, load_scenario

DEFAULT = ["two_sc_attitude", "four_sc_hetero", "two_sc_j2_spiral"]


def best_of(cfg, backend, repeat):
    times = []
    for _ in range(repeat):
        t0 = time.perf_counter()
        log = integrate(cfg, backend=backend)
        times.append(time.perf_counter() - t0)
    return min(times), log


def main(argv=None):
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("names", nargs="*", default=DEFAULT)
    ap.add_argument("--t-final", type=float, default=5.0)
    ap.add_argument("--repeat", type=int, default=3)
    args = ap.parse_args(argv)
    try:
        load_backend("compiled")
    except ImportError:
        raise SystemExit("compiled kernels are not built; run `pip install -e . --no-build-isolation`")

    print(f"{'scenario':20s} {'steps':>8s} {'compiled s':>11s} {'python s':>10s} {'speedup':>8s} {'max diff':>9s}")
    for name in args.names:
        cfg = load_scenario(name).with_integrator(t_final=args.t_final)
        steps = int(round(cfg.integrator.t_final / cfg.integrator.dt))
        tc, lc = best_of(cfg, "compiled", args.repeat)
        tp, lp = best_of(cfg, "python", 1)
        a = lc.q if lc.q is not None else lc.r
        b = lp.q if lp.q is not None else lp.r
        diff = float(np.abs(a - b).max())
        print(f"{name:20s} {steps:8d} {tc:11.4f} {tp:10.3f} {tp / tc:8.1f} {diff:9.1e}")


if __name__ == "__main__":
    main()
