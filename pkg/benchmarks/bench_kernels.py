"""Compare the compiled and NumPy interference kernels.

Run with ``python benchmarks/bench_kernels.py``.  Prints per-call times for
the field sizes of the reference scenario (about 80 cap HAPs, 9,400 BSs and
12,700 plane-baseline HAPs) and the end-to-end Monte Carlo trial rate with
each backend.
"""

import argparse
import math
import time
import timeit

import numpy as np

from hapnet import _kernels_py, montecarlo
from hapnet.antenna import AntennaPattern
from hapnet.config import NetworkConfig

try:
    from hapnet import _kernels as _compiled
except ImportError:
    _compiled = None


def per_call(fn, repeat=7, number=200):
    return min(timeit.repeat(fn, repeat=repeat, number=number)) / number


def kernel_table():
    rng = np.random.default_rng(0)
    pat = AntennaPattern()
    rows = []
    for label, n in (("cap HAPs", 80), ("BS disk", 9425), ("plane HAPs", 12750)):
        d2 = rng.uniform(4e8, 1.6e11, n)
        cb = rng.uniform(0.05, 1.0, n)
        f1, f2 = rng.exponential(size=n), rng.exponential(size=n)
        rho = np.sqrt(d2)
        calls = {
            "hap_sums omni": lambda impl: impl.hap_sums(d2, cb, f1, f2, 1.0),
            "hap_sums dir": lambda impl: impl.hap_sums(d2, cb, f1, f2, 1.0, True, pat.g0_db,
                                                       pat.theta_3db, 2, pat.gsl_db),
            "bs_sums": lambda impl: impl.bs_sums(rho, f1, f2, 2.0),
        }
        for name, call in calls.items():
            t_py = per_call(lambda: call(_kernels_py))
            t_cy = per_call(lambda: call(_compiled)) if _compiled else math.nan
            rows.append((f"{name} ({label}, n={n})", t_py, t_cy))
    return rows


def trial_rate(impl, n_trials):
    saved = montecarlo.kernels.hap_sums, montecarlo.kernels.bs_sums
    montecarlo.kernels.hap_sums, montecarlo.kernels.bs_sums = impl.hap_sums, impl.bs_sums
    try:
        cfg = NetworkConfig(antenna="directional")
        t0 = time.perf_counter()
        montecarlo.sample_components(cfg, n_trials, seed=1, threads=1)
        return n_trials / (time.perf_counter() - t0)
    finally:
        montecarlo.kernels.hap_sums, montecarlo.kernels.bs_sums = saved


def main():
    ap = argparse.ArgumentParser(description=__doc__.split("\n")[0])
    ap.add_argument("--trials", type=int, default=2000)
    args = ap.parse_args()
    print(f"{'kernel':48s} {'python us':>10s} {'cython us':>10s} {'speedup':>8s}")
    for name, t_py, t_cy in kernel_table():
        print(f"{name:48s} {t_py * 1e6:10.2f} {t_cy * 1e6:10.2f} {t_py / t_cy:8.2f}")
    r_py = trial_rate(_kernels_py, args.trials)
    line = f"\nMonte Carlo trials/s (reference scenario, 1 thread): python {r_py:,.0f}"
    if _compiled:
        line += f", cython {trial_rate(_compiled, args.trials):,.0f}"
    print(line)


if __name__ == "__main__":
    main()
