"""Time the numba and numpy versions of every hot kernel on the same inputs.

    python benchmarks/bench_kernels.py [--repeat 5]

Prints one line per kernel: best-of-``repeat`` wall time for each backend,
the speedup, and the max abs difference between the two outputs.
"""
import argparse
import time

import numpy as np

from layerntk import _kernels
from layerntk.specfun import gegenbauer_rule


def cases():
    rng = np.random.default_rng(0)
    x = rng.standard_normal(20_000)
    u = rng.uniform(-1, 1, 20_000)
    rule = gegenbauer_rule(10, 200)
    k = np.arange(1, 200, dtype=np.float64)
    off = np.sqrt(k * (k + 7) / ((2 * k + 8) * (2 * k + 6)))
    coeffs = rng.uniform(0, 1, 200) / np.arange(1, 201) ** 2
    return {
        "hermite_table": (60, x),
        "gegenbauer_table": (10, 60, u),
        "beta_walk": (10, 2000, 20),
        "christoffel_weights": (np.asarray(rule.nodes), off, 1.0),
        "horner": (coeffs, u),
    }


def best_time(fn, args, repeat):
    fn(*args)  # warm-up, includes compilation for numba
    best = np.inf
    for _ in range(repeat):
        t = time.perf_counter()
        out = fn(*args)
        best = min(best, time.perf_counter() - t)
    return best, out


def main(argv=None):
    p = argparse.ArgumentParser()
    p.add_argument("--repeat", type=int, default=5)
    args = p.parse_args(argv)
    print(f"{'kernel':<22}{'numba [ms]':>12}{'numpy [ms]':>12}{'speedup':>9}{'max|diff|':>12}")
    for name, inputs in cases().items():
        nb, npy = _kernels.PAIRS[name]
        t_nb, out_nb = best_time(nb, inputs, args.repeat)
        t_np, out_np = best_time(npy, inputs, args.repeat)
        diff = float(np.max(np.abs(np.asarray(out_nb) - np.asarray(out_np))))
        print(f"{name:<22}{1e3 * t_nb:>12.3f}{1e3 * t_np:>12.3f}{t_np / t_nb:>9.1f}{diff:>12.1e}")


if __name__ == "__main__":
    main()
