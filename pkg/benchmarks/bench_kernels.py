"""Compare the compiled and pure-Python permanent kernels.

Usage: python benchmarks/bench_kernels.py [--sizes 8 10 12 14 15] [--repeat 3]
"""
import argparse
import time

import numpy as np

from qoptsim.kernels import available_backends


def best_time(fn, repeat):
    best = float("inf")
    for _ in range(repeat):
        t0 = time.perf_counter()
        fn()
        best = min(best, time.perf_counter() - t0)
    return best


def main():
    parser = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    parser.add_argument("--sizes", type=int, nargs="+", default=[8, 10, 12, 14, 15])
    parser.add_argument("--repeat", type=int, default=3)
    parser.add_argument("--seed", type=int, default=1)
    args = parser.parse_args()

    rng = np.random.default_rng(args.seed)
    backends = available_backends()
    names = sorted(backends)
    print(f"backends: {', '.join(names)}")
    print(f"{'kernel':<16}{'n':>4}" + "".join(f"{n + ' [ms]':>16}" for n in names) + f"{'speedup':>10}")

    for n in args.sizes:
        a = rng.normal(size=(n, n)) + 1j * rng.normal(size=(n, n))
        times = {k: best_time(lambda m=backends[k]: m.permanent(a), args.repeat) for k in names}
        ratio = times["python"] / times["cython"] if "cython" in times else float("nan")
        print(f"{'permanent':<16}{n:>4}" + "".join(f"{1e3 * times[k]:>16.3f}" for k in names) + f"{ratio:>10.1f}")

    # many small permanents: the pattern of a full output distribution
    d, n_ph = 8, 4
    u = np.linalg.qr(rng.normal(size=(d, d)) + 1j * rng.normal(size=(d, d)))[0]
    cols = np.array([0, 1, 2, 3], dtype=np.int64)
    outs = []
    for _ in range(2000):
        occ = np.zeros(d, dtype=np.int64)
        np.add.at(occ, rng.integers(0, d, size=n_ph), 1)
        outs.append(occ)
    outs = np.asarray(outs)
    times = {k: best_time(lambda m=backends[k]: m.ket_permanents(u, cols, outs), args.repeat) for k in names}
    ratio = times["python"] / times["cython"] if "cython" in times else float("nan")
    print(f"{'ket_permanents':<16}{n_ph:>4}" + "".join(f"{1e3 * times[k]:>16.3f}" for k in names)
          + f"{ratio:>10.1f}")


if __name__ == "__main__":
    main()
