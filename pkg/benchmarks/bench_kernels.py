"""Time the numba kernels against the pure-numpy fallback.

    python3 benchmarks/bench_kernels.py [--bits 200000] [--repeat 3]

Each row reports the best of ``--repeat`` runs after one warm-up call (which
also triggers numba compilation), the speed-up, and whether both backends
produced identical wake traces and activity counts.
"""

import argparse
import time

import numpy as np

from wurkit import kernels
from wurkit._accel import HAS_NUMBA


def best_time(fn, repeat):
    fn()
    times = []
    for _ in range(repeat):
        t0 = time.perf_counter()
        fn()
        times.append(time.perf_counter() - t0)
    return min(times)


def same(a, b):
    return all(np.array_equal(x, y) for x, y in zip(a, b))


def main(argv=None):
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--bits", type=int, default=200_000)
    ap.add_argument("--trials", type=int, default=100_000)
    ap.add_argument("--repeat", type=int, default=3)
    ap.add_argument("--seed", type=int, default=0)
    args = ap.parse_args(argv)
    if not HAS_NUMBA:
        print("numba unavailable (or WURKIT_NO_NUMBA set); only the numpy path can run")
        return 1

    rng = np.random.default_rng(args.seed)
    stream = rng.integers(0, 2, args.bits).astype(np.uint8)
    cases = []
    for n, m in ((16, 0), (64, 0), (64, 2)):
        addr = rng.integers(0, 2, n).astype(np.uint8)
        cases.append((f"lpsd_run n={n} m={m}", lambda u, a=addr, m=m: kernels.lpsd_run(stream, a, m, 0, u), args.bits))
    addr64 = rng.integers(0, 2, 64).astype(np.uint8)
    cases.append(("legacy_run n=64", lambda u: kernels.legacy_run(stream, addr64, u), args.bits))
    addr16 = rng.integers(0, 2, 16).astype(np.uint8)
    rows = addr16[None, :] ^ (rng.random((args.trials, 16)) < 0.05).astype(np.uint8)
    cases.append(("lpsd_batch n=16 m=1", lambda u: (kernels.lpsd_batch(rows, addr16, 1, 0, u),), args.trials))

    print(f"{'kernel':<24}{'items':>10}{'numba s':>11}{'numpy s':>11}{'speed-up':>10}  agree")
    for name, fn, items in cases:
        t_nb = best_time(lambda: fn(True), args.repeat)
        t_np = best_time(lambda: fn(False), args.repeat)
        agree = same(fn(True), fn(False))
        print(f"{name:<24}{items:>10}{t_nb:>11.4f}{t_np:>11.4f}{t_np / t_nb:>9.1f}x  {'yes' if agree else 'NO'}")
    return 0


if __name__ == "__main__":
    raise SystemExit(main())
