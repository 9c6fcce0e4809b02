"""Time the compiled and numpy kernels on identical inputs.

    python3 benchmarks/bench_kernels.py [--size N] [--repeat R]

Prints the best-of-R wall time per kernel and backend and the speedup.
"""

import argparse
import timeit

import numpy as np

from diskwalk import kernels


def inputs(size, seed=0):
    rng = np.random.default_rng(seed)
    gammas = rng.logistic(size=size)
    coins = (rng.random(size) < 0.5).astype(np.uint8)
    heads = int(coins.sum())
    arcs = rng.uniform(-1.5, 1.5, size=size - heads)
    tau = np.cumsum(gammas)
    vs = rng.uniform(-1.5, 1.5, size=size)
    ck = np.unique(np.geomspace(1000, size - 1, 20).astype(np.int64))
    return {
        "partial_sums": (gammas, 0.0),
        "z_walk_path": (coins, gammas[:heads], arcs, 0.0, 0.1),
        "record_fields": (tau, vs, 30.0),
        "lil_scan": lambda: (tau, vs, 1, 1000, np.full(3, -np.inf), ck),
    }


def main(argv=None):
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--size", type=int, default=1_000_000)
    ap.add_argument("--repeat", type=int, default=5)
    args = ap.parse_args(argv)

    backends = {"python": kernels.get_backend("python")}
    try:
        backends["cython"] = kernels.get_backend("cython")
    except ImportError:
        print("compiled kernels not built; timing the numpy backend only")
    data = inputs(args.size)
    print(f"size={args.size} repeat={args.repeat} active={kernels.BACKEND}")
    print(f"{'kernel':<14}" + "".join(f"{b:>12}" for b in backends) + f"{'speedup':>10}")
    for name, arg in data.items():
        times = {}
        for bname, be in backends.items():
            fn = getattr(be, name)
            make = arg if callable(arg) else (lambda a=arg: a)
            times[bname] = min(timeit.repeat(lambda: fn(*make()), number=1, repeat=args.repeat))
        row = f"{name:<14}" + "".join(f"{times[b] * 1e3:>10.2f}ms" for b in backends)
        if "cython" in times:
            row += f"{times['python'] / times['cython']:>9.1f}x"
        print(row)


if __name__ == "__main__":
    main()
