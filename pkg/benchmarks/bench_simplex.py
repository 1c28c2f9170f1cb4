"""Compare the numba and numpy simplex kernels on a full DEA evaluation.

Usage: python3 benchmarks/bench_simplex.py [--dmus 50] [--repeat 5]
"""
import argparse
import timeit
import warnings

import numpy as np

from deagrey import _kernels
from deagrey.dea import DeaInstance, DeaOptions, Rts, evaluate_all


def make_instance(n, w=3, q=2, seed=0):
    rng = np.random.default_rng(seed)
    return DeaInstance([f"d{j}" for j in range(n)],
                       rng.uniform(1, 10, (w, n)), rng.uniform(1, 10, (q, n)))


def main():
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--dmus", type=int, default=50)
    ap.add_argument("--repeat", type=int, default=5)
    args = ap.parse_args()

    inst = make_instance(args.dmus)
    opts = DeaOptions(returns_to_scale=Rts.VRS)
    warnings.simplefilter("ignore")
    results = {}
    for name, kernel in (("numba", _kernels.simplex_loop), ("numpy", _kernels.simplex_numpy)):
        _kernels.run_simplex = kernel
        evaluate_all(inst, opts)  # warm-up, includes JIT compilation
        best = min(timeit.repeat(lambda: evaluate_all(inst, opts), number=1,
                                 repeat=args.repeat))
        results[name] = (best, [s.score for s in evaluate_all(inst, opts)])
        print(f"{name:6s} {best * 1e3:9.2f} ms for {args.dmus} DMUs (VRS, two-stage)")

    same = results["numba"][1] == results["numpy"][1]
    print(f"speedup {results['numpy'][0] / results['numba'][0]:.2f}x, "
          f"scores identical: {same}")


if __name__ == "__main__":
    main()
