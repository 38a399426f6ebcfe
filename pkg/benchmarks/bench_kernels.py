"""Compare the compiled and numpy kernel backends.

    python benchmarks/bench_kernels.py [--n 256] [--repeat 20]

Times trigonometric interpolation at off-grid points, lift inversion, and a
full Christoffel evaluation at a non-identity base point under each backend.
"""
import argparse
import timeit

import numpy as np

from hs2 import _backend
from hs2.christoffel import EquationKind, christoffel_at
from hs2.field import PeriodicField, grid
from hs2.group import CircleDiffeo, GroupElement, TangentPair, diffeo_invert


def workloads(n):
    x = grid(n)
    v = PeriodicField(0.6 * np.sin(2 * np.pi * x) / (2 * np.pi) + 0.02 * np.cos(6 * np.pi * x))
    phi = CircleDiffeo(v)
    f = PeriodicField(np.cos(2 * np.pi * x) + 0.3 * np.sin(10 * np.pi * x))
    pts = phi.values()
    base = GroupElement(phi, f)
    t = TangentPair(f, f * 0.5)
    kind = EquationKind.TWO_MU_HS
    return {
        "trig_eval": lambda: f.evaluate(pts),
        "invert": lambda: diffeo_invert(phi),
        "christoffel_at": lambda: christoffel_at(kind, base, t, t),
    }


def main():
    parser = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    parser.add_argument("--n", type=int, default=256)
    parser.add_argument("--repeat", type=int, default=20)
    args = parser.parse_args()

    names = []
    for name in _backend.BACKENDS:
        try:
            _backend.load(name)
            names.append(name)
        except ImportError:
            print(f"{name}: not available")
    results = {}
    for name in names:
        _backend.use(name)
        for label, fn in workloads(args.n).items():
            fn()  # warm caches
            best = min(timeit.repeat(fn, number=1, repeat=args.repeat))
            results[(label, name)] = best
    print(f"N = {args.n}, best of {args.repeat}")
    print(f"{'workload':<16}" + "".join(f"{n:>12}" for n in names) + "     speedup")
    for label in workloads(args.n):
        row = [results[(label, n)] for n in names]
        speed = row[-1] / row[0] if len(row) == 2 else float("nan")
        print(f"{label:<16}" + "".join(f"{t * 1e3:>10.3f}ms" for t in row) + f"{speed:>11.1f}x")


if __name__ == "__main__":
    main()
