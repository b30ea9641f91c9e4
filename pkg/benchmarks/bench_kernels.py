"""Benchmark the numba and numpy backends of the per-pair hot loops.

Usage::

    python3 benchmarks/bench_kernels.py [--points 256] [--repeat 3]

Each kernel is run once per backend to warm up (and to trigger numba
compilation), then timed over ``--repeat`` runs; the best time is reported
together with the maximum difference between the two backends.
"""

import argparse
import time

import numpy as np

from pathlab import PotentialSpec
from pathlab._accel import HAVE_NUMBA, set_backend
from pathlab._kernels import line_integrals, shoot_pairs

POTENTIALS = {
    "harmonic": PotentialSpec.harmonic(1.0),
    "harmonic+lorentzian": PotentialSpec.parse("harmonic(1)+lorentzian_bump(1,1)"),
    "cosine": PotentialSpec.cosine(0.3, 1.0, 0.0),
}


def _pairs(n):
    x = np.linspace(-4.0, 4.0, n)
    X, Y = np.meshgrid(x, x, indexing="ij")
    return X.ravel(), Y.ravel()


def _best(f, repeat):
    best = np.inf
    out = None
    for _ in range(repeat):
        t0 = time.perf_counter()
        out = f()
        best = min(best, time.perf_counter() - t0)
    return best, out


def bench(points, repeat):
    xs, ys = _pairs(points)
    cases = []
    for name, V in POTENTIALS.items():
        terms = V.packed
        cases.append((f"shoot_pairs[{name}]", lambda t=terms: shoot_pairs(xs, ys, 0.1, t)[0]))
        cases.append((f"line_integrals[{name}, order 3]", lambda t=terms: line_integrals(xs, ys, t, 3)))
    backends = ["numpy"] + (["numba"] if HAVE_NUMBA else [])
    print(f"{points}x{points} pairs, best of {repeat}")
    print(f"{'kernel':<46}" + "".join(f"{b:>10}" for b in backends) + f"{'speedup':>10}{'max diff':>12}")
    for label, f in cases:
        times, outs = {}, {}
        for b in backends:
            prev = set_backend(b)
            try:
                f()  # warm-up and compilation
                times[b], outs[b] = _best(f, repeat)
            finally:
                set_backend(prev)
        line = f"{label:<46}" + "".join(f"{times[b]:>9.3f}s" for b in backends)
        if "numba" in times:
            diff = float(np.nanmax(np.abs(outs["numba"] - outs["numpy"])))
            line += f"{times['numpy'] / times['numba']:>9.2f}x{diff:>12.2e}"
        print(line)


def main():
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--points", type=int, default=256, help="points per axis of the pair grid")
    ap.add_argument("--repeat", type=int, default=3)
    args = ap.parse_args()
    bench(args.points, args.repeat)


if __name__ == "__main__":
    main()
