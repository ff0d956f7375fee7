"""Time the compiled and pure-numpy assembly kernels side by side.

    python3 benchmarks/bench_core.py [--N 256,512,1024] [--repeat 3]
"""
import argparse
import time

import numpy as np

from eringen_lab import _backend
from eringen_lab.experiments import _cell_points, standard_fields, _korn_features


def best_of(fn, repeat):
    times = []
    for _ in range(repeat):
        t0 = time.perf_counter()
        fn()
        times.append(time.perf_counter() - t0)
    return min(times)


def cases(N):
    nodes = np.arange(N + 1) / N
    z = np.linspace(-2.0, 3.0, 16 * N)
    pts, w, cid = _cell_points(0.0, 0.0, 1.0, max(2, N // 64), 6)
    strain, _ = _korn_features(standard_fields()[0], pts)
    return {
        "p1 linear": lambda core: core.p1_nonlocal(nodes, 0, 0.0, 1.0),
        "p1 cubic": lambda core: core.p1_nonlocal(nodes, 1, 0.0, 1.0),
        "p1 riesz": lambda core: core.p1_nonlocal(nodes, 2, 2 / 3, 1.0),
        "strain matrix": lambda core: core.p1_strain_matrix(nodes, z, 1 / 3, 1.0),
        f"pair sum ({len(pts)} pts)": lambda core: core.riesz_pair_sum(pts, w, strain, cid, pts, w, strain, cid, -4 / 3),
    }


def main():
    parser = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    parser.add_argument("--N", default="256,512,1024", help="mesh sizes")
    parser.add_argument("--repeat", type=int, default=3, help="timing repetitions (best is kept)")
    args = parser.parse_args()
    found = _backend.backends()
    names = sorted(found)
    print(f"{'case':28s} {'N':>5s} " + " ".join(f"{n:>10s}" for n in names) + ("   speedup" if len(names) > 1 else ""))
    for N in (int(v) for v in args.N.split(",")):
        for label, fn in cases(N).items():
            t = {n: best_of(lambda: fn(found[n]), args.repeat) for n in names}
            row = f"{label:28s} {N:5d} " + " ".join(f"{t[n]:9.4f}s" for n in names)
            if "cython" in t:
                row += f"   {t['python'] / t['cython']:6.1f}x"
            print(row)


if __name__ == "__main__":
    main()
