#!/usr/bin/env python3
"""Benchmark the compiled hot kernels against the NumPy fallback.

Usage: python benchmarks/bench_kernels.py [--cells N] [--dirs M] [--repeats K]

Times the two kernels that dominate the package's runtime (the one-sided
moment sums driving every energy evaluation, and the wedge-body radial
minima driving sampled-body volumes) and reports the speedup, plus one
end-to-end energy evaluation per backend.
"""

import argparse
import os
import time

import numpy as np


def time_call(fn, repeats):
    best = float("inf")
    for _ in range(repeats):
        t0 = time.perf_counter()
        fn()
        best = min(best, time.perf_counter() - t0)
    return best


def main():
    ap = argparse.ArgumentParser()
    ap.add_argument("--cells", type=int, default=256 * 256)
    ap.add_argument("--dirs", type=int, default=512)
    ap.add_argument("--repeats", type=int, default=3)
    args = ap.parse_args()

    from affine_energy import kernels

    impls = kernels.backends()
    if "compiled" not in impls:
        print("compiled extension not built; nothing to compare")
        return

    rng = np.random.default_rng(0)
    th = 2 * np.pi * np.arange(args.dirs) / args.dirs
    dirs = np.column_stack([np.cos(th), np.sin(th)])
    pts = np.ascontiguousarray(rng.standard_normal((args.cells, 2)))
    wts = rng.uniform(0.5, 1.5, args.cells)

    print(f"one_sided_power_sums: {args.dirs} directions x {args.cells} points")
    for p in (1.0, 2.0, 1.7):
        row = {}
        for name, impl in impls.items():
            row[name] = time_call(
                lambda impl=impl: impl.one_sided_power_sums(dirs, pts, p, wts),
                args.repeats,
            )
        speedup = row["numpy"] / row["compiled"]
        print(f"  p={p:<4} compiled {row['compiled']*1e3:8.1f} ms | "
              f"numpy {row['numpy']*1e3:8.1f} ms | speedup {speedup:4.1f}x")

    h = 1.0 + 0.3 * np.cos(4 * th)
    print(f"radial_from_support: {args.dirs} x {args.dirs}")
    row = {}
    for name, impl in impls.items():
        row[name] = time_call(
            lambda impl=impl: impl.radial_from_support(dirs, dirs, h), args.repeats
        )
    print(f"  compiled {row['compiled']*1e3:8.2f} ms | "
          f"numpy {row['numpy']*1e3:8.2f} ms | "
          f"speedup {row['numpy']/row['compiled']:4.1f}x")

    # end-to-end: one full energy evaluation per backend
    import subprocess
    import sys

    code = (
        "import time, numpy as np\n"
        "from affine_energy.spherequad import build_sphere_grid\n"
        "from affine_energy.energy import EnergyContext, affine_energy\n"
        "from affine_energy.specs import catalog_function\n"
        "from affine_energy import kernels\n"
        "g = build_sphere_grid(2, 512, 'uniform-angle')\n"
        "f = catalog_function('gaussian', {'n': 2}, {'extent': 4.0, 'cells': 255})\n"
        "t0 = time.perf_counter()\n"
        "e = affine_energy(EnergyContext(0.3, 1.7, g, f))\n"
        "print(f'  {kernels.backend():8s} energy {e:.6f} in "
        "{time.perf_counter()-t0:.3f} s')\n"
    )
    print("end-to-end energy (255^2 grid, 512 directions, p=1.7):")
    sys.stdout.flush()
    for backend in ("compiled", "numpy"):
        env = dict(os.environ, AFFINE_ENERGY_KERNELS=backend)
        subprocess.run([sys.executable, "-c", code], env=env, check=True)


if __name__ == "__main__":
    main()
