"""Time the compiled and numpy right-hand-side kernels on the same inputs.

Usage: python benchmarks/bench_rhs.py [--repeat N]
"""

from __future__ import annotations

import argparse
import timeit

import numpy as np

from collapse_ns import _kernels_py, build_profile
from collapse_ns.geometry import BaseGrid, ThinGrid
from collapse_ns.limit_solver import LimitConfig, _params as limit_params, base_geometry
from collapse_ns.thin_solver import SolverConfig, _params as thin_params, grid_geometry
from collapse_ns.thermo import PressureLaw

try:
    from collapse_ns import _kernels as compiled
except ImportError:
    compiled = None


def _thin_inputs(nx, ns):
    profile = build_profile({"base": "circle", "area": "cosine", "mean": 1.5, "amplitude": 0.5})
    grid = ThinGrid(profile, 0.05, nx, ns)
    x, s = np.meshgrid(grid.x, grid.s, indexing="ij")
    rho = 1.0 + 0.1 * np.sin(2 * np.pi * x) * (1 + s * s)
    mx = rho * 0.1 * np.cos(2 * np.pi * x)
    my = rho * 0.01 * s
    cfg = SolverConfig(0.05, 0.05, PressureLaw())
    return (rho, mx, my, grid_geometry(grid), thin_params(cfg))


def _limit_inputs(n):
    profile = build_profile({"base": "circle", "area": "cosine", "mean": 1.5, "amplitude": 0.5})
    grid = BaseGrid(n, True)
    geom = base_geometry(profile, grid)
    w = geom["A"] * (1.0 + 0.1 * np.sin(2 * np.pi * grid.x))
    u = 0.1 * np.sin(2 * np.pi * grid.x)
    return (w, u, geom, limit_params(LimitConfig()))


def _time(func, args, repeat):
    return min(timeit.repeat(lambda: func(*args), number=repeat, repeat=3)) / repeat


def main(argv=None):
    ap = argparse.ArgumentParser()
    ap.add_argument("--repeat", type=int, default=50)
    opts = ap.parse_args(argv)
    cases = [("thin", f"{nx}x{ns}", _thin_inputs(nx, ns), _kernels_py.thin_rhs,
              compiled.thin_rhs if compiled else None) for nx, ns in ((64, 16), (128, 16), (256, 32))]
    cases += [("limit", str(n), _limit_inputs(n), _kernels_py.limit_rhs,
               compiled.limit_rhs if compiled else None) for n in (512, 2048)]
    print(f"{'kernel':<6s} {'grid':>8s} {'numpy [us]':>12s} {'compiled [us]':>14s} {'speedup':>8s} {'max rel diff':>13s}")
    for kind, label, args, ref, fast in cases:
        t_ref = _time(ref, args, opts.repeat)
        if fast is None:
            print(f"{kind:<6s} {label:>8s} {t_ref * 1e6:12.1f} {'n/a':>14s}")
            continue
        t_fast = _time(fast, args, opts.repeat)
        a, b = ref(*args), fast(*args)
        diff = max(float(np.max(np.abs(x - y)) / (np.max(np.abs(x)) + 1e-300)) for x, y in zip(a, b))
        print(f"{kind:<6s} {label:>8s} {t_ref * 1e6:12.1f} {t_fast * 1e6:14.1f} {t_ref / t_fast:8.1f} {diff:13.2e}")


if __name__ == "__main__":
    main()
