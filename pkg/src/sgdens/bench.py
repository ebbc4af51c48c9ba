"""Benchmark the compiled sweep kernel against the pure-numpy fallback.

Run as ``python -m sgdens.bench [--grid N] [--t-end T] [--dt DT]``.
The numpy path is always timed; the compiled path is timed when numba is
available and not disabled via SGDENS_NO_NUMBA.
"""
from __future__ import annotations

import argparse
import time

import numpy as np

from . import _kernels
from .example_system import ExampleParams, equilibrium_points


def _grid(params: ExampleParams, n_side: int):
    ax = np.linspace(0.0, 60.0, n_side)
    X1, X2 = np.meshgrid(ax, ax, indexing="ij")
    return X1.ravel(), X2.ravel()


def run(n_side: int = 30, t_end: float = 50.0, dt: float = 5e-3,
        repeats: int = 3) -> dict:
    params = ExampleParams(n=2)
    x10, x20 = _grid(params, n_side)
    eqs = equilibrium_points(params)
    nsteps = int(round(t_end / dt))
    win_start = int(0.9 * nsteps)
    args = (x10, x20, params.n_eff, params.a, 25.0, 0.0, 25.0, 0.0, dt,
            nsteps, win_start, eqs, 0.05, 1e6, True)

    def best_of(fn):
        times = []
        for _ in range(repeats):
            t0 = time.perf_counter()
            out = fn(*args)
            times.append(time.perf_counter() - t0)
        return min(times), out

    results = {"cells": int(x10.size), "steps": nsteps}
    t_np, out_np = best_of(_kernels.rk4_sweep_stats_numpy)
    results["numpy_seconds"] = t_np
    if _kernels.HAVE_NUMBA:
        _kernels.rk4_sweep_stats(*args)  # compile outside the timer
        t_nb, out_nb = best_of(_kernels.rk4_sweep_stats)
        results["numba_seconds"] = t_nb
        results["speedup"] = t_np / t_nb if t_nb > 0 else float("inf")
        agree = np.array_equal(out_np[:, 3] > 0.5, out_nb[:, 3] > 0.5)
        results["escape_flags_agree"] = bool(agree)
    return results


def main(argv=None) -> int:
    ap = argparse.ArgumentParser(description=__doc__)
    ap.add_argument("--grid", type=int, default=30, help="grid side length")
    ap.add_argument("--t-end", dest="t_end", type=float, default=50.0)
    ap.add_argument("--dt", type=float, default=5e-3)
    ap.add_argument("--repeats", type=int, default=3)
    ns = ap.parse_args(argv)
    res = run(ns.grid, ns.t_end, ns.dt, ns.repeats)
    print(f"sweep benchmark: {res['cells']} cells x {res['steps']} steps")
    print(f"  numpy fallback: {res['numpy_seconds']:.3f} s")
    if "numba_seconds" in res:
        print(f"  compiled:       {res['numba_seconds']:.3f} s "
              f"(speedup {res['speedup']:.1f}x, escape flags agree: "
              f"{res['escape_flags_agree']})")
    else:
        print("  compiled path unavailable (numba missing or disabled)")
    return 0


if __name__ == "__main__":
    raise SystemExit(main())
