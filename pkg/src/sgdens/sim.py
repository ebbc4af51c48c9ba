"""Fixed-step RK4 integration of the interconnection, trajectory
classification, initial-condition sweeps, and the empirical contraction
check from a basin into its core region.

Sweeps over the built-in example dispatch to the compiled kernels (or their
numpy twins); arbitrary models fall back to a plain Python loop.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from . import _kernels
from ._jsonio import SCHEMA_VERSION
from .iss_model import SystemModel, basin_region, core_region
from .scalar_fn import SgcAnalysis

DEFAULT_DT = 1e-3
DEFAULT_T_END = 50.0
DEFAULT_CONV_TOL = 1e-3
DEFAULT_WINDOW = 0.1
DEFAULT_ESCAPE_BOUND = 1e6

SWEEP_NOTE = ("grid estimator: fractions are over sampled initial conditions "
              "and cannot certify properties of measure-zero sets")


@dataclass(frozen=True)
class Classification:
    """Tagged trajectory outcome.

    kind is one of ``converged_to_equilibrium`` (value = equilibrium index),
    ``entered_ball`` (value = radius), ``escaped`` (value = escape bound) or
    ``undecided`` (value None).
    """

    kind: str
    value: float = None

    def short(self) -> str:
        if self.kind == "converged_to_equilibrium":
            return f"equilibrium_{int(self.value)}"
        if self.kind == "entered_ball":
            return "ball"
        return self.kind

    def to_dict(self) -> dict:
        return {"kind": self.kind, "value": self.value}


@dataclass
class Trajectory:
    """Fixed-step trajectory.  times has constant step dt; states is the
    matching (len(times), 2) array."""

    times: np.ndarray
    states: np.ndarray
    u_bounds: tuple
    classification: Classification
    error_estimate: float = math.nan
    truncated: bool = False

    @property
    def dt(self) -> float:
        return float(self.times[1] - self.times[0]) if self.times.size > 1 else 0.0

    @property
    def final_state(self):
        return self.states[-1]


def _rk4_python(model: SystemModel, x0, u_bounds, dt: float, nsteps: int,
                escape_bound: float):
    u1, u2 = u_bounds
    states = np.empty((nsteps + 1, 2))
    states[0] = x0
    x1, x2 = float(x0[0]), float(x0[1])
    f1, f2 = model.f1, model.f2

    def deriv(a, b):
        return float(f1(a, b, u1)), float(f2(a, b, u2))

    for s in range(nsteps):
        k1a, k1b = deriv(x1, x2)
        k2a, k2b = deriv(x1 + 0.5 * dt * k1a, x2 + 0.5 * dt * k1b)
        k3a, k3b = deriv(x1 + 0.5 * dt * k2a, x2 + 0.5 * dt * k2b)
        k4a, k4b = deriv(x1 + dt * k3a, x2 + dt * k3b)
        x1 = x1 + dt * (k1a + 2 * k2a + 2 * k3a + k4a) / 6.0
        x2 = x2 + dt * (k1b + 2 * k2b + 2 * k3b + k4b) / 6.0
        nrm = math.hypot(x1, x2)
        if not (nrm <= escape_bound):
            return states[:s + 1], s, True
        states[s + 1] = (x1, x2)
    return states, nsteps, False


def integrate(model: SystemModel, x0, t_end: float = DEFAULT_T_END,
              dt: float = DEFAULT_DT, u_bounds=(0.0, 0.0),
              escape_bound: float = DEFAULT_ESCAPE_BOUND,
              error_estimate: bool = True) -> Trajectory:
    """Classical fixed-step RK4 from x0.  Deterministic given its inputs.

    A non-finite or escaping state truncates the trajectory and classifies it
    escaped.  The recorded error estimate is the endpoint difference against
    a half-step re-integration (nan when escaped or disabled).
    """
    if dt <= 0 or t_end <= 0:
        raise ValueError("dt and t_end must be positive")
    nsteps = max(1, int(round(t_end / dt)))
    x0 = np.asarray(x0, dtype=float)

    def run(step: float, count: int):
        if model.kernel_spec is not None:
            n, a, c1, w1, c2, w2 = model.kernel_spec
            states, n_done, esc = _kernels.run_path(
                float(x0[0]), float(x0[1]), n, a, c1, w1, c2, w2,
                step, count, escape_bound)
            return states[:n_done + 1], int(n_done), bool(esc)
        return _rk4_python(model, x0, u_bounds, step, count, escape_bound)

    states, n_done, escaped = run(dt, nsteps)
    times = np.arange(n_done + 1) * dt
    cls = (Classification("escaped", escape_bound) if escaped
           else Classification("undecided"))
    err = math.nan
    if error_estimate and not escaped:
        fine, _, fine_esc = run(dt / 2.0, 2 * nsteps)
        if not fine_esc:
            err = float(np.hypot(*(states[-1] - fine[-1])))
    return Trajectory(times=times, states=states,
                      u_bounds=(float(u_bounds[0]), float(u_bounds[1])),
                      classification=cls, error_estimate=err,
                      truncated=escaped)


def classify(traj: Trajectory, model: SystemModel, equilibria,
             conv_tol: float = DEFAULT_CONV_TOL,
             window: float = DEFAULT_WINDOW,
             escape_bound: float = DEFAULT_ESCAPE_BOUND) -> Classification:
    """Classify the final window (last ``window`` fraction of the times).

    Priority: escaped (non-finite or beyond escape_bound), then
    converged_to_equilibrium(j) when the whole window stays within conv_tol
    of equilibria[j], then entered_ball(max window norm).  The result is also
    stored on the trajectory.
    """
    if traj.truncated or traj.classification.kind == "escaped":
        cls = Classification("escaped", escape_bound)
        traj.classification = cls
        return cls
    m = traj.states.shape[0]
    start = int(math.floor((1.0 - window) * (m - 1)))
    win = traj.states[start:]
    norms = np.hypot(win[:, 0], win[:, 1])
    if not np.all(np.isfinite(norms)) or norms.max() > escape_bound:
        cls = Classification("escaped", escape_bound)
    else:
        cls = None
        eqs = np.asarray(equilibria, dtype=float).reshape(-1, 2) \
            if equilibria is not None and len(equilibria) else np.empty((0, 2))
        if eqs.shape[0]:
            dists = np.array([
                float(np.hypot(win[:, 0] - e[0], win[:, 1] - e[1]).max())
                for e in eqs])
            j = int(np.argmin(dists))
            if dists[j] <= conv_tol:
                cls = Classification("converged_to_equilibrium", j)
        if cls is None:
            cls = Classification("entered_ball", float(norms.max()))
    traj.classification = cls
    return cls


@dataclass
class SweepReport:
    """Classification of a grid of initial conditions."""

    lo: tuple
    hi: tuple
    grid_steps: tuple
    t_end: float
    dt: float
    u_bounds: tuple
    conv_tol: float
    window: float
    escape_bound: float
    x0_points: np.ndarray
    classifications: list
    final_norms: np.ndarray
    nonconverging_fraction: float
    estimated_radius: float
    counts: dict = field(default_factory=dict)

    def to_dict(self) -> dict:
        return {
            "schema_version": SCHEMA_VERSION,
            "note": SWEEP_NOTE,
            "lo": list(self.lo),
            "hi": list(self.hi),
            "grid_steps": list(self.grid_steps),
            "t_end": self.t_end,
            "dt": self.dt,
            "u_bounds": list(self.u_bounds),
            "conv_tol": self.conv_tol,
            "window": self.window,
            "escape_bound": self.escape_bound,
            "counts": self.counts,
            "nonconverging_fraction": self.nonconverging_fraction,
            "estimated_radius": self.estimated_radius,
            "cells": [
                {"x1_0": float(p[0]), "x2_0": float(p[1]),
                 "class": c.short(), "final_norm": float(r)}
                for p, c, r in zip(self.x0_points, self.classifications,
                                   self.final_norms)
            ],
        }


def _unpack_box(box):
    if isinstance(box, dict):
        lo = tuple(float(v) for v in box["lo"])
        hi = tuple(float(v) for v in box["hi"])
    else:
        lo, hi = box
        lo = tuple(float(v) for v in lo)
        hi = tuple(float(v) for v in hi)
    return lo, hi


def sweep(model: SystemModel, box, grid_steps, t_end: float = DEFAULT_T_END,
          dt: float = DEFAULT_DT, u_bounds=(0.0, 0.0), equilibria=None,
          conv_tol: float = DEFAULT_CONV_TOL, window: float = DEFAULT_WINDOW,
          escape_bound: float = DEFAULT_ESCAPE_BOUND,
          early_stop: bool = True) -> SweepReport:
    """Integrate every grid point of the box and aggregate classifications.

    nonconverging_fraction counts escaped and undecided cells;
    estimated_radius is the largest final-window sup-norm among the cells
    that stayed bounded.
    """
    lo, hi = _unpack_box(box)
    s1, s2 = int(grid_steps[0]), int(grid_steps[1])
    ax1 = np.linspace(lo[0], hi[0], s1)
    ax2 = np.linspace(lo[1], hi[1], s2)
    X1, X2 = np.meshgrid(ax1, ax2, indexing="ij")
    x10 = X1.ravel()
    x20 = X2.ravel()
    pts = np.column_stack([x10, x20])
    eqs = (np.asarray(equilibria, dtype=float).reshape(-1, 2)
           if equilibria is not None and len(equilibria) else np.empty((0, 2)))
    nsteps = max(1, int(round(t_end / dt)))
    win_start = int(math.floor((1.0 - window) * nsteps))
    classifications = []
    final_norms = np.empty(pts.shape[0])
    if model.kernel_spec is not None:
        n, a, c1, w1, c2, w2 = model.kernel_spec
        stats = _kernels.run_sweep_stats(
            x10, x20, n, a, c1, w1, c2, w2, dt, nsteps, win_start, eqs,
            conv_tol, escape_bound, early_stop)
        for i in range(pts.shape[0]):
            if stats[i, 3] > 0.5:
                classifications.append(Classification("escaped", escape_bound))
                final_norms[i] = math.nan
                continue
            wnorm = float(stats[i, 2])
            final_norms[i] = wnorm
            cls = None
            if eqs.shape[0]:
                dists = stats[i, 5:5 + eqs.shape[0]]
                j = int(np.argmin(dists))
                if float(dists[j]) <= conv_tol:
                    cls = Classification("converged_to_equilibrium", j)
            if cls is None:
                cls = (Classification("entered_ball", wnorm)
                       if math.isfinite(wnorm)
                       else Classification("undecided"))
            classifications.append(cls)
    else:
        for i, p in enumerate(pts):
            traj = integrate(model, p, t_end, dt, u_bounds=u_bounds,
                             escape_bound=escape_bound, error_estimate=False)
            cls = classify(traj, model, eqs, conv_tol, window, escape_bound)
            classifications.append(cls)
            if cls.kind == "escaped":
                final_norms[i] = math.nan
            else:
                m = traj.states.shape[0]
                start = int(math.floor((1.0 - window) * (m - 1)))
                w = traj.states[start:]
                final_norms[i] = float(np.hypot(w[:, 0], w[:, 1]).max())
    counts = {}
    for c in classifications:
        counts[c.short()] = counts.get(c.short(), 0) + 1
    n_bad = sum(1 for c in classifications
                if c.kind in ("escaped", "undecided"))
    bounded = [r for c, r in zip(classifications, final_norms)
               if c.kind not in ("escaped", "undecided")]
    return SweepReport(
        lo=lo, hi=hi, grid_steps=(s1, s2), t_end=float(t_end), dt=float(dt),
        u_bounds=(float(u_bounds[0]), float(u_bounds[1])),
        conv_tol=float(conv_tol), window=float(window),
        escape_bound=float(escape_bound), x0_points=pts,
        classifications=classifications, final_norms=final_norms,
        nonconverging_fraction=n_bad / pts.shape[0],
        estimated_radius=float(max(bounded)) if bounded else math.nan,
        counts=counts)


def verify_region_contraction(model: SystemModel, analysis: SgcAnalysis,
                              k: int, sample_count: int = 100,
                              t_end: float = DEFAULT_T_END,
                              dt: float = DEFAULT_DT, u_bounds=(0.0, 0.0),
                              radius: float = 0.05, window: float = DEFAULT_WINDOW,
                              escape_bound: float = DEFAULT_ESCAPE_BOUND,
                              seed: int = 0) -> dict:
    """Sample the basin of interval k outside its core, integrate, and report
    the fraction of trajectories whose final window settles inside the core
    caps inflated by ``radius``.  Refuses an unbounded basin."""
    basin = basin_region(analysis, model, k)
    if basin.unbounded:
        raise ValueError(
            f"basin for interval {k} is unbounded (right-open last interval); "
            "contraction sampling needs a bounded basin")
    core = core_region(analysis, model, k)
    rng = np.random.default_rng(seed)
    samples = []
    attempts = 0
    while len(samples) < sample_count and attempts < 1000 * sample_count:
        attempts += 1
        x1 = rng.uniform(-basin.v1_cap, basin.v1_cap)
        x2 = rng.uniform(-basin.v2_cap, basin.v2_cap)
        if (float(model.V1(x1)) <= core.v1_cap
                and float(model.V2(x2)) <= core.v2_cap):
            continue
        samples.append((x1, x2))
    if not samples:
        raise ValueError(
            f"could not sample the basin outside the core for interval {k}")
    n_ok = 0
    worst = None
    for x0 in samples:
        traj = integrate(model, x0, t_end, dt, u_bounds=u_bounds,
                         escape_bound=escape_bound, error_estimate=False)
        if traj.truncated:
            excess = math.inf
        else:
            m = traj.states.shape[0]
            start = int(math.floor((1.0 - window) * (m - 1)))
            win = traj.states[start:]
            v1 = np.array([float(model.V1(x)) for x in win[:, 0]])
            v2 = np.array([float(model.V2(x)) for x in win[:, 1]])
            excess = float(np.maximum(v1 - core.v1_cap, v2 - core.v2_cap).max())
        if excess <= radius:
            n_ok += 1
        if worst is None or excess > worst["excess"]:
            worst = {"x0": [float(x0[0]), float(x0[1])], "excess": excess}
    return {
        "schema_version": SCHEMA_VERSION,
        "k": k,
        "sample_count": len(samples),
        "radius": radius,
        "fraction_converged": n_ok / len(samples),
        "worst": worst,
        "core": core.to_dict(),
        "basin": basin.to_dict(),
    }


def _fmt(x: float) -> str:
    return format(float(x), ".17g")


def write_trajectory_csv(traj: Trajectory, path) -> None:
    lines = ["t,x1,x2"]
    for t, (x1, x2) in zip(traj.times, traj.states):
        lines.append(f"{_fmt(t)},{_fmt(x1)},{_fmt(x2)}")
    with open(path, "w") as fh:
        fh.write("\n".join(lines) + "\n")


def write_sweep_csv(report: SweepReport, path) -> None:
    lines = ["x1_0,x2_0,class,final_norm"]
    for p, c, r in zip(report.x0_points, report.classifications,
                       report.final_norms):
        lines.append(f"{_fmt(p[0])},{_fmt(p[1])},{c.short()},{_fmt(r)}")
    with open(path, "w") as fh:
        fh.write("\n".join(lines) + "\n")
