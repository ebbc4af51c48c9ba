"""Divergence of a density-weighted field and grid certification of the
density-propagation implication on gap regions (the shells between a
contraction core and the previous basin, where the small-gain argument is
silent).
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from ._jsonio import SCHEMA_VERSION
from .iss_model import Region, SystemModel, region_contains
from .scalar_fn import ScalarFn, SgcAnalysis

FD_STEP_SCALE = 1e-6
VIOLATION_SAMPLE_CAP = 100
GATE_MODES = ("max_v", "componentwise")
DEFAULT_SHELL_DILATION = 0.05
GATE_GRID_POINTS = 200001


class PositivityError(ValueError):
    """A density evaluated nonpositive where it must be strictly positive."""

    def __init__(self, label, x1, x2, value):
        super().__init__(
            f"density {label!r} must be positive, got {value!r} at "
            f"({x1!r}, {x2!r})")
        self.point = (x1, x2)
        self.value = value


class GateConstructionError(ValueError):
    """The damping-minus-coupling margin was not positive definite, so no
    class-K envelope (and hence no input gate) can be built from it."""


@dataclass(frozen=True)
class DensityFn:
    """Positive density with an optional analytic gradient.

    ``rho(x1, x2)`` maps the full state to a positive real; ``grad_rho`` (if
    given) returns the pair of partials.  Both must accept numpy arrays.
    """

    rho: callable
    grad_rho: callable = None
    label: str = "rho"


def _field(f, x1, x2, u: float):
    out = f(x1, x2, u)
    arr = np.asarray(out, dtype=float)
    if arr.shape != np.shape(x1):
        arr = np.vectorize(lambda a, b: float(f(a, b, u)))(x1, x2)
    return arr


def _check_positive(rho: DensityFn, x1, x2, values) -> None:
    bad = np.asarray(values) <= 0.0
    if np.any(bad):
        flat = np.argmax(bad)
        b1 = float(np.ravel(np.broadcast_to(x1, np.shape(values)))[flat])
        b2 = float(np.ravel(np.broadcast_to(x2, np.shape(values)))[flat])
        raise PositivityError(rho.label, b1, b2, float(np.ravel(values)[flat]))


def divergence(rho: DensityFn, model: SystemModel, x, u_bounds,
               f_partials=None, step_scale: float = FD_STEP_SCALE):
    """div(rho*f)(x) = grad(rho).f + rho*div(f), by the product rule.

    ``x`` is (x1, x2); both coordinates may be arrays of equal shape.
    Analytic ``grad_rho`` / ``f_partials`` are used when available, otherwise
    central finite differences with step ``step_scale*(1+|x_j|)``.
    ``f_partials(x1, x2)`` must return (df1/dx1, df2/dx2).
    """
    x1, x2 = x
    x1a = np.asarray(x1, dtype=float)
    x2a = np.asarray(x2, dtype=float)
    scalar = x1a.ndim == 0 and x2a.ndim == 0
    u1, u2 = (float(u_bounds[0]), float(u_bounds[1]))
    rv = np.asarray(rho.rho(x1a, x2a), dtype=float)
    _check_positive(rho, x1a, x2a, rv)
    f1v = _field(model.f1, x1a, x2a, u1)
    f2v = _field(model.f2, x1a, x2a, u2)
    if rho.grad_rho is not None:
        g1, g2 = rho.grad_rho(x1a, x2a)
    else:
        e1 = step_scale * (1.0 + np.abs(x1a))
        e2 = step_scale * (1.0 + np.abs(x2a))
        g1 = (np.asarray(rho.rho(x1a + e1, x2a), dtype=float)
              - np.asarray(rho.rho(x1a - e1, x2a), dtype=float)) / (2.0 * e1)
        g2 = (np.asarray(rho.rho(x1a, x2a + e2), dtype=float)
              - np.asarray(rho.rho(x1a, x2a - e2), dtype=float)) / (2.0 * e2)
    if f_partials is not None:
        p1, p2 = f_partials(x1a, x2a)
    else:
        e1 = step_scale * (1.0 + np.abs(x1a))
        e2 = step_scale * (1.0 + np.abs(x2a))
        p1 = (_field(model.f1, x1a + e1, x2a, u1)
              - _field(model.f1, x1a - e1, x2a, u1)) / (2.0 * e1)
        p2 = (_field(model.f2, x1a, x2a + e2, u2)
              - _field(model.f2, x1a, x2a - e2, u2)) / (2.0 * e2)
    val = (np.asarray(g1, dtype=float) * f1v + np.asarray(g2, dtype=float) * f2v
           + rv * (np.asarray(p1, dtype=float) + np.asarray(p2, dtype=float)))
    return float(val) if scalar else val


def divergence_direct(rho: DensityFn, model: SystemModel, x, u_bounds,
                      step_scale: float = FD_STEP_SCALE):
    """Independent cross-check of :func:`divergence`: differentiates the
    products (rho*f_j) directly with a fourth-order central stencil."""
    x1, x2 = x
    x1a = np.asarray(x1, dtype=float)
    x2a = np.asarray(x2, dtype=float)
    scalar = x1a.ndim == 0 and x2a.ndim == 0
    u1, u2 = (float(u_bounds[0]), float(u_bounds[1]))
    rv = np.asarray(rho.rho(x1a, x2a), dtype=float)
    _check_positive(rho, x1a, x2a, rv)

    def F1(a):
        return np.asarray(rho.rho(a, x2a), dtype=float) * _field(model.f1, a, x2a, u1)

    def F2(b):
        return np.asarray(rho.rho(x1a, b), dtype=float) * _field(model.f2, x1a, b, u2)

    e1 = step_scale * (1.0 + np.abs(x1a))
    e2 = step_scale * (1.0 + np.abs(x2a))
    d1 = (-F1(x1a + 2 * e1) + 8 * F1(x1a + e1)
          - 8 * F1(x1a - e1) + F1(x1a - 2 * e1)) / (12.0 * e1)
    d2 = (-F2(x2a + 2 * e2) + 8 * F2(x2a + e2)
          - 8 * F2(x2a - e2) + F2(x2a - 2 * e2)) / (12.0 * e2)
    val = d1 + d2
    return float(val) if scalar else val


@dataclass
class DensityCheckReport:
    """Aggregated outcome of a gated divergence check over a region grid."""

    region_spec: dict
    gamma_label: str
    gate_mode: str
    u_bounds: tuple
    q_tol: float
    measure_zero_budget: float
    total_count: int
    gated_count: int
    violation_count: int
    violation_fraction: float
    min_divergence: float
    q_floor: float
    inconclusive: bool
    violations: list = field(default_factory=list)

    @property
    def passed(self) -> bool:
        return (not self.inconclusive
                and self.violation_fraction <= self.measure_zero_budget)

    def to_dict(self) -> dict:
        return {
            "schema_version": SCHEMA_VERSION,
            "region": self.region_spec,
            "gamma_k": self.gamma_label,
            "gate_mode": self.gate_mode,
            "u_bounds": list(self.u_bounds),
            "q_tol": self.q_tol,
            "measure_zero_budget": self.measure_zero_budget,
            "total_count": self.total_count,
            "gated_count": self.gated_count,
            "violation_count": self.violation_count,
            "violation_fraction": self.violation_fraction,
            "min_divergence": self.min_divergence,
            "q_floor": self.q_floor,
            "inconclusive": self.inconclusive,
            "passed": self.passed,
            "violations": self.violations[:VIOLATION_SAMPLE_CAP],
        }


def box_grid(lo, hi, steps):
    """Full product grid over a box; ``steps`` are point counts per axis."""
    ax1 = np.linspace(float(lo[0]), float(hi[0]), int(steps[0]))
    ax2 = np.linspace(float(lo[1]), float(hi[1]), int(steps[1]))
    X1, X2 = np.meshgrid(ax1, ax2, indexing="ij")
    return np.column_stack([X1.ravel(), X2.ravel()])


def _resolve_region(region):
    """Normalize a region spec to an (N, 2) point array plus a JSON spec."""
    if isinstance(region, dict):
        lo = [float(v) for v in region["lo"]]
        hi = [float(v) for v in region["hi"]]
        steps = [int(v) for v in region["steps"]]
        pts = box_grid(lo, hi, steps)
        spec = {"kind": "box", "lo": lo, "hi": hi, "steps": steps}
    elif (isinstance(region, (tuple, list)) and len(region) == 2
          and np.ndim(region[0]) == 1 and np.ndim(region[1]) == 1):
        ax1 = np.asarray(region[0], dtype=float)
        ax2 = np.asarray(region[1], dtype=float)
        X1, X2 = np.meshgrid(ax1, ax2, indexing="ij")
        pts = np.column_stack([X1.ravel(), X2.ravel()])
        spec = {"kind": "axes", "counts": [int(ax1.size), int(ax2.size)]}
    else:
        pts = np.asarray(region, dtype=float).reshape(-1, 2)
        spec = {"kind": "points", "count": int(pts.shape[0])}
    if pts.shape[0] == 0:
        raise ValueError("region grid is empty")
    return pts, spec


def _storage_values(V, xs):
    probe = all(abs(float(V(t)) - abs(t)) <= 1e-12 for t in (-2.0, -0.5, 0.5, 2.0))
    if probe:
        return np.abs(xs)
    return np.array([float(V(x)) for x in xs])


def check_density_propagation(rho: DensityFn, model: SystemModel, region,
                              gamma_k: ScalarFn, u_bounds,
                              q_tol: float = 0.0,
                              gate_mode: str = "max_v",
                              measure_zero_budget: float = 0.0,
                              f_partials=None) -> DensityCheckReport:
    """Check div(rho*f) > q_tol at every grid point that passes the input
    gate, and report the violation fraction against the measure-zero budget.

    Gate modes: ``max_v`` gates on max_i V_i(x_i) >= gamma_k(|u|_2);
    ``componentwise`` gates on V_i(x_i) >= gamma_k(u_i) for both i.  An empty
    gated set makes the report inconclusive rather than passing.
    """
    if gate_mode not in GATE_MODES:
        raise ValueError(f"gate_mode must be one of {GATE_MODES}, got {gate_mode!r}")
    pts, spec = _resolve_region(region)
    u1, u2 = float(u_bounds[0]), float(u_bounds[1])
    v1 = _storage_values(model.V1, pts[:, 0])
    v2 = _storage_values(model.V2, pts[:, 1])
    if gate_mode == "max_v":
        thr = float(gamma_k(math.hypot(u1, u2)))
        gate = np.maximum(v1, v2) >= thr
    else:
        gate = (v1 >= float(gamma_k(u1))) & (v2 >= float(gamma_k(u2)))
    total = int(pts.shape[0])
    gated = int(gate.sum())
    if gated == 0:
        return DensityCheckReport(
            region_spec=spec, gamma_label=gamma_k.label, gate_mode=gate_mode,
            u_bounds=(u1, u2), q_tol=q_tol,
            measure_zero_budget=measure_zero_budget,
            total_count=total, gated_count=0, violation_count=0,
            violation_fraction=0.0, min_divergence=math.nan,
            q_floor=math.nan, inconclusive=True, violations=[])
    x1g = pts[gate, 0]
    x2g = pts[gate, 1]
    div = np.asarray(divergence(rho, model, (x1g, x2g), (u1, u2),
                                f_partials=f_partials), dtype=float)
    bad = div <= q_tol
    n_bad = int(bad.sum())
    viols = [
        {"x1": float(a), "x2": float(b), "divergence": float(d)}
        for a, b, d in zip(x1g[bad][:VIOLATION_SAMPLE_CAP],
                           x2g[bad][:VIOLATION_SAMPLE_CAP],
                           div[bad][:VIOLATION_SAMPLE_CAP])
    ]
    min_div = float(div.min())
    return DensityCheckReport(
        region_spec=spec, gamma_label=gamma_k.label, gate_mode=gate_mode,
        u_bounds=(u1, u2), q_tol=q_tol,
        measure_zero_budget=measure_zero_budget,
        total_count=total, gated_count=gated, violation_count=n_bad,
        violation_fraction=n_bad / gated, min_divergence=min_div,
        q_floor=min_div, inconclusive=False, violations=viols)


def derive_input_gate(delta: float, epsilon: float = 1.0, n: int = 2,
                      grid_points: int = GATE_GRID_POINTS, bound: float = None,
                      return_info: bool = False):
    """Build the input gate for the worked example: a nondecreasing map from
    the input bound |u_i| to the smallest |x_i| at which the damping margin
    m(r) = (25+epsilon)|g(r)| - 25 h(r) certifiably dominates the input
    offset (|u_i|/(a+1))^2 / (1-delta).

    The margin is sampled on a fine grid, verified positive definite, lower-
    bounded by its running minimum from the right (a nondecreasing envelope),
    and the gate returns, via that envelope, the first grid point where the
    envelope reaches the required level.  Grid rounding makes the gate
    conservative (thresholds round up).
    """
    from .example_system import ExampleParams, g, h

    if not (0.0 < delta < 1.0):
        raise ValueError(f"delta must be in (0, 1), got {delta!r}")
    if epsilon <= 0.0:
        raise ValueError(f"epsilon must be positive, got {epsilon!r}")
    params = ExampleParams(n=n)
    if bound is None:
        bound = params.scan_bound()
    rg = np.linspace(0.0, float(bound), int(grid_points))
    m = (25.0 + epsilon) * np.abs(g(rg, params)) - 25.0 * h(rg, params)
    if not np.all(m[1:] > 0.0):
        i_bad = 1 + int(np.argmin(m[1:]))
        raise GateConstructionError(
            f"damping margin not positive definite for epsilon={epsilon!r}: "
            f"m({rg[i_bad]!r}) = {m[i_bad]!r}")
    envelope = np.minimum.accumulate(m[::-1])[::-1]
    ap1 = params.a + 1.0
    scale = 1.0 / ((1.0 - delta) * ap1 * ap1)
    u_max = math.sqrt(float(envelope[-1]) / scale)

    def fn(u: float) -> float:
        w = u * u * scale
        idx = int(np.searchsorted(envelope, w))
        if idx >= envelope.size:
            raise ValueError(
                f"input bound {u!r} exceeds the certifiable range (max {u_max!r})")
        return float(rg[idx])

    gate = ScalarFn(fn, 0.0, u_max, f"input_gate[d={delta:g},eps={epsilon:g}]")
    if not return_info:
        return gate
    i_min = 1 + int(np.argmin(m[1:]))
    info = {
        "delta": delta,
        "epsilon": epsilon,
        "n": n,
        "grid_points": int(grid_points),
        "bound": float(bound),
        "positive_definite": True,
        "margin_min": float(m[i_min]),
        "margin_argmin": float(rg[i_min]),
        "u_max": u_max,
    }
    return gate, info


@dataclass(frozen=True)
class GapShell:
    """Region between a dilated contraction core (outer) and the previous
    basin shrunk by the same margin (inner); inner is None for the first
    interval, where there is no previous basin."""

    k: int
    outer: Region
    inner: Region = None
    dilation: float = DEFAULT_SHELL_DILATION

    def to_dict(self) -> dict:
        return {
            "schema_version": SCHEMA_VERSION,
            "k": self.k,
            "outer": self.outer.to_dict(),
            "inner": self.inner.to_dict() if self.inner is not None else None,
            "dilation": self.dilation,
        }


def gap_regions(analysis: SgcAnalysis, model: SystemModel,
                dilation: float = DEFAULT_SHELL_DILATION):
    """Shells core_k minus basin_{k-1}, with the outer caps grown and the
    inner caps shrunk by ``dilation`` so the shells strictly contain the
    set difference."""
    from .iss_model import basin_region, core_region

    shells = []
    for k in range(1, len(analysis.intervals) + 1):
        core = core_region(analysis, model, k)
        outer = Region("custom", k, core.v1_cap * (1.0 + dilation),
                       core.v2_cap * (1.0 + dilation))
        inner = None
        if k >= 2:
            prev = basin_region(analysis, model, k - 1)
            if not prev.unbounded:
                inner = Region("custom", k - 1, prev.v1_cap * (1.0 - dilation),
                               prev.v2_cap * (1.0 - dilation))
        shells.append(GapShell(k, outer, inner, dilation))
    return shells


def shell_grid(shell: GapShell, model: SystemModel, steps):
    """Explicit (N, 2) grid over the shell: points of the outer box (for
    storage |.| this is [-v1, v1] x [-v2, v2]) that fall outside the inner
    region.  Empty result means the shell is degenerate at this resolution."""
    outer = shell.outer
    pts = box_grid([-outer.v1_cap, -outer.v2_cap],
                   [outer.v1_cap, outer.v2_cap], steps)
    keep = np.array([
        region_contains(outer, model, p)
        and (shell.inner is None or not region_contains(shell.inner, model, p))
        for p in pts
    ])
    return pts[keep]
