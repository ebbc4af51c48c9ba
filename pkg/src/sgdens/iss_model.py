"""Data model for a two-subsystem interconnection with ISS-Lyapunov data,
grid checks of the gain-gated decay implication, and the sublevel regions
(contraction cores and their basins) attached to each interval where the
loop gain is subcritical.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from ._jsonio import SCHEMA_VERSION
from .scalar_fn import ScalarFn, SgcAnalysis

DEFAULT_SLACK_TOL = 1e-9
FD_STEP_SCALE = 1e-6
VIOLATION_SAMPLE_CAP = 100

REGION_KINDS = ("core", "basin", "custom")


@dataclass(frozen=True)
class SystemModel:
    """Two coupled subsystems with storage functions and gain data.

    ``f1``/``f2`` both map (x1, x2, own input bound) to the subsystem's state
    derivative; inputs enter only through their nonnegative sup-norm bound.
    ``V1``/``V2`` are the storage functions, sandwiched by ``alpha_lo_i`` /
    ``alpha_hi_i``.  ``gamma_12``/``gamma_21`` are the cross-coupling gains,
    ``gamma_1``/``gamma_2`` the input gains and ``alpha_1``/``alpha_2`` the
    certified decay rates.
    """

    f1: callable
    f2: callable
    V1: callable
    V2: callable
    alpha_lo_1: ScalarFn
    alpha_hi_1: ScalarFn
    alpha_lo_2: ScalarFn
    alpha_hi_2: ScalarFn
    gamma_12: ScalarFn
    gamma_21: ScalarFn
    gamma_1: ScalarFn
    gamma_2: ScalarFn
    alpha_1: ScalarFn
    alpha_2: ScalarFn
    n1: int = 1
    n2: int = 1
    kernel_spec: tuple = None
    label: str = "model"

    def f(self, i: int):
        if i == 1:
            return self.f1
        if i == 2:
            return self.f2
        raise ValueError(f"subsystem index must be 1 or 2, got {i!r}")

    def V(self, i: int):
        return self.V1 if i == 1 else self.V2

    def gamma_cross(self, i: int) -> ScalarFn:
        """Gain applied to the *other* subsystem's storage in the gate of i."""
        return self.gamma_12 if i == 1 else self.gamma_21

    def gamma_input(self, i: int) -> ScalarFn:
        return self.gamma_1 if i == 1 else self.gamma_2

    def decay(self, i: int) -> ScalarFn:
        return self.alpha_1 if i == 1 else self.alpha_2


def validate_model(model: SystemModel, samples_1=None, samples_2=None,
                   tol: float = 1e-12) -> dict:
    """Check the structural invariants: f(0,0,0) = 0 and the storage
    sandwich on the given sample points.  Returns a report dict."""
    issues = []
    r1 = float(model.f1(0.0, 0.0, 0.0))
    r2 = float(model.f2(0.0, 0.0, 0.0))
    if abs(r1) > tol or abs(r2) > tol:
        issues.append(f"f(0,0,0) = ({r1!r}, {r2!r}) exceeds {tol}")
    for i, samples in ((1, samples_1), (2, samples_2)):
        if samples is None:
            continue
        V = model.V(i)
        lo = model.alpha_lo_1 if i == 1 else model.alpha_lo_2
        hi = model.alpha_hi_1 if i == 1 else model.alpha_hi_2
        for x in np.atleast_1d(np.asarray(samples, dtype=float)):
            v = float(V(x))
            lo_v, hi_v = lo(abs(x)), hi(abs(x))
            if not (lo_v - tol <= v <= hi_v + tol):
                issues.append(
                    f"storage sandwich broken for subsystem {i} at x={x!r}: "
                    f"{lo_v!r} <= {v!r} <= {hi_v!r} fails")
    return {"ok": not issues, "issues": issues,
            "f_at_zero": [r1, r2], "tol": tol}


@dataclass(frozen=True)
class Region:
    """Product sublevel set {V1 <= v1_cap} x {V2 <= v2_cap}."""

    kind: str
    k: int
    v1_cap: float
    v2_cap: float
    unbounded: bool = False

    def __post_init__(self):
        if self.kind not in REGION_KINDS:
            raise ValueError(f"kind must be one of {REGION_KINDS}, got {self.kind!r}")
        if not self.unbounded and (self.v1_cap < 0 or self.v2_cap < 0):
            raise ValueError("region caps must be nonnegative")

    def to_dict(self) -> dict:
        return {
            "schema_version": SCHEMA_VERSION,
            "kind": self.kind,
            "k": self.k,
            "v1_cap": self.v1_cap,
            "v2_cap": self.v2_cap,
            "unbounded": self.unbounded,
        }

    @staticmethod
    def from_dict(d: dict) -> "Region":
        v1 = d["v1_cap"]
        v2 = d["v2_cap"]
        unbounded = bool(d.get("unbounded", False))
        if v1 is None:
            v1 = math.inf
        if v2 is None:
            v2 = math.inf
        return Region(d["kind"], int(d["k"]), float(v1), float(v2), unbounded)


def _interval_for(analysis: SgcAnalysis, k: int):
    if not (1 <= k <= len(analysis.intervals)):
        raise IndexError(
            f"interval index {k} out of range 1..{len(analysis.intervals)}")
    return analysis.intervals[k - 1]


def core_region(analysis: SgcAnalysis, model: SystemModel, k: int) -> Region:
    """Contraction core attached to interval k: caps grown from the interval's
    left endpoint through the cross gains.  A left endpoint of 0 with
    gamma_21(0) = 0 degenerates to the origin."""
    iv = _interval_for(analysis, k)
    m_lo = iv.lo
    g12, g21 = model.gamma_12, model.gamma_21
    v1 = max(m_lo, g12(m_lo))
    v2 = max(g21(m_lo), g21(g21(m_lo)))
    return Region("core", k, float(v1), float(v2))


def basin_region(analysis: SgcAnalysis, model: SystemModel, k: int) -> Region:
    """Attraction basin attached to interval k: caps from the interval's right
    endpoint.  A right-open final interval yields an unbounded region."""
    iv = _interval_for(analysis, k)
    if iv.right_open:
        return Region("basin", k, math.inf, math.inf, unbounded=True)
    m_hi = iv.hi
    return Region("basin", k, float(m_hi), float(model.gamma_21(m_hi)))


def region_contains(r: Region, model: SystemModel, x) -> bool:
    """True iff V1(x1) <= v1_cap and V2(x2) <= v2_cap."""
    x1, x2 = x
    return (float(model.V1(x1)) <= r.v1_cap
            and float(model.V2(x2)) <= r.v2_cap)


@dataclass
class IssCheckReport:
    """Outcome of a gated-decay grid check for one subsystem."""

    subsystem: int
    grid_spec: dict
    u_bound: float
    total_count: int
    gated_count: int
    violation_count: int
    worst_margin: float
    nonsmooth_count: int
    slack_tol: float
    violations: list = field(default_factory=list)

    @property
    def passed(self) -> bool:
        return self.violation_count == 0

    def to_dict(self) -> dict:
        return {
            "schema_version": SCHEMA_VERSION,
            "subsystem": self.subsystem,
            "grid_spec": self.grid_spec,
            "u_bound": self.u_bound,
            "total_count": self.total_count,
            "gated_count": self.gated_count,
            "violation_count": self.violation_count,
            "worst_margin": self.worst_margin,
            "nonsmooth_count": self.nonsmooth_count,
            "slack_tol": self.slack_tol,
            "passed": self.passed,
            "violations": self.violations[:VIOLATION_SAMPLE_CAP],
        }


_ABS_PROBES = (-2.0, -0.5, 0.0, 0.5, 2.0)


def _is_abs(V) -> bool:
    try:
        return all(abs(float(V(t)) - abs(t)) <= 1e-12 for t in _ABS_PROBES)
    except Exception:
        return False


def _storage_derivative(V, x: float, fx: float, is_abs: bool):
    """dV/dt along the field at scalar state x.  Returns (value, nonsmooth).

    For V = |.| the directional form sign(x)*fx is used, with sign(0) = 0 at
    the kink (flagged); smooth V uses central differences.
    """
    if is_abs:
        if x == 0.0:
            return 0.0, True
        return math.copysign(1.0, x) * fx, False
    step = FD_STEP_SCALE * (1.0 + abs(x))
    grad = (float(V(x + step)) - float(V(x - step))) / (2.0 * step)
    return grad * fx, False


def _eval_field(f, X1, X2, u: float):
    out = f(X1, X2, u)
    arr = np.asarray(out, dtype=float)
    if arr.shape != np.asarray(X1).shape:
        arr = np.vectorize(lambda a, b: float(f(a, b, u)))(X1, X2)
    return arr


def check_iss_lyapunov(model: SystemModel, i: int, grid, u_bound: float = 0.0,
                       slack_tol: float = DEFAULT_SLACK_TOL) -> IssCheckReport:
    """Verify the gated decay implication for subsystem i over a grid.

    ``grid`` is either a dict with keys ``x_i``, ``x_j`` (1-D arrays of own /
    other state values) and optional ``u`` (input bound values, default
    ``[u_bound]``), or a tuple (x_i, x_j) / (x_i, x_j, u) of the same.

    At each sample with V_i(x_i) >= max{gamma_cross(V_j(x_j)),
    gamma_input(u)}, the storage derivative must not exceed
    -decay(|x_i|) + slack_tol.  Samples at the kink of a nonsmooth storage
    are evaluated by the directional form and counted in nonsmooth_count.
    """
    if i not in (1, 2):
        raise ValueError(f"subsystem index must be 1 or 2, got {i!r}")
    if (model.n1 if i == 1 else model.n2) != 1:
        raise ValueError("grid checks support scalar subsystem states only")
    if isinstance(grid, dict):
        xi = np.asarray(grid["x_i"], dtype=float)
        xj = np.asarray(grid["x_j"], dtype=float)
        uu = np.asarray(grid.get("u", [u_bound]), dtype=float)
    else:
        parts = tuple(grid)
        xi = np.asarray(parts[0], dtype=float)
        xj = np.asarray(parts[1], dtype=float)
        uu = (np.asarray(parts[2], dtype=float) if len(parts) > 2
              else np.asarray([u_bound], dtype=float))
    V = model.V(i)
    Vj = model.V(3 - i)
    f = model.f(i)
    g_cross = model.gamma_cross(i)
    g_in = model.gamma_input(i)
    decay = model.decay(i)
    is_abs = _is_abs(V)

    vi_axis = np.array([float(V(x)) for x in xi])
    vj_axis = np.array([float(Vj(x)) for x in xj])
    cross_axis = np.array([float(g_cross(v)) for v in vj_axis])
    decay_axis = np.array([float(decay(v)) for v in vi_axis])

    total = 0
    gated = 0
    nonsmooth = 0
    n_viol = 0
    worst = -math.inf
    viols = []
    X1, X2 = np.meshgrid(xi, xj, indexing="ij")
    gate_cross = vi_axis[:, None] >= cross_axis[None, :]
    for u in uu:
        gate_u = vi_axis >= float(g_in(float(u)))
        gate = gate_cross & gate_u[:, None]
        total += gate.size
        idx_i, idx_j = np.nonzero(gate)
        if idx_i.size == 0:
            continue
        gated += int(idx_i.size)
        own = X1 if i == 1 else X2
        other = X2 if i == 1 else X1
        fvals = _eval_field(f, own, other, float(u))
        if is_abs:
            xs = xi[idx_i]
            fx = fvals[idx_i, idx_j]
            vdot = np.sign(xs) * fx
            kink = xs == 0.0
            nonsmooth += int(kink.sum())
            margins = vdot + decay_axis[idx_i]
            bad = margins > slack_tol
            n_viol += int(bad.sum())
            if margins.size:
                worst = max(worst, float(margins.max()))
            for ii, jj, m, vd, is_kink in zip(
                    idx_i[bad], idx_j[bad], margins[bad], vdot[bad], kink[bad]):
                if len(viols) >= VIOLATION_SAMPLE_CAP:
                    break
                viols.append({
                    "x_i": float(xi[ii]), "x_j": float(xj[jj]),
                    "u": float(u), "storage_derivative": float(vd),
                    "required_decay": float(-decay_axis[ii]),
                    "margin": float(m), "nonsmooth": bool(is_kink),
                })
        else:
            for ii, jj in zip(idx_i, idx_j):
                x = float(xi[ii])
                fx = float(fvals[ii, jj])
                vdot, kink = _storage_derivative(V, x, fx, False)
                nonsmooth += int(kink)
                margin = vdot + decay_axis[ii]
                worst = max(worst, margin)
                if margin > slack_tol:
                    n_viol += 1
                    if len(viols) < VIOLATION_SAMPLE_CAP:
                        viols.append({
                            "x_i": x, "x_j": float(xj[jj]), "u": float(u),
                            "storage_derivative": vdot,
                            "required_decay": float(-decay_axis[ii]),
                            "margin": margin, "nonsmooth": bool(kink),
                        })
    spec = {
        "x_i": {"lo": float(xi.min()), "hi": float(xi.max()), "count": int(xi.size)},
        "x_j": {"lo": float(xj.min()), "hi": float(xj.max()), "count": int(xj.size)},
        "u": {"lo": float(uu.min()), "hi": float(uu.max()), "count": int(uu.size)},
    }
    return IssCheckReport(
        subsystem=i, grid_spec=spec, u_bound=float(u_bound),
        total_count=total, gated_count=gated, violation_count=n_viol,
        worst_margin=worst if gated else -math.inf,
        nonsmooth_count=nonsmooth, slack_tol=slack_tol, violations=viols)
