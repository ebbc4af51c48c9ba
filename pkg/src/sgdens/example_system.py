"""The built-in worked example: a two-state interconnection whose coupling
gain satisfies the small-gain condition only on a sequence of intervals.

The scalar nonlinearity ``g`` is a saturating staircase (a tanh ramp plus
``n`` unit tanh steps, growing quadratically beyond ``a``); ``h`` is a
nonnegative oscillation whose maxima sit exactly on the staircase plateaus.
Under a floating-point rounding threshold ``p``, ``g`` is *numerically
constant* on bands around each plateau, and those bands are where the
interconnection needs the density (divergence) certificate instead of the
small-gain argument.

All functions accept scalars or numpy arrays and are pure.
"""
from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from . import _kernels
from .density import DensityFn
from .iss_model import SystemModel
from .scalar_fn import ScalarFn, SgcAnalysis, SgcInterval

EPS_DOUBLE = float(np.finfo(float).eps)
_PI2 = math.pi * math.pi


@dataclass(frozen=True)
class ExampleParams:
    """Shape and input parameters of the example system.

    ``n`` is the number of staircase steps (a nonnegative int, or
    ``math.inf`` with ``eval_bound`` supplying the finite evaluation range).
    ``u1_bound``/``u2_bound`` are the constant input sup-norm bounds.
    ``precision`` is the rounding threshold of the numerically-constant model.
    """

    n: float = 2
    u1_bound: float = 0.0
    u2_bound: float = 0.0
    precision: float = EPS_DOUBLE
    eval_bound: float = None

    def __post_init__(self):
        if math.isinf(self.n):
            if self.eval_bound is None or self.eval_bound <= 0:
                raise ValueError("n=inf needs a positive eval_bound")
        else:
            if self.n != int(self.n) or self.n < 0:
                raise ValueError(f"n must be a nonnegative integer, got {self.n!r}")
        if not (0.0 < self.precision < 1.0):
            raise ValueError("precision must be in (0, 1)")
        if self.u1_bound < 0 or self.u2_bound < 0:
            raise ValueError("input bounds must be nonnegative")

    @property
    def a(self) -> float:
        """Transition point to the quadratic branch of g."""
        if math.isinf(self.n):
            return math.inf
        return (4.0 * _PI2 * self.n + 3.0 * _PI2) / 2.0

    @property
    def n_eff(self) -> int:
        """Finite truncation of n used for evaluation.

        For finite n this is n itself.  For n=inf, steps centered beyond the
        evaluation range by more than half the rounding threshold contribute
        less than ``precision`` and are dropped.
        """
        if not math.isinf(self.n):
            return int(self.n)
        reach = self.eval_bound + rounding_threshold(self.precision) / 2.0 + 2.0
        return int(math.ceil(reach / (2.0 * _PI2))) + 1

    def scan_bound(self) -> float:
        """Default analysis range: 1.1*a for finite n, eval_bound otherwise."""
        if math.isinf(self.n):
            return float(self.eval_bound)
        return 1.1 * self.a

    def to_dict(self) -> dict:
        return {
            "n": self.n if not math.isinf(self.n) else "inf",
            "u1_bound": self.u1_bound,
            "u2_bound": self.u2_bound,
            "precision": self.precision,
        }


def _wrap(x, val):
    if isinstance(x, np.ndarray):
        return val
    return float(val)


def g(r, params: ExampleParams):
    """Odd saturating staircase; g(0) = 0 exactly, g(-r) = -g(r) exactly."""
    return _wrap(r, _kernels._g_arr(r, params.n_eff, params.a))


def h(r, params: ExampleParams):
    """Nonnegative oscillation; zero at 2*pi^2*k, maxima near 2*pi^2*k + pi^2."""
    return _wrap(r, _kernels._h_arr(r, params.n_eff))


def g_prime(r, params: ExampleParams):
    """Derivative of g (even in r; the corner at |r|=a uses the inner branch)."""
    return _wrap(r, _kernels._gp_arr(r, params.n_eff, params.a))


def g_inverse(y, params: ExampleParams):
    """Inverse of g on r >= 0, extended to negative y by oddness.

    For y at or above the staircase top (2n+1) the quadratic branch gives a
    closed form; below it, a fixed-count bisection on [0, a].
    """
    arr = np.asarray(y, dtype=float)
    sgn = np.sign(arr)
    ay = np.abs(arr)
    n = params.n_eff
    a = params.a
    if math.isinf(a):
        # unbounded staircase: grow the bracket until it encloses y
        hi_val = 4.0 * _PI2
        while float(_kernels._g_arr(hi_val, n, hi_val * 2)) < float(np.max(ay)):
            hi_val *= 2.0
        a = hi_val
        top = math.inf
    else:
        top = 2.0 * n + 1.0
    out = np.empty_like(ay)
    quad = ay >= top
    if quad.any():
        out[quad] = params.a + np.sqrt(ay[quad] - top)
    rest = ~quad
    if rest.any():
        lo = np.zeros(int(rest.sum()))
        hi = np.full(int(rest.sum()), a)
        target = ay[rest]
        for _ in range(80):
            mid = 0.5 * (lo + hi)
            below = _kernels._g_arr(mid, n, params.a) < target
            lo = np.where(below, mid, lo)
            hi = np.where(below, hi, mid)
        out[rest] = 0.5 * (lo + hi)
    return _wrap(y, sgn * out)


def _input_coeffs(params: ExampleParams):
    ap1 = params.a + 1.0
    c1 = 25.0 + params.u1_bound / ap1
    c2 = 25.0 + params.u2_bound / ap1
    w1 = (params.u1_bound / ap1) ** 2
    w2 = (params.u2_bound / ap1) ** 2
    return c1, w1, c2, w2


def f_i(x_i, x_other, params: ExampleParams, i: int):
    """State derivative of subsystem i: -c_i g(x_i) + 25 h(x_other) + w_i,
    where c_i = 25 + u_i/(a+1) and w_i = (u_i/(a+1))^2."""
    if i not in (1, 2):
        raise ValueError("subsystem index must be 1 or 2")
    c1, w1, c2, w2 = _input_coeffs(params)
    c, w = (c1, w1) if i == 1 else (c2, w2)
    val = (-c * _kernels._g_arr(x_i, params.n_eff, params.a)
           + 25.0 * _kernels._h_arr(x_other, params.n_eff) + w)
    return _wrap(x_i, val)


def f1(x1, x2, params: ExampleParams):
    return f_i(x1, x2, params, 1)


def f2(x1, x2, params: ExampleParams):
    return f_i(x2, x1, params, 2)


def f_partials(x1, x2, params: ExampleParams):
    """Analytic diagonal Jacobian entries (d f_i / d x_i)."""
    c1, _, c2, _ = _input_coeffs(params)
    n, a = params.n_eff, params.a
    p1 = -c1 * _kernels._gp_arr(x1, n, a)
    p2 = -c2 * _kernels._gp_arr(x2, n, a)
    return _wrap(x1, p1), _wrap(x2, p2)


def rounding_threshold(p: float) -> float:
    """Smallest r at which tanh(r) is within p of saturation: atanh(1-p)."""
    if not (0.0 < p < 1.0):
        raise ValueError(f"precision must be in (0, 1), got {p!r}")
    return math.atanh(1.0 - p)


def increasing_intervals(params: ExampleParams, bound: float = None,
                         grid_step: float = None,
                         refine_tol: float = 1e-9) -> SgcAnalysis:
    """Detect the intervals of r >= 0 where g is numerically increasing.

    A point r <= a counts as increasing when at least one tanh term of g is
    farther than ``precision`` from its saturation value, which in exact
    arithmetic means the tanh argument lies within atanh(1-precision) of the
    step center; every r > a is increasing (quadratic branch).  Boundaries
    are refined by bisection.  For n steps this yields n+2 intervals on
    [0, 1.1a].
    """
    if bound is None:
        bound = params.scan_bound()
    if grid_step is None:
        grid_step = 1e-3 * bound
    n, a = params.n_eff, params.a
    half_width = rounding_threshold(params.precision) / 2.0
    centers = np.array([2.0 * _PI2 * i for i in range(n + 1)])

    def increasing(r: float) -> bool:
        if r > a:
            return True
        return float(np.min(np.abs(r - centers))) <= half_width

    m = int(math.ceil(bound / grid_step))
    grid = [min(i * grid_step, bound) for i in range(m + 1)]
    flags = [increasing(r) for r in grid]

    def refine(lo: float, hi: float, rising: bool) -> float:
        # bisect the single flag transition inside (lo, hi)
        for _ in range(200):
            if hi - lo <= refine_tol:
                break
            mid = 0.5 * (lo + hi)
            if increasing(mid) == rising:
                hi = mid
            else:
                lo = mid
        x = 0.5 * (lo + hi)
        # the branch point a is itself a boundary (quadratic growth resumes
        # there); snap to it exactly when the bisection landed on it
        if math.isfinite(a) and abs(x - a) <= max(refine_tol,
                                                  8.0 * EPS_DOUBLE * abs(a)):
            return a
        return x

    intervals = []
    i = 0
    while i <= m:
        if not flags[i]:
            i += 1
            continue
        start = i
        while i + 1 <= m and flags[i + 1]:
            i += 1
        end = i
        lo_b = grid[0] if start == 0 else refine(grid[start - 1], grid[start], True)
        if end == m:
            intervals.append(SgcInterval(lo_b, grid[m], True))
        else:
            hi_b = refine(grid[end], grid[end + 1], False)
            intervals.append(SgcInterval(lo_b, hi_b, False))
        i += 1
    return SgcAnalysis(tuple(intervals), float(bound), float(grid_step),
                       float(refine_tol))


def numerically_constant_regions(params: ExampleParams, bound: float = None,
                                 grid_step: float = None,
                                 refine_tol: float = 1e-9):
    """Closed intervals of r >= 0 where every tanh term of g saturates below
    ``precision`` (the complement of the increasing intervals)."""
    analysis = increasing_intervals(params, bound, grid_step, refine_tol)
    ivs = analysis.intervals
    out = []
    if not ivs:
        return [(0.0, analysis.scan_bound)]
    if ivs[0].lo > 0.0:
        out.append((0.0, ivs[0].lo))
    for left, right in zip(ivs, ivs[1:]):
        out.append((left.hi, right.lo))
    last = ivs[-1]
    if not last.right_open and last.hi < analysis.scan_bound:
        out.append((last.hi, analysis.scan_bound))
    return out


def plateau_levels(params: ExampleParams, bound: float = None):
    """The staircase plateau centers r_k = 2*pi^2*k + pi^2, k = 0..n."""
    if math.isinf(params.n):
        if bound is None:
            bound = params.scan_bound()
        out = []
        k = 0
        while 2.0 * _PI2 * k + _PI2 <= bound:
            out.append(2.0 * _PI2 * k + _PI2)
            k += 1
        return out
    return [2.0 * _PI2 * k + _PI2 for k in range(int(params.n) + 1)]


def equilibrium_points(params: ExampleParams, include_origin: bool = True):
    """Isolated rest points of the autonomous system under the rounding model:
    the origin plus the diagonal plateau points (r_k, r_k)."""
    pts = [[0.0, 0.0]] if include_origin else []
    pts += [[r, r] for r in plateau_levels(params)]
    return np.array(pts, dtype=float)


def rho_example(x1, x2):
    """Density e^{-(x1+x2)}; positive everywhere, rho(1,-1)=1."""
    val = np.exp(-(np.asarray(x1, dtype=float) + np.asarray(x2, dtype=float)))
    return _wrap(x1, val)


def rho_example_symmetric(x1, x2):
    """Density e^{-(|x1|+|x2|)}; even under sign flips of either coordinate."""
    val = np.exp(-(np.abs(np.asarray(x1, dtype=float))
                   + np.abs(np.asarray(x2, dtype=float))))
    return _wrap(x1, val)


def density_literal() -> DensityFn:
    def grad(x1, x2):
        r = rho_example(x1, x2)
        return -r, -r

    return DensityFn(rho_example, grad, "exp(-(x1+x2))")


def density_symmetric() -> DensityFn:
    def grad(x1, x2):
        r = rho_example_symmetric(x1, x2)
        s1 = np.sign(np.asarray(x1, dtype=float))
        s2 = np.sign(np.asarray(x2, dtype=float))
        return _wrap(x1, -s1 * r), _wrap(x2, -s2 * r)

    return DensityFn(rho_example_symmetric, grad, "exp(-(|x1|+|x2|))")


def _check_delta(delta: float) -> None:
    if not (0.0 < delta < 1.0):
        raise ValueError(f"delta must be in (0, 1), got {delta!r}")


def interconnection_gain(params: ExampleParams, delta: float) -> ScalarFn:
    """Coupling gain gamma(s) = g^{-1}(h(s) / (1-delta)).

    On gated points (V_i >= gamma(V_j)) the coupling term 25 h is dominated
    by (1-delta) of the damping 25 g.  Not monotone: h oscillates.
    """
    _check_delta(delta)

    def fn(s: float) -> float:
        return g_inverse(h(s, params) / (1.0 - delta), params)

    return ScalarFn(fn, 0.0, math.inf, f"gamma[d={delta:g}]")


def input_gain(params: ExampleParams, delta: float) -> ScalarFn:
    """Input gain gamma_u(s) = g^{-1}(s^2 / ((a+1)^2 * 12.5 * delta)).

    On gated points the additive input offset (u/(a+1))^2 is dominated by
    half of the delta-fraction of the damping, so the decay rate below
    stays valid for nonzero inputs.
    """
    _check_delta(delta)
    ap1 = params.a + 1.0

    def fn(s: float) -> float:
        return g_inverse(s * s / (ap1 * ap1 * 12.5 * delta), params)

    return ScalarFn(fn, 0.0, math.inf, f"gamma_u[d={delta:g}]", class_k=True)


def decay_rate(params: ExampleParams, delta: float) -> ScalarFn:
    """Certified decay alpha(s) = delta * g(s) * s/(1+s).

    The s/(1+s) factor turns g into a strictly increasing class-K minorant
    (g alone is numerically flat on the plateau bands).
    """
    _check_delta(delta)

    def fn(s: float) -> float:
        return delta * g(s, params) * s / (1.0 + s)

    return ScalarFn(fn, 0.0, math.inf, f"alpha[d={delta:g}]", class_k=True)


def build_example_model(params: ExampleParams, delta: float = 0.5) -> SystemModel:
    """Wire the example into a SystemModel with the gain/decay constructions
    above.  Storage functions are V_i = |x_i| (identity sandwich bounds)."""
    _check_delta(delta)
    gamma = interconnection_gain(params, delta)
    gamma_u = input_gain(params, delta)
    alpha = decay_rate(params, delta)
    ident = ScalarFn(lambda s: s, 0.0, math.inf, "id", class_k=True)
    c1, w1, c2, w2 = _input_coeffs(params)
    kernel_spec = (params.n_eff, params.a, c1, w1, c2, w2)
    return SystemModel(
        f1=lambda x1, x2, u1: f1(x1, x2, params),
        f2=lambda x1, x2, u2: f2(x1, x2, params),
        V1=lambda x: abs(float(x)),
        V2=lambda x: abs(float(x)),
        alpha_lo_1=ident, alpha_hi_1=ident,
        alpha_lo_2=ident, alpha_hi_2=ident,
        gamma_12=gamma, gamma_21=gamma,
        gamma_1=gamma_u, gamma_2=gamma_u,
        alpha_1=alpha, alpha_2=alpha,
        kernel_spec=kernel_spec,
        label=f"example[n={params.n}, u=({params.u1_bound:g},{params.u2_bound:g})]",
    )
