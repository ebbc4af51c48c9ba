"""Acceptance suite: one test per shipped criterion, each registered for the
one-line-per-criterion terminal summary.

Two criteria fail by design and are kept red on purpose:

* criterion 1 pins the origin divergence of the literal density at -50, but
  the product rule gives d/dx1[e^{-(x1+x2)} f1] + d/dx2[e^{-(x1+x2)} f2]
  = -100 at the origin (both diagonal field derivatives contribute -50 and
  the gradient terms vanish there);
* criterion 4 requires a zero violation fraction on the open negative
  quadrant, but with the literal density e^{-(x1+x2)} the divergence is
  negative on the whole sampled quadrant (and even the sign-symmetric
  variant e^{-(|x1|+|x2|)} keeps a thin band of violations near the
  anti-diagonal), so the measured fraction is far from zero.

Both are measurements of the system as shipped, not looseness in the tests;
see the repository notes outside this package for the derivations.
"""
import math
import time

import numpy as np

from conftest import record_criterion

from sgdens import (
    ExampleParams,
    ScalarFn,
    SystemModel,
    box_grid,
    build_example_model,
    check_density_propagation,
    check_iss_lyapunov,
    density_literal,
    derive_input_gate,
    divergence,
    divergence_direct,
    equilibrium_points,
    f_partials,
    g,
    h,
    increasing_intervals,
    integrate,
    sweep,
)
from sgdens import _kernels

PARAMS = ExampleParams(n=2)
MODEL = build_example_model(PARAMS, delta=0.5)
RHO = density_literal()


def _parts(params):
    return lambda a, b: f_partials(a, b, params)


def _warm_kernels():
    # Pay the one-time jit compile cost outside every timed section.
    n, a, c1, w1, c2, w2 = MODEL.kernel_spec
    _kernels.run_path(1.0, 1.0, n, a, c1, w1, c2, w2, 1e-2, 5, 1e6)
    _kernels.run_sweep_stats(
        np.array([1.0, 2.0]), np.array([1.0, 2.0]), n, a, c1, w1, c2, w2,
        1e-2, 5, 2, np.zeros((1, 2)), 1e-3, 1e6, True)


_warm_kernels()


def test_criterion_01_origin_divergence():
    t0 = time.perf_counter()
    val = divergence(RHO, MODEL, (0.0, 0.0), (0.0, 0.0),
                     f_partials=_parts(PARAMS))
    ms = (time.perf_counter() - t0) * 1e3
    ok = abs(val - (-50.0)) <= 1e-6 and ms < 1000.0
    record_criterion(
        1, "origin divergence equals -50 within 1e-6",
        ok, f"measured div(rho*f)(0,0) = {val!r} in {ms:.2f} ms")


def test_criterion_02_product_rule_vs_direct():
    rng = np.random.default_rng(20260815)
    pts = rng.uniform(-50.0, 50.0, size=(10_000, 2))
    x1, x2 = pts[:, 0], pts[:, 1]
    worst = 0.0
    t0 = time.perf_counter()
    for u_bounds in ((0.0, 0.0), (3.0, 4.0)):
        params = ExampleParams(n=2, u1_bound=u_bounds[0], u2_bound=u_bounds[1])
        model = build_example_model(params, delta=0.5)
        a = divergence(RHO, model, (x1, x2), u_bounds,
                       f_partials=_parts(params))
        b = divergence_direct(RHO, model, (x1, x2), u_bounds)
        scale = np.maximum.reduce([np.ones_like(a), np.abs(a), np.abs(b)])
        worst = max(worst, float((np.abs(a - b) / scale).max()))
    elapsed = time.perf_counter() - t0
    ok = worst <= 1e-6 and elapsed < 5.0
    record_criterion(
        2, "product-rule vs direct divergence, 1e4 points, both input cases",
        ok, f"max relative error {worst:.3e} in {elapsed:.2f} s")


def test_criterion_03_increasing_intervals():
    t0 = time.perf_counter()
    coarse = increasing_intervals(PARAMS)
    fine = increasing_intervals(PARAMS, grid_step=coarse.grid_step / 2.0)
    elapsed = time.perf_counter() - t0
    shift = 0.0
    if len(coarse.intervals) == len(fine.intervals):
        for ivc, ivf in zip(coarse.intervals, fine.intervals):
            shift = max(shift, abs(ivc.lo - ivf.lo), abs(ivc.hi - ivf.hi))
    else:
        shift = math.inf
    ok = (len(coarse.intervals) == 4 and len(fine.intervals) == 4
          and shift <= 1e-6 and elapsed < 10.0)
    record_criterion(
        3, "exactly 4 increasing intervals, stable under grid halving",
        ok, f"{len(coarse.intervals)} intervals, max boundary shift "
            f"{shift:.3e} in {elapsed:.2f} s")


def test_criterion_04_negative_quadrant():
    gate = derive_input_gate(0.5)
    pts = box_grid((-60.0, -60.0), (-0.1, -0.1), (200, 200))
    t0 = time.perf_counter()
    report = check_density_propagation(
        RHO, MODEL, pts, gate, (0.0, 0.0), f_partials=_parts(PARAMS))
    elapsed = time.perf_counter() - t0
    ok = (not report.inconclusive and report.violation_fraction == 0.0
          and elapsed < 10.0)
    record_criterion(
        4, "zero violation fraction on the negative quadrant",
        ok, f"violation_fraction = {report.violation_fraction!r} "
            f"({report.violation_count}/{report.gated_count}), "
            f"min divergence {report.min_divergence:.6g}, {elapsed:.2f} s")


def test_criterion_05_certified_origin_neighborhood():
    eps = 0.01
    t0 = time.perf_counter()
    pts = box_grid((-eps, -eps), (eps, eps), (41, 41))
    div = divergence(RHO, MODEL, (pts[:, 0], pts[:, 1]), (0.0, 0.0),
                     f_partials=_parts(PARAMS))
    elapsed = time.perf_counter() - t0
    max_div = float(np.max(div))
    ok = eps >= 0.01 and max_div <= 0.0 and elapsed < 1.0
    record_criterion(
        5, "divergence <= 0 certified on a grid over (-0.01, 0.01)^2",
        ok, f"eps = {eps}, max divergence {max_div:.6g} in {elapsed:.3f} s")


def test_criterion_06_autonomous_sweep():
    eqs = equilibrium_points(PARAMS)
    t0 = time.perf_counter()
    report = sweep(MODEL, ((0.0, 0.0), (60.0, 60.0)), (50, 50),
                   t_end=200.0, dt=5e-3, equilibria=eqs, conv_tol=0.05)
    elapsed = time.perf_counter() - t0
    all_eq = all(k.startswith("equilibrium_") for k in report.counts)
    ok = (report.nonconverging_fraction == 0.0 and all_eq
          and elapsed < 120.0)
    record_criterion(
        6, "50x50 autonomous sweep all converged to equilibria",
        ok, f"counts {report.counts}, nonconverging_fraction = "
            f"{report.nonconverging_fraction!r} in {elapsed:.1f} s")


def test_criterion_07_forced_sweep_radius():
    params = ExampleParams(n=2, u1_bound=3.0, u2_bound=4.0)
    model = build_example_model(params, delta=0.5)
    t0 = time.perf_counter()
    report = sweep(model, ((-20.0, -20.0), (20.0, 20.0)), (50, 50),
                   t_end=60.0, dt=2e-3, u_bounds=(3.0, 4.0))
    elapsed = time.perf_counter() - t0
    ok = (report.counts.get("escaped", 0) == 0
          and report.estimated_radius <= 5.5 and elapsed < 120.0)
    record_criterion(
        7, "forced 50x50 sweep stays in a ball of radius <= 5.5",
        ok, f"estimated_radius = {report.estimated_radius:.6g}, counts "
            f"{report.counts} in {elapsed:.1f} s")


def test_criterion_08_iss_grid_check():
    axis = np.linspace(-60.0, 60.0, 481)
    t0 = time.perf_counter()
    r1 = check_iss_lyapunov(MODEL, 1, (axis, axis), u_bound=0.0)
    r2 = check_iss_lyapunov(MODEL, 2, (axis, axis), u_bound=0.0)
    elapsed = time.perf_counter() - t0
    ok = (r1.violation_count == 0 and r2.violation_count == 0
          and elapsed < 30.0)
    record_criterion(
        8, "gated decay check passes for both subsystems",
        ok, f"violations ({r1.violation_count}, {r2.violation_count}), "
            f"gated ({r1.gated_count}, {r2.gated_count}), worst margins "
            f"({r1.worst_margin:.3g}, {r2.worst_margin:.3g}) in {elapsed:.2f} s")


def test_criterion_09_rk4_order():
    ident = ScalarFn(lambda s: s, 0.0, math.inf, "id", class_k=True)
    zero = ScalarFn(lambda s: 0.0, 0.0, math.inf, "zero")
    lin = SystemModel(
        f1=lambda x1, x2, u: -x1, f2=lambda x1, x2, u: -x2,
        V1=lambda x: abs(float(x)), V2=lambda x: abs(float(x)),
        alpha_lo_1=ident, alpha_hi_1=ident,
        alpha_lo_2=ident, alpha_hi_2=ident,
        gamma_12=zero, gamma_21=zero, gamma_1=zero, gamma_2=zero,
        alpha_1=ident, alpha_2=ident, label="linear-decoupled")
    exact = math.exp(-2.0)

    def endpoint_error(dt):
        traj = integrate(lin, (1.0, 1.0), t_end=2.0, dt=dt,
                         error_estimate=False)
        xf = traj.final_state
        return math.hypot(xf[0] - exact, xf[1] - exact)

    e1 = endpoint_error(0.05)
    e2 = endpoint_error(0.025)
    order = math.log2(e1 / e2)
    ok = order >= 3.5
    record_criterion(
        9, "integrator order >= 3.5 by step halving on a linear system",
        ok, f"errors {e1:.3e} -> {e2:.3e}, observed order {order:.3f}")


def test_criterion_10_structural_properties():
    rng = np.random.default_rng(42)
    rs = rng.uniform(-66.0, 66.0, size=1000)
    odd_err = float(np.max(np.abs(g(rs, PARAMS) + g(-rs, PARAMS))))
    hgrid = np.linspace(-66.0, 66.0, 100_000)
    h_min = float(np.min(h(hgrid, PARAMS)))
    jump = 0.0
    for n in (0, 1, 2, 5):
        p = ExampleParams(n=n)
        d = 1e-6
        jump = max(jump,
                   abs(g(p.a - d, p) - g(p.a + d, p)),
                   abs(g(-p.a + d, p) - g(-p.a - d, p)))
    f0 = max(abs(float(MODEL.f1(0.0, 0.0, 0.0))),
             abs(float(MODEL.f2(0.0, 0.0, 0.0))))
    ok = (odd_err <= 1e-12 and h_min >= 0.0 and jump <= 1e-5
          and f0 <= 1e-12)
    record_criterion(
        10, "g odd, h nonnegative, g continuous at the branch point, f(0)=0",
        ok, f"odd error {odd_err:.3e}, min h {h_min:.3e}, branch jump "
            f"{jump:.3e}, |f(0,0,0)| {f0:.3e}")
