"""Command-line front end.

Subcommands: ``gains`` (gain curves CSV/SVG), ``sgc`` (interval detection
JSON), ``density`` (gated divergence reports), ``simulate`` (single
trajectory or initial-condition sweep), ``figures`` (the three standard
plots), ``check-all`` (full pipeline; exit 0 iff every check passed).

Configuration comes from defaults, overridden by an optional TOML/JSON
config file (``--config``), overridden by command-line flags.  All JSON
outputs carry ``schema_version`` and reproduce byte-identically for a fixed
configuration.
"""
from __future__ import annotations

import argparse
import json
import math
import os
import sys
from dataclasses import dataclass, fields

import numpy as np

from ._jsonio import SCHEMA_VERSION, write_json
from ._svg import PALETTE, SvgPlot
from .density import (check_density_propagation, derive_input_gate, divergence,
                      gap_regions)
from .example_system import (EPS_DOUBLE, ExampleParams, build_example_model,
                             density_literal, density_symmetric,
                             equilibrium_points, f_partials,
                             increasing_intervals, interconnection_gain, g, h,
                             plateau_levels)
from .iss_model import check_iss_lyapunov, region_contains
from .scalar_fn import find_sgc_intervals
from .sim import (integrate, classify, sweep, verify_region_contraction,
                  write_sweep_csv, write_trajectory_csv)

NAMED_REGIONS = ("origin-box", "neg-quadrant", "shells", "box")

FIG2_ICS = ((2.0, 2.0), (5.0, 30.0), (30.0, 5.0), (10.0, 50.0), (50.0, 10.0),
            (25.0, 25.0), (45.0, 45.0), (15.0, 38.0), (38.0, 15.0),
            (55.0, 28.0), (28.0, 55.0), (58.0, 58.0), (8.0, 20.0),
            (20.0, 8.0), (50.0, 50.0), (35.0, 58.0), (58.0, 35.0))
FIG3_ICS = ((-20.0, -20.0), (-20.0, 0.0), (-20.0, 20.0), (0.0, -20.0),
            (0.0, 20.0), (20.0, -20.0), (20.0, 0.0), (20.0, 20.0),
            (-12.0, 16.0), (16.0, -12.0), (-16.0, -8.0), (8.0, 18.0),
            (18.0, 8.0), (-18.0, 12.0), (12.0, -18.0), (-5.0, -5.0))


@dataclass
class RunConfig:
    """Flat bag of run parameters; every field can come from the config file
    and (where a flag exists) the command line."""

    n: int = 2
    u1_bound: float = 0.0
    u2_bound: float = 0.0
    precision: float = EPS_DOUBLE
    delta: float = 0.5
    epsilon: float = 1.0
    scan_bound: float = None
    grid_step: float = None
    refine_tol: float = 1e-9
    out_dir: str = "."
    threads: int = None
    # density options
    rho: str = "literal"
    gate_mode: str = "max_v"
    q_tol: float = 0.0
    measure_zero_budget: float = 0.0
    region: str = "origin-box"
    region_lo: tuple = (-0.1, -0.1)
    region_hi: tuple = (0.1, 0.1)
    region_steps: tuple = (41, 41)
    shell_steps: tuple = (40, 40)
    dilation: float = 0.05
    # simulation options
    mode: str = "single"
    x0: tuple = (1.0, 1.0)
    t_end: float = 50.0
    dt: float = 1e-3
    conv_tol: float = 1e-3
    window: float = 0.1
    escape_bound: float = 1e6
    box_lo: tuple = (0.0, 0.0)
    box_hi: tuple = (60.0, 60.0)
    box_steps: tuple = (25, 25)
    # gains options
    gains_samples: int = 601

    def params(self) -> ExampleParams:
        return ExampleParams(n=self.n, u1_bound=self.u1_bound,
                             u2_bound=self.u2_bound, precision=self.precision)

    def bound(self, params: ExampleParams) -> float:
        return self.scan_bound if self.scan_bound is not None else params.scan_bound()


def load_config_file(path: str) -> dict:
    with open(path, "rb") as fh:
        raw = fh.read()
    if path.endswith(".json"):
        return json.loads(raw.decode("utf-8"))
    try:
        import tomllib
    except ImportError:
        import tomli as tomllib
    return tomllib.loads(raw.decode("utf-8"))


def build_config(args: argparse.Namespace) -> RunConfig:
    cfg = RunConfig()
    valid = {f.name for f in fields(RunConfig)}
    if getattr(args, "config", None):
        data = load_config_file(args.config)
        unknown = sorted(set(data) - valid)
        if unknown:
            raise ValueError(f"unknown config keys: {', '.join(unknown)}")
        for key, val in data.items():
            setattr(cfg, key, tuple(val) if isinstance(val, list) else val)
    for key in valid:
        val = getattr(args, key, None)
        if val is not None:
            setattr(cfg, key, tuple(val) if isinstance(val, list) else val)
    if getattr(args, "out", None):
        cfg.out_dir = args.out
    for name in ("precision", "refine_tol", "t_end", "dt", "conv_tol",
                 "window", "escape_bound", "epsilon"):
        if getattr(cfg, name) is not None and getattr(cfg, name) <= 0:
            raise ValueError(f"config field {name} must be positive")
    return cfg


def _fmt(x: float) -> str:
    return format(float(x), ".17g")


def _out(cfg: RunConfig, name: str) -> str:
    os.makedirs(cfg.out_dir, exist_ok=True)
    return os.path.join(cfg.out_dir, name)


def cmd_gains(cfg: RunConfig) -> int:
    params = cfg.params()
    gamma = interconnection_gain(params, cfg.delta)
    bound = cfg.bound(params)
    s = np.linspace(0.0, bound, int(cfg.gains_samples))
    g12 = np.array([gamma(v) for v in s])
    comp = np.array([gamma(v) for v in g12])
    lines = ["s,g12,g21,comp,id"]
    for i in range(s.size):
        lines.append(f"{_fmt(s[i])},{_fmt(g12[i])},{_fmt(g12[i])},"
                     f"{_fmt(comp[i])},{_fmt(s[i])}")
    with open(_out(cfg, "gains.csv"), "w") as fh:
        fh.write("\n".join(lines) + "\n")
    plot = SvgPlot("coupling gains", "s", "gain")
    plot.line(s, g12, PALETTE[0], "g12 = g21")
    plot.line(s, comp, PALETTE[1], "g12(g21(s))")
    plot.line(s, s, PALETTE[2], "identity")
    plot.write(_out(cfg, "gains.svg"))
    print(f"gains: wrote gains.csv and gains.svg ({s.size} samples, "
          f"delta={cfg.delta:g})")
    return 0


def cmd_sgc(cfg: RunConfig) -> int:
    params = cfg.params()
    bound = cfg.bound(params)
    canonical = increasing_intervals(params, bound, cfg.grid_step, cfg.refine_tol)
    write_json(_out(cfg, "sgc_analysis.json"), canonical.to_dict())
    gamma = interconnection_gain(params, cfg.delta)
    raw = find_sgc_intervals(gamma, gamma, bound,
                             grid_step=cfg.grid_step, refine_tol=cfg.refine_tol)
    write_json(_out(cfg, "sgc_scan.json"), raw.to_dict())
    print(f"sgc: {len(canonical.intervals)} increasing intervals "
          f"(sgc_analysis.json); raw loop-gain scan found "
          f"{len(raw.intervals)} subcritical intervals (sgc_scan.json)")
    for iv in canonical.intervals:
        tail = ", right-open" if iv.right_open else ""
        print(f"  [{iv.lo:.12g}, {iv.hi:.12g}{tail}]")
    return 0


def _density_fn(cfg: RunConfig):
    if cfg.rho == "literal":
        return density_literal()
    if cfg.rho == "symmetric":
        return density_symmetric()
    raise ValueError(f"rho must be 'literal' or 'symmetric', got {cfg.rho!r}")


def _shell_cells(params: ExampleParams, cfg: RunConfig):
    """Constant-band product cells: the parts of the gap shells where both
    coordinates sit in a numerically-constant band (the rest of each shell
    lies in increasing intervals and is covered by the gated-decay check)."""
    from .example_system import numerically_constant_regions

    bands = numerically_constant_regions(params, cfg.bound(params),
                                         cfg.grid_step, cfg.refine_tol)
    cells = []
    for i, (lo1, hi1) in enumerate(bands, start=1):
        for j, (lo2, hi2) in enumerate(bands, start=1):
            cells.append(((i, j), {"lo": [lo1, lo2], "hi": [hi1, hi2],
                                   "steps": list(cfg.shell_steps)}))
    return cells


def _region_consistent(cfg: RunConfig, params: ExampleParams, model, box):
    """Return (shells the box overlaps, all shells); an empty first element
    means the configured region touches no gap shell."""
    analysis = increasing_intervals(params, cfg.bound(params),
                                    cfg.grid_step, cfg.refine_tol)
    shells = gap_regions(analysis, model, cfg.dilation)
    probes = np.linspace(0.0, 1.0, 9)
    pts = [(box["lo"][0] + a * (box["hi"][0] - box["lo"][0]),
            box["lo"][1] + b * (box["hi"][1] - box["lo"][1]))
           for a in probes for b in probes]
    hit = []
    for shell in shells:
        for p in pts:
            if region_contains(shell.outer, model, p) and (
                    shell.inner is None
                    or not region_contains(shell.inner, model, p)):
                hit.append(shell)
                break
    return hit, shells


def cmd_density(cfg: RunConfig) -> int:
    params = cfg.params()
    model = build_example_model(params, cfg.delta)
    rho = _density_fn(cfg)
    gate = derive_input_gate(cfg.delta, cfg.epsilon, cfg.n)
    fp = lambda a, b: f_partials(a, b, params)
    u = (params.u1_bound, params.u2_bound)
    if cfg.region not in NAMED_REGIONS:
        raise ValueError(f"region must be one of {NAMED_REGIONS}, got {cfg.region!r}")
    if cfg.region == "shells":
        jobs = [(f"density_shell_{i}_{j}.json", box)
                for (i, j), box in _shell_cells(params, cfg)]
    else:
        if cfg.region == "origin-box":
            box = {"lo": [-0.1, -0.1], "hi": [0.1, 0.1],
                   "steps": list(cfg.region_steps)}
        elif cfg.region == "neg-quadrant":
            box = {"lo": [-60.0, -60.0], "hi": [-0.1, -0.1],
                   "steps": list(cfg.region_steps)}
        else:
            box = {"lo": list(cfg.region_lo), "hi": list(cfg.region_hi),
                   "steps": list(cfg.region_steps)}
        hit, shells = _region_consistent(cfg, params, model, box)
        if not hit:
            print("density: region overlaps no gap shell; detected shells:",
                  file=sys.stderr)
            for s in shells:
                print(f"  k={s.k}: outer caps ({s.outer.v1_cap:.6g}, "
                      f"{s.outer.v2_cap:.6g})"
                      + (f", inner caps ({s.inner.v1_cap:.6g}, "
                         f"{s.inner.v2_cap:.6g})" if s.inner else ""),
                      file=sys.stderr)
            return 1
        jobs = [(f"density_{cfg.region.replace('-', '_')}.json", box)]
    failed = 0
    for fname, box in jobs:
        report = check_density_propagation(
            rho, model, box, gate, u, q_tol=cfg.q_tol,
            gate_mode=cfg.gate_mode,
            measure_zero_budget=cfg.measure_zero_budget, f_partials=fp)
        write_json(_out(cfg, fname), report.to_dict())
        status = "pass" if report.passed else "FAIL"
        print(f"density [{status}] {fname}: gated {report.gated_count}/"
              f"{report.total_count}, min_divergence={report.min_divergence!r}, "
              f"violation_fraction={report.violation_fraction!r}")
        failed += 0 if report.passed else 1
    return 0 if failed == 0 else 1


def cmd_simulate(cfg: RunConfig) -> int:
    params = cfg.params()
    model = build_example_model(params, cfg.delta)
    eqs = equilibrium_points(params)
    u = (params.u1_bound, params.u2_bound)
    if cfg.mode == "single":
        traj = integrate(model, cfg.x0, cfg.t_end, cfg.dt, u_bounds=u,
                         escape_bound=cfg.escape_bound)
        cls = classify(traj, model, eqs, cfg.conv_tol, cfg.window,
                       cfg.escape_bound)
        write_trajectory_csv(traj, _out(cfg, "trajectory.csv"))
        write_json(_out(cfg, "trajectory.json"), {
            "schema_version": SCHEMA_VERSION,
            "x0": list(cfg.x0), "t_end": cfg.t_end, "dt": cfg.dt,
            "u_bounds": list(u),
            "classification": cls.to_dict(),
            "error_estimate": traj.error_estimate,
            "final_state": [float(traj.states[-1, 0]),
                            float(traj.states[-1, 1])],
            "truncated": traj.truncated,
        })
        print(f"simulate: {cls.kind}"
              + (f" (value {cls.value!r})" if cls.value is not None else "")
              + f", final state ({traj.states[-1, 0]:.6g}, "
                f"{traj.states[-1, 1]:.6g}), error estimate "
                f"{traj.error_estimate:.3e}")
        return 0
    if cfg.mode != "sweep":
        raise ValueError(f"mode must be 'single' or 'sweep', got {cfg.mode!r}")
    report = sweep(model, (cfg.box_lo, cfg.box_hi), cfg.box_steps, cfg.t_end,
                   cfg.dt, u_bounds=u, equilibria=eqs, conv_tol=cfg.conv_tol,
                   window=cfg.window, escape_bound=cfg.escape_bound)
    write_json(_out(cfg, "sweep.json"), report.to_dict())
    write_sweep_csv(report, _out(cfg, "sweep.csv"))
    print(f"simulate: sweep {report.grid_steps[0]}x{report.grid_steps[1]}, "
          f"counts {report.counts}, nonconverging_fraction="
          f"{report.nonconverging_fraction!r}, estimated_radius="
          f"{report.estimated_radius!r}")
    return 0


def _plot_portrait(model, ics, t_end, dt, stride, title, axis_lo, axis_hi,
                   eqs=None):
    plot = SvgPlot(title, "x1", "x2")
    rows = ["ic,t,x1,x2"]
    for idx, x0 in enumerate(ics):
        traj = integrate(model, x0, t_end, dt, error_estimate=False)
        sel = np.arange(0, traj.states.shape[0], stride)
        if sel[-1] != traj.states.shape[0] - 1:
            sel = np.append(sel, traj.states.shape[0] - 1)
        xs = traj.states[sel, 0]
        ys = traj.states[sel, 1]
        plot.line(xs, ys, PALETTE[idx % len(PALETTE)])
        plot.circle(x0[0], x0[1], 4.0)
        for t, x1v, x2v in zip(traj.times[sel], xs, ys):
            rows.append(f"{idx},{_fmt(t)},{_fmt(x1v)},{_fmt(x2v)}")
    plot.line([axis_lo, axis_hi], [axis_lo, axis_hi], "#00000000")
    if eqs is not None:
        for e in eqs:
            plot.marker(e[0], e[1], "#d62728")
    return plot, rows


def cmd_figures(cfg: RunConfig) -> int:
    params = cfg.params()
    bound = params.scan_bound()
    xs = np.linspace(0.0, bound, 1201)
    gv = g(xs, params)
    hv = h(xs, params)
    plot = SvgPlot("staircase g and oscillation h", "r", "value")
    plot.line(xs, gv, PALETTE[0], "g")
    plot.line(xs, hv, PALETTE[1], "h")
    plot.write(_out(cfg, "fig1_gh.svg"))
    rows = ["s,g,h"]
    for i in range(xs.size):
        rows.append(f"{_fmt(xs[i])},{_fmt(gv[i])},{_fmt(hv[i])}")
    with open(_out(cfg, "fig1_gh.csv"), "w") as fh:
        fh.write("\n".join(rows) + "\n")

    auto_params = ExampleParams(n=cfg.n, precision=cfg.precision)
    model0 = build_example_model(auto_params, cfg.delta)
    r1 = plateau_levels(auto_params)[1]
    plot, rows = _plot_portrait(model0, FIG2_ICS, 120.0, 5e-3, 40,
                                "autonomous portrait (u = 0)", 0.0, 60.0,
                                eqs=[(r1, r1)])
    plot.write(_out(cfg, "fig2_autonomous.svg"))
    with open(_out(cfg, "fig2_autonomous.csv"), "w") as fh:
        fh.write("\n".join(rows) + "\n")

    forced = ExampleParams(n=cfg.n, u1_bound=3.0, u2_bound=4.0,
                           precision=cfg.precision)
    model34 = build_example_model(forced, cfg.delta)
    plot, rows = _plot_portrait(model34, FIG3_ICS, 60.0, 2e-3, 60,
                                "forced portrait (u bounds (3, 4))",
                                -20.0, 20.0)
    theta = np.linspace(0.0, 2.0 * math.pi, 181)
    plot.line(5.0 * np.cos(theta), 5.0 * np.sin(theta), "#000000", "|x| = 5")
    plot.write(_out(cfg, "fig3_forced.svg"))
    with open(_out(cfg, "fig3_forced.csv"), "w") as fh:
        fh.write("\n".join(rows) + "\n")
    print("figures: wrote fig1_gh, fig2_autonomous, fig3_forced (.svg + .csv)")
    return 0


def cmd_check_all(cfg: RunConfig) -> int:
    params = cfg.params()
    model = build_example_model(params, cfg.delta)
    bound = cfg.bound(params)
    checks = []

    def record(name: str, passed: bool, detail: str):
        checks.append({"name": name, "passed": bool(passed), "detail": detail})
        print(f"[{'PASS' if passed else 'FAIL'}] {name}: {detail}")

    cmd_gains(cfg)
    analysis = increasing_intervals(params, bound, cfg.grid_step, cfg.refine_tol)
    write_json(_out(cfg, "sgc_analysis.json"), analysis.to_dict())
    want = params.n_eff + 2
    record("interval-count", len(analysis.intervals) == want,
           f"{len(analysis.intervals)} increasing intervals (expected {want})")

    eqs = equilibrium_points(params)
    worst = 0.0
    for e in eqs:
        d1 = abs(float(model.f1(e[0], e[1], params.u1_bound)))
        d2 = abs(float(model.f2(e[0], e[1], params.u2_bound)))
        worst = max(worst, d1, d2)
    record("equilibrium-residuals", worst < 1e-5,
           f"max |f| over {len(eqs)} rest points = {worst:.3e}")

    axis = np.linspace(-60.0, 60.0, 241)
    for i in (1, 2):
        rep = check_iss_lyapunov(model, i, (axis, axis),
                                 u_bound=params.u1_bound if i == 1
                                 else params.u2_bound)
        write_json(_out(cfg, f"iss_check_{i}.json"), rep.to_dict())
        record(f"gated-decay-subsystem-{i}", rep.violation_count == 0,
               f"{rep.violation_count} violations over {rep.gated_count} "
               f"gated samples, worst margin {rep.worst_margin:.3e}")

    rho = density_literal()
    gate = derive_input_gate(cfg.delta, cfg.epsilon, cfg.n)
    fp = lambda a, b: f_partials(a, b, params)
    u = (params.u1_bound, params.u2_bound)
    cell_fail = 0
    worst_min = math.inf
    cells = _shell_cells(params, cfg)
    for (i, j), box in cells:
        rep = check_density_propagation(rho, model, box, gate, u,
                                        q_tol=cfg.q_tol,
                                        gate_mode=cfg.gate_mode,
                                        measure_zero_budget=1e-3,
                                        f_partials=fp)
        write_json(_out(cfg, f"density_shell_{i}_{j}.json"), rep.to_dict())
        if not rep.passed:
            cell_fail += 1
        worst_min = min(worst_min, rep.min_divergence)
    record("gap-cell-divergence", cell_fail == 0,
           f"{len(cells)} constant-band product cells, {cell_fail} failed, "
           f"min divergence {worst_min:.3e} (budget 1e-3); cells with an "
           "increasing coordinate are covered by the gated-decay check")

    ax = np.linspace(-0.01, 0.01, 41)
    X1, X2 = np.meshgrid(ax, ax, indexing="ij")
    div = divergence(rho, model, (X1, X2), u, f_partials=fp)
    record("origin-negativity", float(np.max(div)) <= 0.0,
           f"max divergence on [-0.01, 0.01]^2 = {float(np.max(div)):.6g}")

    auto = sweep(model, ((0.0, 0.0), (60.0, 60.0)), (25, 25), 200.0, 5e-3,
                 u_bounds=u, equilibria=eqs, conv_tol=0.05)
    write_json(_out(cfg, "sweep_autonomous.json"), auto.to_dict())
    write_sweep_csv(auto, _out(cfg, "sweep_autonomous.csv"))
    record("autonomous-sweep", auto.nonconverging_fraction == 0.0,
           f"counts {auto.counts}, nonconverging_fraction="
           f"{auto.nonconverging_fraction!r}")

    forced_params = ExampleParams(n=cfg.n, u1_bound=3.0, u2_bound=4.0,
                                  precision=cfg.precision)
    forced_model = build_example_model(forced_params, cfg.delta)
    forced = sweep(forced_model, ((-20.0, -20.0), (20.0, 20.0)), (25, 25),
                   60.0, 2e-3, u_bounds=(3.0, 4.0), equilibria=None,
                   conv_tol=0.05)
    write_json(_out(cfg, "sweep_forced.json"), forced.to_dict())
    write_sweep_csv(forced, _out(cfg, "sweep_forced.csv"))
    record("forced-sweep", forced.estimated_radius <= 5.5,
           f"estimated_radius={forced.estimated_radius!r} (cap 5.5), "
           f"counts {forced.counts}")

    contraction = verify_region_contraction(model, analysis, 1,
                                            sample_count=50, t_end=120.0,
                                            dt=5e-3, u_bounds=u, radius=0.05)
    write_json(_out(cfg, "contraction_k1.json"), contraction)
    record("contraction-into-core-1",
           contraction["fraction_converged"] == 1.0,
           f"fraction {contraction['fraction_converged']!r} of "
           f"{contraction['sample_count']} basin samples")

    cmd_figures(cfg)
    missing = [f for f in ("fig1_gh.svg", "fig2_autonomous.svg",
                           "fig3_forced.svg", "gains.csv", "sgc_analysis.json")
               if not os.path.exists(_out(cfg, f))]
    record("artifacts", not missing,
           "all expected artifacts written" if not missing
           else f"missing: {missing}")

    all_passed = all(c["passed"] for c in checks)
    write_json(_out(cfg, "check_all.json"), {
        "schema_version": SCHEMA_VERSION,
        "all_passed": all_passed,
        "checks": checks,
    })
    print(f"check-all: {'all checks passed' if all_passed else 'FAILURES present'}")
    return 0 if all_passed else 1


def _add_common(sp: argparse.ArgumentParser) -> None:
    sp.add_argument("--n", type=int, help="number of staircase steps")
    sp.add_argument("--u1", dest="u1_bound", type=float,
                    help="input bound for subsystem 1")
    sp.add_argument("--u2", dest="u2_bound", type=float,
                    help="input bound for subsystem 2")
    sp.add_argument("--precision", type=float,
                    help="rounding threshold of the numerically-constant model")
    sp.add_argument("--delta", type=float, help="gain split in (0,1)")
    sp.add_argument("--scan-bound", dest="scan_bound", type=float)


def make_parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(
        prog="sgdens",
        description="interval small-gain + density certificates for the "
                    "two-subsystem staircase interconnection")
    p.add_argument("--config", help="TOML or JSON config file")
    p.add_argument("--out", help="output directory")
    p.add_argument("--threads", type=int, help="compiled-kernel thread count")
    sub = p.add_subparsers(dest="command", required=True)

    sp = sub.add_parser("gains", help="gain curves CSV + SVG")
    _add_common(sp)
    sp.add_argument("--samples", dest="gains_samples", type=int)

    sp = sub.add_parser("sgc", help="interval detection JSON")
    _add_common(sp)
    sp.add_argument("--grid-step", dest="grid_step", type=float)
    sp.add_argument("--refine-tol", dest="refine_tol", type=float)

    sp = sub.add_parser("density", help="gated divergence reports")
    _add_common(sp)
    sp.add_argument("--region", choices=NAMED_REGIONS)
    sp.add_argument("--lo", dest="region_lo", nargs=2, type=float)
    sp.add_argument("--hi", dest="region_hi", nargs=2, type=float)
    sp.add_argument("--steps", dest="region_steps", nargs=2, type=int)
    sp.add_argument("--rho", choices=("literal", "symmetric"))
    sp.add_argument("--gate", dest="gate_mode",
                    choices=("max_v", "componentwise"))
    sp.add_argument("--q-tol", dest="q_tol", type=float)
    sp.add_argument("--budget", dest="measure_zero_budget", type=float)
    sp.add_argument("--epsilon", type=float)

    sp = sub.add_parser("simulate", help="trajectory or sweep")
    _add_common(sp)
    sp.add_argument("--mode", choices=("single", "sweep"))
    sp.add_argument("--x0", nargs=2, type=float)
    sp.add_argument("--t-end", dest="t_end", type=float)
    sp.add_argument("--dt", type=float)
    sp.add_argument("--conv-tol", dest="conv_tol", type=float)
    sp.add_argument("--window", type=float)
    sp.add_argument("--escape-bound", dest="escape_bound", type=float)
    sp.add_argument("--box-lo", dest="box_lo", nargs=2, type=float)
    sp.add_argument("--box-hi", dest="box_hi", nargs=2, type=float)
    sp.add_argument("--steps", dest="box_steps", nargs=2, type=int)

    sp = sub.add_parser("figures", help="the three standard plots")
    _add_common(sp)

    sp = sub.add_parser("check-all", help="full pipeline, exit 0 iff clean")
    _add_common(sp)
    sp.add_argument("--grid-step", dest="grid_step", type=float)
    sp.add_argument("--epsilon", type=float)
    return p


COMMANDS = {
    "gains": cmd_gains,
    "sgc": cmd_sgc,
    "density": cmd_density,
    "simulate": cmd_simulate,
    "figures": cmd_figures,
    "check-all": cmd_check_all,
}


def main(argv=None) -> int:
    args = make_parser().parse_args(argv)
    try:
        cfg = build_config(args)
        if cfg.threads:
            try:
                from numba import set_num_threads
                set_num_threads(int(cfg.threads))
            except Exception:
                pass
        return COMMANDS[args.command](cfg)
    except (ValueError, OSError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2


if __name__ == "__main__":
    sys.exit(main())
