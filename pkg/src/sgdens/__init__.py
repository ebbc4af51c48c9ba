"""Numerical certificates for a two-subsystem interconnection whose loop
gain is subcritical only on a sequence of intervals: interval detection,
gated ISS-decay checks, density (divergence) propagation on the gap
regions, and trajectory sweeps that test the predicted convergence.
"""
from .scalar_fn import (DomainError, MonotonicityError, OutOfRangeError,
                        ScalarFn, SgcAnalysis, SgcInterval, compose,
                        find_sgc_intervals, identity, invert_on_interval,
                        is_class_k)
from .iss_model import (IssCheckReport, Region, SystemModel, basin_region,
                        check_iss_lyapunov, core_region, region_contains,
                        validate_model)
from .density import (DensityCheckReport, DensityFn, GapShell,
                      GateConstructionError, PositivityError, box_grid,
                      check_density_propagation, derive_input_gate,
                      divergence, divergence_direct, gap_regions, shell_grid)
from .example_system import (EPS_DOUBLE, ExampleParams, build_example_model,
                             decay_rate, density_literal, density_symmetric,
                             equilibrium_points, f1, f2, f_i, f_partials, g,
                             g_inverse, g_prime, h, increasing_intervals,
                             input_gain, interconnection_gain,
                             numerically_constant_regions, plateau_levels,
                             rho_example, rho_example_symmetric,
                             rounding_threshold)
from .sim import (Classification, SweepReport, Trajectory, classify,
                  integrate, sweep, verify_region_contraction,
                  write_sweep_csv, write_trajectory_csv)

__version__ = "0.1.0"

__all__ = [
    "DomainError", "MonotonicityError", "OutOfRangeError", "ScalarFn",
    "SgcAnalysis", "SgcInterval", "compose", "find_sgc_intervals", "identity",
    "invert_on_interval", "is_class_k",
    "IssCheckReport", "Region", "SystemModel", "basin_region",
    "check_iss_lyapunov", "core_region", "region_contains", "validate_model",
    "DensityCheckReport", "DensityFn", "GapShell", "GateConstructionError",
    "PositivityError", "box_grid", "check_density_propagation",
    "derive_input_gate", "divergence", "divergence_direct", "gap_regions",
    "shell_grid",
    "EPS_DOUBLE", "ExampleParams", "build_example_model", "decay_rate",
    "density_literal", "density_symmetric", "equilibrium_points", "f1", "f2",
    "f_i", "f_partials", "g", "g_inverse", "g_prime", "h",
    "increasing_intervals", "input_gain", "interconnection_gain",
    "numerically_constant_regions", "plateau_levels", "rho_example",
    "rho_example_symmetric", "rounding_threshold",
    "Classification", "SweepReport", "Trajectory", "classify", "integrate",
    "sweep", "verify_region_contraction", "write_sweep_csv",
    "write_trajectory_csv",
    "__version__",
]
