"""Unit tests for the worked staircase system: the saturating nonlinearity
and its inverse, the numerically-increasing interval detection, plateau
rest points, densities, and the gain/decay constructions."""
import math

import numpy as np
import pytest

from sgdens import (
    ExampleParams,
    build_example_model,
    decay_rate,
    density_literal,
    density_symmetric,
    equilibrium_points,
    f_partials,
    g,
    g_inverse,
    g_prime,
    h,
    increasing_intervals,
    input_gain,
    interconnection_gain,
    is_class_k,
    numerically_constant_regions,
    plateau_levels,
    rho_example,
    rho_example_symmetric,
    rounding_threshold,
)
from sgdens.scalar_fn import ScalarFn

PI2 = math.pi * math.pi
PARAMS = ExampleParams(n=2)
A = PARAMS.a

# boundaries pinned by an independent high-precision computation
INTERVALS = (
    (0.0, 9.184200142419275),
    (10.55500865975944, 28.92340894459799),
    (30.294217461938157, 48.662617746776704),
    (54.28282420599147, 59.71110662659062),
)
REST = (9.869604401089358, 29.608813203268074, 49.34802200544679)


class TestExampleParams:
    def test_branch_point_values(self):
        assert A == pytest.approx(54.28282420599147, rel=1e-15)
        assert ExampleParams(n=0).a == pytest.approx(14.804406601634037,
                                                     rel=1e-15)
        assert A == (4.0 * PI2 * 2 + 3.0 * PI2) / 2.0

    def test_validation(self):
        with pytest.raises(ValueError):
            ExampleParams(n=-1)
        with pytest.raises(ValueError):
            ExampleParams(n=2.5)
        with pytest.raises(ValueError):
            ExampleParams(n=2, precision=0.0)
        with pytest.raises(ValueError):
            ExampleParams(n=2, precision=1.0)
        with pytest.raises(ValueError):
            ExampleParams(n=math.inf)  # needs eval_bound
        with pytest.raises(ValueError):
            ExampleParams(n=2, u1_bound=-1.0)

    def test_unbounded_staircase(self):
        p = ExampleParams(n=math.inf, eval_bound=60.0)
        assert math.isinf(p.a)
        assert p.scan_bound() == 60.0
        assert p.n_eff >= 4  # enough steps to cover the evaluation range
        assert p.to_dict()["n"] == "inf"

    def test_scan_bound_finite_n(self):
        assert PARAMS.scan_bound() == pytest.approx(1.1 * A, rel=1e-15)


class TestNonlinearity:
    def test_odd_and_zero_at_origin(self):
        rng = np.random.default_rng(3)
        rs = rng.uniform(-70.0, 70.0, size=1000)
        assert float(np.max(np.abs(g(rs, PARAMS) + g(-rs, PARAMS)))) == 0.0
        assert g(0.0, PARAMS) == 0.0

    def test_plateau_values_round_to_odd_integers(self):
        # the rounding model makes g exactly 1, 3, 5 at the rest points
        assert g(REST[0], PARAMS) == 1.0
        assert g(REST[1], PARAMS) == 3.0
        assert g(REST[2], PARAMS) == 5.0

    def test_quadratic_branch(self):
        assert g(A + 1e-6, PARAMS) == pytest.approx(5.000000000001,
                                                    abs=1e-12)
        assert g(A + 2.0, PARAMS) == pytest.approx(9.0, rel=1e-15)
        assert g(-(A + 2.0), PARAMS) == pytest.approx(-9.0, rel=1e-15)

    def test_near_continuity_at_the_branch_point(self):
        for n in (0, 1, 2, 5):
            p = ExampleParams(n=n)
            gap = abs(g(p.a - 1e-6, p) - g(p.a + 1e-6, p))
            assert gap <= 1e-5

    def test_derivative(self):
        assert g_prime(0.0, PARAMS) == 2.0
        for r in (0.5, 3.0, 19.0, 40.0, A + 3.0):
            step = 1e-6
            fd = (g(r + step, PARAMS) - g(r - step, PARAMS)) / (2 * step)
            assert g_prime(r, PARAMS) == pytest.approx(fd, rel=1e-5,
                                                       abs=1e-7)

    def test_array_and_scalar_forms(self):
        arr = g(np.array([0.0, 1.0, A + 2.0]), PARAMS)
        assert isinstance(arr, np.ndarray)
        assert arr[2] == g(A + 2.0, PARAMS)
        assert isinstance(g(1.0, PARAMS), float)


class TestInverse:
    def test_closed_form_beyond_the_plateaus(self):
        # y = 6 lands on the quadratic branch: r = a + sqrt(6 - 5)
        assert g_inverse(6.0, PARAMS) == A + 1.0
        assert g_inverse(-6.0, PARAMS) == -(A + 1.0)

    def test_round_trip_on_the_rising_stretches(self):
        for r in (0.4, 1.2, 19.0, 20.5, 39.0, A + 4.0):
            assert g_inverse(g(r, PARAMS), PARAMS) == pytest.approx(
                r, abs=1e-6)

    def test_zero(self):
        assert g_inverse(0.0, PARAMS) == 0.0

    def test_unbounded_staircase_inverse(self):
        p = ExampleParams(n=math.inf, eval_bound=60.0)
        for r in (0.5, 20.5, 40.0):
            assert g_inverse(g(r, p), p) == pytest.approx(r, abs=1e-6)


class TestEnvelope:
    def test_nonnegative_everywhere(self):
        grid = np.linspace(-66.0, 66.0, 100_000)
        assert float(np.min(h(grid, PARAMS))) >= 0.0

    def test_frozen_values(self):
        assert h(0.0, PARAMS) == 0.0
        assert h(PI2, PARAMS) == pytest.approx(1.000000005350576, rel=1e-12)
        assert h(REST[1], PARAMS) == pytest.approx(3.0, rel=1e-12)
        assert h(REST[2], PARAMS) == pytest.approx(4.999999994649424,
                                                   rel=1e-12)
        assert h(-50.0, PARAMS) == pytest.approx(0.989271306089457,
                                                 rel=1e-12)
        assert h(60.0, PARAMS) == pytest.approx(0.07712459768688841,
                                                rel=1e-12)

    def test_not_symmetric(self):
        # the envelope is nonnegative but not even
        assert h(-50.0, PARAMS) != h(50.0, PARAMS)

    def test_bounded_by_five_for_two_steps(self):
        grid = np.linspace(0.0, 60.0, 100_000)
        m = float(np.max(h(grid, PARAMS)))
        assert m == pytest.approx(4.999999994003159, rel=1e-12)
        assert m < 5.0


class TestRoundingModel:
    def test_threshold_value(self):
        eps = float(np.finfo(float).eps)
        assert rounding_threshold(eps) == pytest.approx(18.368400284838551,
                                                        rel=1e-12)
        assert math.tanh(rounding_threshold(1e-3)) == pytest.approx(
            1.0 - 1e-3, rel=1e-12)
        with pytest.raises(ValueError):
            rounding_threshold(0.0)
        with pytest.raises(ValueError):
            rounding_threshold(1.5)

    def test_increasing_intervals_frozen_boundaries(self):
        an = increasing_intervals(PARAMS)
        assert len(an.intervals) == 4
        for iv, (lo, hi) in zip(an.intervals, INTERVALS):
            assert iv.lo == pytest.approx(lo, abs=1e-6)
            assert iv.hi == pytest.approx(hi, abs=1e-6)
        assert an.intervals[0].lo == 0.0
        # the last interval starts exactly at the branch point and is
        # clipped by the scan bound, not by saturation
        assert an.intervals[3].lo == A
        assert an.intervals[3].right_open
        assert not any(iv.right_open for iv in an.intervals[:3])

    def test_interval_count_tracks_the_step_count(self):
        assert len(increasing_intervals(ExampleParams(n=0)).intervals) == 2
        assert len(increasing_intervals(ExampleParams(n=1)).intervals) == 3
        assert len(increasing_intervals(ExampleParams(n=5)).intervals) == 7

    def test_unbounded_staircase_intervals(self):
        p = ExampleParams(n=math.inf, eval_bound=60.0)
        an = increasing_intervals(p)
        assert len(an.intervals) == 4
        assert an.intervals[-1].right_open

    def test_constant_bands_are_the_complement(self):
        an = increasing_intervals(PARAMS)
        bands = numerically_constant_regions(PARAMS)
        assert len(bands) == 3
        for (lo, hi), left, right in zip(bands, an.intervals,
                                         an.intervals[1:]):
            assert lo == left.hi and hi == right.lo

    def test_rest_points_sit_inside_the_constant_bands(self):
        bands = numerically_constant_regions(PARAMS)
        for r, (lo, hi) in zip(REST, bands):
            assert lo < r < hi


class TestRestPoints:
    def test_plateau_levels(self):
        levels = plateau_levels(PARAMS)
        assert levels == pytest.approx(REST, rel=1e-15)

    def test_equilibrium_points_layout(self):
        eqs = equilibrium_points(PARAMS)
        assert eqs.shape == (4, 2)
        assert tuple(eqs[0]) == (0.0, 0.0)
        assert eqs[1, 0] == eqs[1, 1] == pytest.approx(REST[0], rel=1e-15)
        assert equilibrium_points(PARAMS, include_origin=False).shape == (3, 2)

    def test_field_residuals_at_rest_points(self):
        model = build_example_model(PARAMS)
        res = [float(model.f1(r, r, 0.0)) for r in REST]
        assert res[0] == pytest.approx(1.3376439866874534e-07, rel=1e-6)
        assert res[1] == 0.0
        assert res[2] == pytest.approx(-1.3376440222145902e-07, rel=1e-6)

    def test_unbounded_staircase_levels_respect_the_bound(self):
        p = ExampleParams(n=math.inf, eval_bound=60.0)
        levels = plateau_levels(p)
        assert all(lv <= 60.0 for lv in levels)
        assert len(levels) == 3  # the next level, ~69.1, is out of range


class TestField:
    def test_zero_input_reduces_to_the_plain_coupling(self):
        xs = np.linspace(-60.0, 60.0, 101)
        X1, X2 = np.meshgrid(xs, xs[:51], indexing="ij")
        model = build_example_model(PARAMS)
        expected = -25.0 * g(X1, PARAMS) + 25.0 * h(X2, PARAMS)
        assert np.array_equal(model.f1(X1, X2, 0.0), expected)

    def test_input_enters_through_damping_and_offset(self):
        p = ExampleParams(n=2, u1_bound=3.0, u2_bound=4.0)
        model = build_example_model(p)
        c1 = 25.0 + 3.0 / (p.a + 1.0)
        w1 = (3.0 / (p.a + 1.0)) ** 2
        x1, x2 = 7.0, -11.0
        expected = -c1 * g(x1, p) + 25.0 * h(x2, p) + w1
        assert float(model.f1(x1, x2, 3.0)) == pytest.approx(expected,
                                                             rel=1e-15)

    def test_analytic_partials_match_finite_differences(self):
        rng = np.random.default_rng(11)
        pts = rng.uniform(-50.0, 50.0, size=(50, 2))
        p1, p2 = f_partials(pts[:, 0], pts[:, 1], PARAMS)
        step = 1e-6
        fd1 = (-25.0 * (g(pts[:, 0] + step, PARAMS)
                        - g(pts[:, 0] - step, PARAMS)) / (2 * step))
        assert np.allclose(p1, fd1, rtol=1e-4, atol=1e-6)


class TestDensities:
    def test_literal_density_normalization_point(self):
        assert rho_example(1.0, -1.0) == 1.0
        assert rho_example_symmetric(1.0, -1.0) == math.exp(-2.0)

    def test_gradients_match_finite_differences(self):
        for dens in (density_literal(), density_symmetric()):
            x1, x2 = 0.3, -0.7
            g1, g2 = dens.grad_rho(x1, x2)
            step = 1e-7
            fd1 = (dens.rho(x1 + step, x2) - dens.rho(x1 - step, x2)) / (2 * step)
            fd2 = (dens.rho(x1, x2 + step) - dens.rho(x1, x2 - step)) / (2 * step)
            assert g1 == pytest.approx(fd1, rel=1e-6)
            assert g2 == pytest.approx(fd2, rel=1e-6)


class TestGainConstructions:
    def test_interconnection_gain_frozen_values(self):
        gamma = interconnection_gain(PARAMS, 0.5)
        # h(r_1)/(1-delta) = 6 lands on the quadratic branch: a + 1 exactly
        assert gamma(REST[1]) == A + 1.0
        assert gamma(9.184200142419275) == pytest.approx(
            19.72735406731745, abs=1e-6)
        assert gamma(28.92340894459799) == pytest.approx(
            55.246610940095934, abs=1e-6)
        assert gamma(60.0) == pytest.approx(0.07774515131294546, rel=1e-6)
        # at the branch point the target value sits a hair below the
        # plateau top, so the preimage is poorly conditioned
        assert gamma(A) == pytest.approx(46.891207672682455, abs=5e-3)

    def test_gain_is_not_class_k(self):
        gamma = interconnection_gain(PARAMS, 0.5)
        clipped = ScalarFn(gamma.fn, 0.0, 60.0, "gamma-clipped")
        ok, pair = is_class_k(clipped, 0.5)
        assert not ok and pair is not None

    def test_decay_rate_is_class_k(self):
        alpha = decay_rate(PARAMS, 0.5)
        clipped = ScalarFn(alpha.fn, 0.0, 60.0, "alpha-clipped",
                           class_k=True)
        ok, pair = is_class_k(clipped, 0.25)
        assert ok, f"decay rate not strictly increasing near {pair}"

    def test_input_gain_scales_quadratically(self):
        gu = input_gain(PARAMS, 0.5)
        assert gu(0.0) == 0.0
        assert gu(8.0) > gu(4.0) > 0.0

    def test_delta_validation(self):
        for bad in (0.0, 1.0, -0.5, 2.0):
            with pytest.raises(ValueError):
                interconnection_gain(PARAMS, bad)
            with pytest.raises(ValueError):
                build_example_model(PARAMS, bad)

    def test_model_label_and_kernel_spec(self):
        model = build_example_model(PARAMS)
        assert model.kernel_spec is not None
        n, a, c1, w1, c2, w2 = model.kernel_spec
        assert (n, a) == (2, A)
        assert (c1, w1, c2, w2) == (25.0, 0.0, 25.0, 0.0)
