"""Unit tests for the scalar-function layer: domains, composition,
inversion, class-K checks, and subcritical-interval detection."""
import math

import pytest

from sgdens import (
    DomainError,
    ExampleParams,
    MonotonicityError,
    OutOfRangeError,
    ScalarFn,
    SgcAnalysis,
    SgcInterval,
    compose,
    find_sgc_intervals,
    identity,
    interconnection_gain,
    invert_on_interval,
    is_class_k,
)


def halve(label="half"):
    return ScalarFn(lambda s: 0.5 * s, 0.0, math.inf, label, class_k=True)


class TestScalarFn:
    def test_call_and_float_coercion(self):
        f = ScalarFn(lambda s: s * s, 0.0, 4.0, "sq")
        assert f(2) == 4.0
        assert isinstance(f(2), float)

    def test_domain_errors_carry_the_point(self):
        f = ScalarFn(lambda s: s, 1.0, 3.0, "slice")
        with pytest.raises(DomainError) as ei:
            f(0.5)
        assert "slice" in str(ei.value)
        with pytest.raises(DomainError):
            f(3.5)

    def test_endpoint_roundoff_is_tolerated(self):
        f = ScalarFn(lambda s: s, 0.0, 1.0, "unit")
        assert f(1.0 + 1e-14) == pytest.approx(1.0)
        assert f(-1e-14) == pytest.approx(0.0, abs=1e-13)

    def test_identity_and_compose(self):
        ident = identity(10.0)
        assert ident(7.0) == 7.0
        double = ScalarFn(lambda s: 2.0 * s, 0.0, 20.0, "double",
                          class_k=True)
        shift = ScalarFn(lambda s: s + 1.0, 0.0, 5.0, "shift")
        c = compose(double, shift)
        assert c(2.0) == 6.0
        assert (c.lo, c.hi) == (shift.lo, shift.hi)
        assert not c.class_k  # shift is not flagged class-K
        assert compose(double, ident).class_k

    def test_compose_range_escape_raises_at_evaluation(self):
        narrow = ScalarFn(lambda s: s, 0.0, 1.0, "narrow")
        wide = ScalarFn(lambda s: 3.0 * s, 0.0, 2.0, "triple")
        c = compose(narrow, wide)
        with pytest.raises(DomainError):
            c(1.0)  # triple(1.0) = 3.0 leaves narrow's domain


class TestInvertOnInterval:
    def test_square_root_by_bisection(self):
        f = ScalarFn(lambda s: s * s, 0.0, 10.0, "sq")
        x = invert_on_interval(f, (0.0, 4.0), 9.0)
        assert x == pytest.approx(3.0, abs=1e-8)

    def test_target_outside_range(self):
        f = ScalarFn(lambda s: s * s, 0.0, 10.0, "sq")
        with pytest.raises(OutOfRangeError):
            invert_on_interval(f, (0.0, 4.0), 100.0)

    def test_decreasing_function_rejected(self):
        f = ScalarFn(lambda s: -s, 0.0, 10.0, "neg")
        with pytest.raises(MonotonicityError):
            invert_on_interval(f, (1.0, 5.0), -2.0)

    def test_interior_bump_rejected(self):
        # a midpoint sample lands above both bracket values -> not monotone
        f = ScalarFn(lambda s: s + 8.0 * math.exp(-(s - 3.0) ** 2),
                     0.0, 20.0, "bumpy")
        with pytest.raises(MonotonicityError):
            invert_on_interval(f, (0.0, 12.0), 6.0)

    def test_reversed_interval_rejected(self):
        f = ScalarFn(lambda s: s, 0.0, 10.0, "id")
        with pytest.raises(ValueError):
            invert_on_interval(f, (5.0, 1.0), 2.0)


class TestIsClassK:
    def test_strictly_increasing_from_zero(self):
        ok, pair = is_class_k(ScalarFn(lambda s: s * s, 0.0, 3.0, "sq"), 0.1)
        assert ok and pair is None

    def test_nonzero_at_origin(self):
        ok, pair = is_class_k(ScalarFn(lambda s: s + 1.0, 0.0, 3.0, "aff"), 0.1)
        assert not ok
        assert pair == (0.0, 0.0)

    def test_decrease_reports_the_offending_pair(self):
        f = ScalarFn(lambda s: math.sin(s), 0.0, 3.0, "sin")
        ok, pair = is_class_k(f, 0.1)
        assert not ok
        lo, hi = pair
        assert f(hi) <= f(lo)
        assert lo < hi <= 3.0

    def test_requires_finite_domain_and_positive_step(self):
        with pytest.raises(ValueError):
            is_class_k(ScalarFn(lambda s: s, 0.0, math.inf, "id"), 0.1)
        with pytest.raises(ValueError):
            is_class_k(ScalarFn(lambda s: s, 0.0, 1.0, "id"), 0.0)


class TestSgcAnalysis:
    def test_round_trip_preserves_right_open(self):
        an = SgcAnalysis(
            (SgcInterval(0.0, 1.0), SgcInterval(2.0, 3.0, True)),
            scan_bound=3.0, grid_step=0.01)
        d = an.to_dict()
        assert d["schema_version"] == "1"
        back = SgcAnalysis.from_dict(d)
        assert back.intervals == an.intervals
        assert back.scan_bound == 3.0 and back.grid_step == 0.01

    def test_reversed_interval_rejected(self):
        with pytest.raises(ValueError):
            SgcAnalysis((SgcInterval(2.0, 1.0),), 3.0, 0.01)

    def test_overlapping_intervals_rejected(self):
        with pytest.raises(ValueError):
            SgcAnalysis((SgcInterval(0.0, 2.0), SgcInterval(1.0, 3.0)),
                        3.0, 0.01)


class TestFindSgcIntervals:
    def test_subcritical_everywhere(self):
        an = find_sgc_intervals(halve(), halve(), 8.0)
        assert len(an.intervals) == 1
        iv = an.intervals[0]
        # the composed gain is s/4 < s except at 0, which is excluded
        assert 0.0 < iv.lo <= an.grid_step
        assert iv.hi == 8.0 and iv.right_open

    def test_supercritical_everywhere_is_empty_not_an_error(self):
        double = ScalarFn(lambda s: 2.0 * s, 0.0, math.inf, "double")
        an = find_sgc_intervals(double, double, 8.0)
        assert an.intervals == ()

    def test_known_crossing_point(self):
        # composed gain (s^2/2)^2/2 = s^4/8 crosses s at s = 2
        quad = ScalarFn(lambda s: 0.5 * s * s, 0.0, math.inf, "halfsq")
        an = find_sgc_intervals(quad, quad, 5.0, grid_step=0.01)
        assert len(an.intervals) == 1
        iv = an.intervals[0]
        assert iv.hi == pytest.approx(2.0, abs=1e-6)
        assert not iv.right_open

    def test_grid_point_exactly_on_the_boundary_is_excluded(self):
        quad = ScalarFn(lambda s: 0.5 * s * s, 0.0, math.inf, "halfsq")
        an = find_sgc_intervals(quad, quad, 4.0, grid_step=0.5)
        iv = an.intervals[0]
        assert iv.hi <= 2.0 + 1e-9

    def test_invalid_scan_parameters(self):
        with pytest.raises(ValueError):
            find_sgc_intervals(halve(), halve(), 0.0)
        with pytest.raises(ValueError):
            find_sgc_intervals(halve(), halve(), 1.0, grid_step=-0.1)

    def test_staircase_coupling_boundaries(self):
        # Loop-gain scan of the worked interconnection: two subcritical
        # stretches with boundaries pinned by an independent computation.
        gamma = interconnection_gain(ExampleParams(n=2), 0.5)
        an = find_sgc_intervals(gamma, gamma, 60.0)
        assert len(an.intervals) == 2
        first, second = an.intervals
        assert first.lo < 1e-6
        assert first.hi == pytest.approx(26.96651919708578, abs=1e-6)
        assert second.lo == pytest.approx(32.25111215258089, abs=1e-6)
        assert second.hi == 60.0 and second.right_open
