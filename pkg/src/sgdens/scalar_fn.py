"""Scalar comparison functions: evaluation, composition, inversion, and
detection of the intervals where the small-gain condition holds.

A :class:`ScalarFn` wraps a real function of one real variable together with
its domain ``[lo, hi]`` (``lo >= 0``; ``hi`` is a finite scan bound standing in
for an unbounded right end).  :func:`find_sgc_intervals` scans the loop-gain
defect ``phi(s) = gamma12(gamma21(s)) - s`` for sign and returns the maximal
intervals with ``phi < 0``, with every boundary refined by bisection.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Callable, Optional

from ._jsonio import SCHEMA_VERSION

DEFAULT_REFINE_TOL = 1e-9
DEFAULT_FN_TOL = 1e-9


class DomainError(ValueError):
    """Evaluation was requested outside a ScalarFn's domain."""

    def __init__(self, label: str, x: float, lo: float, hi: float):
        super().__init__(f"{label}: point {x!r} outside domain [{lo!r}, {hi!r}]")
        self.point = x


class OutOfRangeError(ValueError):
    """Target value outside [f(lo), f(hi)] in invert_on_interval."""


class MonotonicityError(ValueError):
    """A bracket sample violated the assumed monotone increase."""


@dataclass(frozen=True)
class ScalarFn:
    """An evaluable real-valued function of one real variable with a domain.

    ``fn`` must be defined and finite on ``[lo, hi]``.  Instances are immutable
    and safe to share between threads.
    """

    fn: Callable[[float], float]
    lo: float = 0.0
    hi: float = math.inf
    label: str = "f"
    class_k: bool = False

    def __call__(self, x: float) -> float:
        x = float(x)
        # tiny slack so roundoff at the ends does not spuriously reject
        pad = 1e-12 * (1.0 + abs(self.lo) + abs(self.hi if math.isfinite(self.hi) else 0.0))
        if x < self.lo - pad or x > self.hi + pad:
            raise DomainError(self.label, x, self.lo, self.hi)
        return float(self.fn(x))


def identity(hi: float = math.inf) -> ScalarFn:
    return ScalarFn(lambda s: s, 0.0, hi, "id", class_k=True)


def compose(f: ScalarFn, g: ScalarFn) -> ScalarFn:
    """Return ``s -> f(g(s))`` on the domain of ``g``.

    Range containment is not pre-verified symbolically; a value of ``g``
    falling outside the domain of ``f`` raises :class:`DomainError` carrying
    the offending point at evaluation time.
    """

    def fn(s: float) -> float:
        return f(g(s))

    return ScalarFn(fn, g.lo, g.hi, f"{f.label}({g.label})",
                    class_k=f.class_k and g.class_k)


def invert_on_interval(f: ScalarFn, interval: tuple, y: float,
                       tol: float = DEFAULT_REFINE_TOL) -> float:
    """Solve ``f(x) = y`` for x in ``interval`` by bisection.

    ``f`` must be (weakly sampled) increasing on the interval; the bracket is
    halved each iteration until ``|f(x) - y| <= tol``.  Raises
    :class:`OutOfRangeError` when y is not within [f(lo), f(hi)], and
    :class:`MonotonicityError` when a midpoint sample falls outside the
    bracket's value range.
    """
    lo, hi = float(interval[0]), float(interval[1])
    if hi < lo:
        raise ValueError(f"empty interval ({lo!r}, {hi!r})")
    f_lo, f_hi = f(lo), f(hi)
    if f_hi < f_lo:
        raise MonotonicityError(
            f"{f.label}: f({lo!r})={f_lo!r} > f({hi!r})={f_hi!r}")
    if not (f_lo - tol <= y <= f_hi + tol):
        raise OutOfRangeError(
            f"{f.label}: target {y!r} outside [{f_lo!r}, {f_hi!r}]")
    for _ in range(500):
        mid = 0.5 * (lo + hi)
        f_mid = f(mid)
        if f_mid < f_lo - tol or f_mid > f_hi + tol:
            raise MonotonicityError(
                f"{f.label}: f({mid!r})={f_mid!r} outside bracket values")
        if abs(f_mid - y) <= tol:
            return mid
        if f_mid < y:
            lo, f_lo = mid, f_mid
        else:
            hi, f_hi = mid, f_mid
        if hi - lo <= 1e-17 * (1.0 + abs(lo)):
            return 0.5 * (lo + hi)
    return 0.5 * (lo + hi)


def is_class_k(f: ScalarFn, grid_step: float,
               tol: float = DEFAULT_FN_TOL):
    """Check f(0) ~ 0 and strict increase across consecutive grid samples.

    Returns ``(True, None)`` or ``(False, (s_prev, s_next))`` with the first
    violating pair.  The grid covers the ScalarFn's domain (a finite ``hi`` is
    required).
    """
    if grid_step <= 0:
        raise ValueError("grid_step must be positive")
    if not math.isfinite(f.hi):
        raise ValueError("is_class_k needs a finite domain upper end")
    if abs(f(f.lo)) > tol or f.lo > tol:
        return False, (f.lo, f.lo)
    n = max(2, int(math.ceil((f.hi - f.lo) / grid_step)) + 1)
    prev_s = f.lo
    prev_v = f(prev_s)
    for i in range(1, n):
        s = min(f.lo + i * grid_step, f.hi)
        v = f(s)
        if v <= prev_v:
            return False, (prev_s, s)
        prev_s, prev_v = s, v
        if s >= f.hi:
            break
    return True, None


@dataclass(frozen=True)
class SgcInterval:
    lo: float
    hi: float
    right_open: bool = False


@dataclass(frozen=True)
class SgcAnalysis:
    """Ordered, disjoint intervals on which the small-gain condition holds,
    with the scan metadata needed to reproduce them."""

    intervals: tuple
    scan_bound: float
    grid_step: float
    refine_tol: float = DEFAULT_REFINE_TOL
    tol: float = DEFAULT_FN_TOL

    def __post_init__(self):
        prev_hi = -math.inf
        for iv in self.intervals:
            if iv.hi < iv.lo:
                raise ValueError(f"interval ({iv.lo!r}, {iv.hi!r}) reversed")
            if iv.lo < prev_hi:
                raise ValueError("intervals overlap or are out of order")
            prev_hi = iv.hi

    def to_dict(self) -> dict:
        return {
            "schema_version": SCHEMA_VERSION,
            "intervals": [
                {"lo": iv.lo, "hi": iv.hi, "right_open": iv.right_open}
                for iv in self.intervals
            ],
            "scan_bound": self.scan_bound,
            "grid_step": self.grid_step,
            "refine_tol": self.refine_tol,
        }

    @classmethod
    def from_dict(cls, d: dict) -> "SgcAnalysis":
        ivs = tuple(
            SgcInterval(float(e["lo"]), float(e["hi"]), bool(e["right_open"]))
            for e in d["intervals"]
        )
        return cls(ivs, float(d["scan_bound"]), float(d["grid_step"]),
                   float(d.get("refine_tol", DEFAULT_REFINE_TOL)))


def _refine_boundary(phi: Callable[[float], float], lo: float, hi: float,
                     neg_on_right: bool, refine_tol: float) -> float:
    """Bisect a sign change of phi down to a bracket of width refine_tol.

    ``neg_on_right`` says which side of the bracket has phi < 0; the returned
    point is the bracket midpoint.
    """
    for _ in range(200):
        if hi - lo <= refine_tol:
            break
        mid = 0.5 * (lo + hi)
        if (phi(mid) < 0.0) == neg_on_right:
            hi = mid
        else:
            lo = mid
    return 0.5 * (lo + hi)


def find_sgc_intervals(gamma12: ScalarFn, gamma21: ScalarFn, scan_bound: float,
                       grid_step: Optional[float] = None,
                       refine_tol: float = DEFAULT_REFINE_TOL) -> SgcAnalysis:
    """Scan ``phi(s) = gamma12(gamma21(s)) - s`` on [0, scan_bound] and return
    the maximal intervals where phi < 0 (strict), boundaries bisection-refined.

    A grid point with phi exactly 0 is excluded from any interval.  The last
    interval is flagged right-open when phi < 0 still holds at scan_bound.
    An empty result is valid, not an error.
    """
    if scan_bound <= 0:
        raise ValueError("scan_bound must be positive")
    if grid_step is None:
        grid_step = 1e-3 * scan_bound
    if grid_step <= 0:
        raise ValueError("grid_step must be positive")

    def phi(s: float) -> float:
        return gamma12(gamma21(s)) - s

    n = int(math.ceil(scan_bound / grid_step))
    grid = [min(i * grid_step, scan_bound) for i in range(n + 1)]
    neg = [phi(s) < 0.0 for s in grid]

    intervals = []
    i = 0
    while i <= n:
        if not neg[i]:
            i += 1
            continue
        run_start = i
        while i + 1 <= n and neg[i + 1]:
            i += 1
        run_end = i
        if run_start == 0:
            lo_b = grid[0]
        else:
            lo_b = _refine_boundary(phi, grid[run_start - 1], grid[run_start],
                                    True, refine_tol)
        right_open = run_end == n
        if right_open:
            hi_b = grid[n]
        else:
            hi_b = _refine_boundary(phi, grid[run_end], grid[run_end + 1],
                                    False, refine_tol)
        intervals.append(SgcInterval(lo_b, hi_b, right_open))
        i += 1

    return SgcAnalysis(tuple(intervals), float(scan_bound), float(grid_step),
                       float(refine_tol))
