"""Hot numerical kernels: scalar field evaluation and fixed-step RK4 loops.

Two interchangeable backends:

* numba ``@njit`` kernels (default when numba imports cleanly), parallelized
  over sweep cells;
* a pure-numpy vectorized fallback, selected by setting ``SGDENS_NO_NUMBA=1``
  in the environment (or automatically when numba is unavailable).

Both backends implement identical arithmetic; ``sgdens.bench`` compares them.
"""
from __future__ import annotations

import math
import os

import numpy as np

_PI2 = math.pi * math.pi

_flag = os.environ.get("SGDENS_NO_NUMBA", "").strip().lower()
try:
    if _flag in {"1", "true", "yes", "on"}:
        raise ImportError("numba disabled by SGDENS_NO_NUMBA")
    from numba import njit, prange
    HAVE_NUMBA = True
except ImportError:
    HAVE_NUMBA = False
    prange = range

    def njit(*args, **kwargs):
        if args and callable(args[0]):
            return args[0]

        def wrap(fn):
            return fn

        return wrap


@njit(cache=True)
def g_scalar(r: float, n: int, a: float) -> float:
    """Saturating staircase: tanh ramp plus n unit steps, quadratic beyond a.

    Implemented as sign(r) * (value at |r|) so the odd symmetry is exact in
    floating point.
    """
    if r == 0.0:
        return 0.0
    s = 1.0 if r > 0.0 else -1.0
    ar = abs(r)
    if ar <= a:
        out = math.tanh(2.0 * ar)
        for i in range(1, n + 1):
            out += 1.0 + math.tanh(2.0 * (ar - 2.0 * _PI2 * i))
        return s * out
    return s * ((2.0 * n + 1.0) + (ar - a) * (ar - a))


@njit(cache=True)
def g_prime_scalar(r: float, n: int, a: float) -> float:
    """Derivative of g away from the corner at |r| = a (even in r)."""
    ar = abs(r)
    if ar <= a:
        c = math.cosh(2.0 * ar)
        out = 2.0 / (c * c)
        for i in range(1, n + 1):
            ci = math.cosh(2.0 * (ar - 2.0 * _PI2 * i))
            out += 2.0 / (ci * ci)
        return out
    return 2.0 * (ar - a)


@njit(cache=True)
def h_scalar(r: float, n: int) -> float:
    """Nonnegative oscillation with amplified maxima at 2*pi^2*k + pi^2."""
    acc = 1.0
    for i in range(1, n + 1):
        acc += math.tanh(r - 2.0 * _PI2 * i) + 1.0
    sn = math.sin(r / (2.0 * math.pi))
    return sn * sn * acc


@njit(cache=True)
def rhs_scalar(x1: float, x2: float, n: int, a: float,
               c1: float, w1: float, c2: float, w2: float):
    """Coupled dynamics: dx_i = -c_i g(x_i) + 25 h(x_other) + w_i."""
    d1 = -c1 * g_scalar(x1, n, a) + 25.0 * h_scalar(x2, n) + w1
    d2 = -c2 * g_scalar(x2, n, a) + 25.0 * h_scalar(x1, n) + w2
    return d1, d2


@njit(cache=True)
def rk4_path(x10: float, x20: float, n: int, a: float,
             c1: float, w1: float, c2: float, w2: float,
             dt: float, nsteps: int, escape_bound: float):
    """Fixed-step RK4 trajectory; returns (states, n_done, escaped).

    states has nsteps+1 rows; on escape (norm above escape_bound or
    non-finite) the remaining rows repeat the last valid state and n_done
    marks the truncation index.
    """
    states = np.empty((nsteps + 1, 2))
    states[0, 0] = x10
    states[0, 1] = x20
    x1, x2 = x10, x20
    escaped = False
    n_done = nsteps
    for s in range(nsteps):
        k11, k12 = rhs_scalar(x1, x2, n, a, c1, w1, c2, w2)
        a1, a2 = x1 + 0.5 * dt * k11, x2 + 0.5 * dt * k12
        k21, k22 = rhs_scalar(a1, a2, n, a, c1, w1, c2, w2)
        b1, b2 = x1 + 0.5 * dt * k21, x2 + 0.5 * dt * k22
        k31, k32 = rhs_scalar(b1, b2, n, a, c1, w1, c2, w2)
        c1_, c2_ = x1 + dt * k31, x2 + dt * k32
        k41, k42 = rhs_scalar(c1_, c2_, n, a, c1, w1, c2, w2)
        x1 = x1 + dt / 6.0 * (k11 + 2.0 * k21 + 2.0 * k31 + k41)
        x2 = x2 + dt / 6.0 * (k12 + 2.0 * k22 + 2.0 * k32 + k42)
        nrm = math.hypot(x1, x2)
        if not (nrm <= escape_bound):
            escaped = True
            n_done = s
            for t in range(s + 1, nsteps + 1):
                states[t, 0] = states[s, 0]
                states[t, 1] = states[s, 1]
            break
        states[s + 1, 0] = x1
        states[s + 1, 1] = x2
    return states, n_done, escaped


@njit(cache=True, parallel=True)
def rk4_sweep_stats(x10, x20, n: int, a: float,
                    c1: float, w1: float, c2: float, w2: float,
                    dt: float, nsteps: int, win_start: int,
                    eq, conv_tol: float, escape_bound: float,
                    early_stop: bool):
    """Integrate a batch of initial conditions, keeping only per-cell stats.

    Returns an (m, 5 + n_eq) array per cell:
    [x1_final, x2_final, window_max_norm, escaped, frozen,
     window_max_dist_to_eq_0, ...].

    A cell freezes early (before the stats window) once
    dist_to_nearest_eq + 2*|f|_1*t_remaining < 0.5*conv_tol, i.e. the
    remaining motion cannot push it outside half the classification
    tolerance; its stats are then the frozen point's.
    """
    m = x10.size
    ne = eq.shape[0]
    out = np.zeros((m, 5 + ne))
    for idx in prange(m):
        x1 = x10[idx]
        x2 = x20[idx]
        winmax = 0.0
        escaped = 0.0
        frozen = 0.0
        dmax = np.zeros(ne)
        in_window = False
        for s in range(nsteps):
            k11, k12 = rhs_scalar(x1, x2, n, a, c1, w1, c2, w2)
            a1, a2 = x1 + 0.5 * dt * k11, x2 + 0.5 * dt * k12
            k21, k22 = rhs_scalar(a1, a2, n, a, c1, w1, c2, w2)
            b1, b2 = x1 + 0.5 * dt * k21, x2 + 0.5 * dt * k22
            k31, k32 = rhs_scalar(b1, b2, n, a, c1, w1, c2, w2)
            c1_, c2_ = x1 + dt * k31, x2 + dt * k32
            k41, k42 = rhs_scalar(c1_, c2_, n, a, c1, w1, c2, w2)
            x1 = x1 + dt / 6.0 * (k11 + 2.0 * k21 + 2.0 * k31 + k41)
            x2 = x2 + dt / 6.0 * (k12 + 2.0 * k22 + 2.0 * k32 + k42)
            nrm = math.hypot(x1, x2)
            if not (nrm <= escape_bound):
                escaped = 1.0
                break
            if s + 1 >= win_start:
                in_window = True
                if nrm > winmax:
                    winmax = nrm
                for j in range(ne):
                    d = math.hypot(x1 - eq[j, 0], x2 - eq[j, 1])
                    if d > dmax[j]:
                        dmax[j] = d
            elif early_stop:
                best = 1e300
                for j in range(ne):
                    d = math.hypot(x1 - eq[j, 0], x2 - eq[j, 1])
                    if d < best:
                        best = d
                f1a, f2a = rhs_scalar(x1, x2, n, a, c1, w1, c2, w2)
                rem = (nsteps - (s + 1)) * dt
                if best + 2.0 * (abs(f1a) + abs(f2a)) * rem < 0.5 * conv_tol:
                    frozen = 1.0
                    break
        if escaped == 0.0 and (frozen == 1.0 or not in_window):
            winmax = math.hypot(x1, x2)
            for j in range(ne):
                dmax[j] = math.hypot(x1 - eq[j, 0], x2 - eq[j, 1])
        out[idx, 0] = x1
        out[idx, 1] = x2
        out[idx, 2] = winmax
        out[idx, 3] = escaped
        out[idx, 4] = frozen
        for j in range(ne):
            out[idx, 5 + j] = dmax[j]
    return out


# ----------------------------------------------------------------- numpy path
def _g_arr(r, n, a):
    r = np.asarray(r, dtype=float)
    s = np.sign(r)
    ar = np.abs(r)
    inner = np.tanh(2.0 * ar)
    for i in range(1, n + 1):
        inner = inner + 1.0 + np.tanh(2.0 * (ar - 2.0 * _PI2 * i))
    outer = (2.0 * n + 1.0) + (ar - a) ** 2
    return s * np.where(ar <= a, inner, outer)


def _h_arr(r, n):
    r = np.asarray(r, dtype=float)
    acc = np.ones_like(r)
    for i in range(1, n + 1):
        acc = acc + np.tanh(r - 2.0 * _PI2 * i) + 1.0
    sn = np.sin(r / (2.0 * math.pi))
    return sn * sn * acc


def _gp_arr(r, n, a):
    r = np.asarray(r, dtype=float)
    ar = np.abs(r)
    inner = 2.0 / np.cosh(np.minimum(2.0 * ar, 700.0)) ** 2
    for i in range(1, n + 1):
        z = np.minimum(np.abs(2.0 * (ar - 2.0 * _PI2 * i)), 700.0)
        inner = inner + 2.0 / np.cosh(z) ** 2
    outer = 2.0 * (ar - a)
    return np.where(ar <= a, inner, outer)


def _rhs_arr(x1, x2, n, a, c1, w1, c2, w2):
    d1 = -c1 * _g_arr(x1, n, a) + 25.0 * _h_arr(x2, n) + w1
    d2 = -c2 * _g_arr(x2, n, a) + 25.0 * _h_arr(x1, n) + w2
    return d1, d2


def rk4_sweep_stats_numpy(x10, x20, n, a, c1, w1, c2, w2, dt, nsteps,
                          win_start, eq, conv_tol, escape_bound, early_stop):
    """Vectorized twin of :func:`rk4_sweep_stats` (same stats, same layout)."""
    x1 = np.array(x10, dtype=float)
    x2 = np.array(x20, dtype=float)
    m = x1.size
    ne = eq.shape[0]
    winmax = np.zeros(m)
    dmax = np.zeros((m, ne))
    escaped = np.zeros(m, dtype=bool)
    frozen = np.zeros(m, dtype=bool)
    in_window = False
    for s in range(nsteps):
        done = escaped | frozen
        if done.all():
            break
        k11, k12 = _rhs_arr(x1, x2, n, a, c1, w1, c2, w2)
        k21, k22 = _rhs_arr(x1 + 0.5 * dt * k11, x2 + 0.5 * dt * k12,
                            n, a, c1, w1, c2, w2)
        k31, k32 = _rhs_arr(x1 + 0.5 * dt * k21, x2 + 0.5 * dt * k22,
                            n, a, c1, w1, c2, w2)
        k41, k42 = _rhs_arr(x1 + dt * k31, x2 + dt * k32,
                            n, a, c1, w1, c2, w2)
        nx1 = x1 + dt / 6.0 * (k11 + 2.0 * k21 + 2.0 * k31 + k41)
        nx2 = x2 + dt / 6.0 * (k12 + 2.0 * k22 + 2.0 * k32 + k42)
        x1 = np.where(done, x1, nx1)
        x2 = np.where(done, x2, nx2)
        nrm = np.hypot(x1, x2)
        newly_escaped = ~done & ~(nrm <= escape_bound)
        escaped |= newly_escaped
        active = ~escaped & ~frozen
        dists = np.hypot(x1[:, None] - eq[None, :, 0],
                         x2[:, None] - eq[None, :, 1])
        if s + 1 >= win_start:
            in_window = True
            upd = active
            winmax[upd] = np.maximum(winmax[upd], nrm[upd])
            dmax[upd] = np.maximum(dmax[upd], dists[upd])
        elif early_stop and active.any():
            f1a, f2a = _rhs_arr(x1, x2, n, a, c1, w1, c2, w2)
            rem = (nsteps - (s + 1)) * dt
            best = dists.min(axis=1)
            can = active & (best + 2.0 * (np.abs(f1a) + np.abs(f2a)) * rem
                            < 0.5 * conv_tol)
            frozen |= can
    final_dists = np.hypot(x1[:, None] - eq[None, :, 0],
                           x2[:, None] - eq[None, :, 1])
    settle = ~escaped & (frozen | (not in_window))
    winmax[settle] = np.hypot(x1[settle], x2[settle])
    dmax[settle] = final_dists[settle]
    out = np.zeros((m, 5 + ne))
    out[:, 0] = x1
    out[:, 1] = x2
    out[:, 2] = winmax
    out[:, 3] = escaped.astype(float)
    out[:, 4] = frozen.astype(float)
    out[:, 5:] = dmax
    return out


def rk4_path_numpy(x10, x20, n, a, c1, w1, c2, w2, dt, nsteps, escape_bound):
    """Plain-Python twin of :func:`rk4_path` (scalar state, slow fallback)."""
    states = np.empty((nsteps + 1, 2))
    states[0] = (x10, x20)
    x1, x2 = float(x10), float(x20)
    escaped = False
    n_done = nsteps

    def rhs(p, q):
        d1 = -c1 * float(_g_arr(p, n, a)) + 25.0 * float(_h_arr(q, n)) + w1
        d2 = -c2 * float(_g_arr(q, n, a)) + 25.0 * float(_h_arr(p, n)) + w2
        return d1, d2

    for s in range(nsteps):
        k11, k12 = rhs(x1, x2)
        k21, k22 = rhs(x1 + 0.5 * dt * k11, x2 + 0.5 * dt * k12)
        k31, k32 = rhs(x1 + 0.5 * dt * k21, x2 + 0.5 * dt * k22)
        k41, k42 = rhs(x1 + dt * k31, x2 + dt * k32)
        x1 = x1 + dt / 6.0 * (k11 + 2.0 * k21 + 2.0 * k31 + k41)
        x2 = x2 + dt / 6.0 * (k12 + 2.0 * k22 + 2.0 * k32 + k42)
        nrm = math.hypot(x1, x2)
        if not (nrm <= escape_bound):
            escaped = True
            n_done = s
            states[s + 1:] = states[s]
            break
        states[s + 1] = (x1, x2)
    return states, n_done, escaped


def run_sweep_stats(*args):
    if HAVE_NUMBA:
        return rk4_sweep_stats(*args)
    return rk4_sweep_stats_numpy(*args)


def run_path(*args):
    if HAVE_NUMBA:
        return rk4_path(*args)
    return rk4_path_numpy(*args)
