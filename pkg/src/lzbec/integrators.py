"""Compiled Runge-Kutta kernels for complex linear and weakly nonlinear ODEs.

All right-hand sides are numba functions with signature
``rhs(t, y, args, out)`` that write ``dy/dt`` into ``out``.  The sweeps here
run for 1e5-1e7 steps, so the stepping loop itself must be compiled.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np
from numba import njit

ADAPTIVE = "dopri5"
FIXED_RK4 = "rk4"
METHODS = (ADAPTIVE, FIXED_RK4)

# status codes returned by the kernels
OK = 0
STEP_UNDERFLOW = 1
MAX_STEPS = 2


class IntegrationError(RuntimeError):
    """Raised when a propagation fails; ``t_fail`` is the time of failure."""

    def __init__(self, msg, t_fail=None):
        super().__init__(msg)
        self.t_fail = t_fail


@dataclass(frozen=True)
class IntegratorConfig:
    rel_tol: float = 1e-12
    abs_tol: float = 1e-12
    max_step: float = math.inf
    method: str = ADAPTIVE
    fixed_steps_per_unit: float = 40.0  # rk4 only: steps per unit of accumulated phase
    max_steps: int = 200_000_000

    def __post_init__(self):
        if not (self.rel_tol > 0 and self.abs_tol > 0):
            raise ValueError("integrator tolerances must be > 0")
        if self.method not in METHODS:
            raise ValueError(f"unknown method {self.method!r}; choose from {METHODS}")
        if not self.max_step > 0:
            raise ValueError("max_step must be > 0")


# Dormand-Prince 5(4) tableau
_C2, _C3, _C4, _C5 = 1 / 5, 3 / 10, 4 / 5, 8 / 9
_A21 = 1 / 5
_A31, _A32 = 3 / 40, 9 / 40
_A41, _A42, _A43 = 44 / 45, -56 / 15, 32 / 9
_A51, _A52, _A53, _A54 = 19372 / 6561, -25360 / 2187, 64448 / 6561, -212 / 729
_A61, _A62, _A63, _A64, _A65 = 9017 / 3168, -355 / 33, 46732 / 5247, 49 / 176, -5103 / 18656
_B1, _B3, _B4, _B5, _B6 = 35 / 384, 500 / 1113, 125 / 192, -2187 / 6784, 11 / 84
# 5th minus 4th order weights
_E1 = 71 / 57600
_E3 = -71 / 16695
_E4 = 71 / 1920
_E5 = -17253 / 339200
_E6 = 22 / 525
_E7 = -1 / 40


@njit(cache=True)
def _dopri5(rhs, args, y0, sample_times, rtol, atol, max_step, h_init, max_steps):
    n = y0.shape[0]
    ns = sample_times.shape[0]
    out = np.empty((ns, n), dtype=np.complex128)
    y = y0.copy()
    t = sample_times[0]
    out[0, :] = y
    k1 = np.empty(n, dtype=np.complex128)
    k2 = np.empty_like(k1)
    k3 = np.empty_like(k1)
    k4 = np.empty_like(k1)
    k5 = np.empty_like(k1)
    k6 = np.empty_like(k1)
    k7 = np.empty_like(k1)
    ytmp = np.empty_like(k1)
    ynew = np.empty_like(k1)
    rhs(t, y, args, k1)
    h = h_init
    steps = 0
    for j in range(1, ns):
        target = sample_times[j]
        while t < target:
            if steps >= max_steps:
                return out, MAX_STEPS, t, steps
            last = False
            if h > max_step:
                h = max_step
            if t + h >= target:
                h = target - t
                last = True
            if h < 1e-14 * max(1.0, abs(t)):
                return out, STEP_UNDERFLOW, t, steps
            for i in range(n):
                ytmp[i] = y[i] + h * _A21 * k1[i]
            rhs(t + _C2 * h, ytmp, args, k2)
            for i in range(n):
                ytmp[i] = y[i] + h * (_A31 * k1[i] + _A32 * k2[i])
            rhs(t + _C3 * h, ytmp, args, k3)
            for i in range(n):
                ytmp[i] = y[i] + h * (_A41 * k1[i] + _A42 * k2[i] + _A43 * k3[i])
            rhs(t + _C4 * h, ytmp, args, k4)
            for i in range(n):
                ytmp[i] = y[i] + h * (_A51 * k1[i] + _A52 * k2[i] + _A53 * k3[i] + _A54 * k4[i])
            rhs(t + _C5 * h, ytmp, args, k5)
            for i in range(n):
                ytmp[i] = y[i] + h * (_A61 * k1[i] + _A62 * k2[i] + _A63 * k3[i]
                                      + _A64 * k4[i] + _A65 * k5[i])
            rhs(t + h, ytmp, args, k6)
            for i in range(n):
                ynew[i] = y[i] + h * (_B1 * k1[i] + _B3 * k3[i] + _B4 * k4[i]
                                      + _B5 * k5[i] + _B6 * k6[i])
            t_new = target if last else t + h
            rhs(t_new, ynew, args, k7)
            err = 0.0
            for i in range(n):
                e = h * (_E1 * k1[i] + _E3 * k3[i] + _E4 * k4[i] + _E5 * k5[i]
                         + _E6 * k6[i] + _E7 * k7[i])
                sc = atol + rtol * max(abs(y[i]), abs(ynew[i]))
                r = abs(e) / sc
                err += r * r
            err = math.sqrt(err / n)
            steps += 1
            if err <= 1.0:
                t = t_new
                for i in range(n):
                    y[i] = ynew[i]
                    k1[i] = k7[i]
                if err == 0.0:
                    fac = 5.0
                else:
                    fac = min(5.0, max(0.2, 0.9 * err ** -0.2))
                if not last:
                    h = h * fac
            else:
                h = h * max(0.2, 0.9 * err ** -0.2)
        out[j, :] = y
    return out, OK, t, steps


@njit(cache=True)
def _rk4(rhs, args, y0, sample_times, steps_per_sample):
    n = y0.shape[0]
    ns = sample_times.shape[0]
    out = np.empty((ns, n), dtype=np.complex128)
    y = y0.copy()
    out[0, :] = y
    k1 = np.empty(n, dtype=np.complex128)
    k2 = np.empty_like(k1)
    k3 = np.empty_like(k1)
    k4 = np.empty_like(k1)
    ytmp = np.empty_like(k1)
    total = 0
    for j in range(1, ns):
        t0 = sample_times[j - 1]
        m = steps_per_sample[j - 1]
        h = (sample_times[j] - t0) / m
        for s in range(m):
            t = t0 + s * h
            rhs(t, y, args, k1)
            for i in range(n):
                ytmp[i] = y[i] + 0.5 * h * k1[i]
            rhs(t + 0.5 * h, ytmp, args, k2)
            for i in range(n):
                ytmp[i] = y[i] + 0.5 * h * k2[i]
            rhs(t + 0.5 * h, ytmp, args, k3)
            for i in range(n):
                ytmp[i] = y[i] + h * k3[i]
            rhs(t + h, ytmp, args, k4)
            for i in range(n):
                y[i] = y[i] + h / 6.0 * (k1[i] + 2.0 * k2[i] + 2.0 * k3[i] + k4[i])
        total += m
        out[j, :] = y
    return out, OK, sample_times[ns - 1], total


def integrate(rhs, args, y0, sample_times, config: IntegratorConfig, rate=None):
    """Propagate ``y0`` through ``sample_times`` and return the states there.

    ``rate(t)`` bounds the fastest oscillation frequency at time ``t``; the
    fixed-step method uses it to place ``fixed_steps_per_unit`` steps per
    radian of accumulated phase.
    """
    y0 = np.ascontiguousarray(y0, dtype=np.complex128)
    ts = np.ascontiguousarray(sample_times, dtype=np.float64)
    if ts.ndim != 1 or len(ts) < 2 or np.any(np.diff(ts) <= 0):
        raise ValueError("sample_times must be strictly increasing with at least two entries")
    if config.method == ADAPTIVE:
        h0 = min(1e-3, (ts[-1] - ts[0]) / 10)
        max_step = config.max_step if math.isfinite(config.max_step) else ts[-1] - ts[0]
        out, status, t_end, steps = _dopri5(
            rhs, args, y0, ts, config.rel_tol, config.abs_tol, max_step, h0, config.max_steps
        )
    else:
        if rate is None:
            raise ValueError("fixed-step integration needs a rate bound")
        # rates here are convex in t, so the interval maximum sits at an end
        ends = np.array([rate(t) for t in ts])
        mids = np.array([rate(t) for t in 0.5 * (ts[1:] + ts[:-1])])
        phase = np.maximum(np.maximum(ends[1:], ends[:-1]), mids) * np.diff(ts)
        counts = np.maximum(1, np.ceil(phase * config.fixed_steps_per_unit)).astype(np.int64)
        out, status, t_end, steps = _rk4(rhs, args, y0, ts, counts)
    if status == STEP_UNDERFLOW:
        raise IntegrationError(f"step size underflow at t={t_end:.12g}", t_end)
    if status == MAX_STEPS:
        raise IntegrationError(f"step limit {config.max_steps} reached at t={t_end:.12g}", t_end)
    return out, steps
