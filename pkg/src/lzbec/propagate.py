"""Sweep propagation and extraction of Landau-Zener transition probabilities."""

from __future__ import annotations

import logging
import math
import os
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field

import numpy as np

from . import _kernels
from .integrators import IntegrationError, IntegratorConfig, integrate
from .model import (ManyBodyState, MeanFieldState, ModelParams, build_manybody_hamiltonian,
                    hopping_couplings, interaction_energies)

log = logging.getLogger(__name__)

NORM_DRIFT_TOL = 1e-6
DEFAULT_WINDOW_FACTOR = 40.0
GRID_AXES = ("alpha", "g", "v", "n")


def energy_scale(params: ModelParams) -> float:
    return max(2.0 * abs(params.v), abs(params.g), 1.0)


@dataclass(frozen=True)
class SweepWindow:
    """Finite stand-in for t in (-inf, +inf).

    Both ends must satisfy ``|alpha t| >= window_factor * max(2v, |g|, 1)``.

    With ``dressed_ends`` (the default) the sweep starts in the instantaneous
    eigenstate that connects to the initial diabatic state, and the final
    populations are read in the instantaneous eigenbasis.  Both coincide with
    the diabatic states as t -> +-inf, but at finite |epsilon| they remove the
    O(v/epsilon) boundary oscillations that raw diabatic populations carry.
    """

    t_start: float
    t_end: float
    sample_count: int = 401
    window_factor: float = DEFAULT_WINDOW_FACTOR
    dressed_ends: bool = True

    def __post_init__(self):
        if not self.t_start < 0 < self.t_end:
            raise ValueError("window must satisfy t_start < 0 < t_end")
        if self.sample_count < 2:
            raise ValueError("need at least two samples")

    @classmethod
    def symmetric(cls, params: ModelParams, window_factor=DEFAULT_WINDOW_FACTOR,
                  sample_count=401, dressed_ends=True):
        t = window_factor * energy_scale(params) / params.alpha
        return cls(-t, t, sample_count, window_factor, dressed_ends)

    def validate(self, params: ModelParams):
        need = self.window_factor * energy_scale(params)
        # relative slack: the symmetric constructor lands on the bound exactly
        for t in (self.t_start, self.t_end):
            if abs(params.alpha * t) < need * (1 - 1e-12):
                raise ValueError(
                    f"window end t={t} too short: |alpha t| = {abs(params.alpha * t):.6g} "
                    f"< {need:.6g}"
                )

    def times(self):
        return np.linspace(self.t_start, self.t_end, self.sample_count)


@dataclass
class SweepRecord:
    kind: str
    params: ModelParams
    times: np.ndarray
    n1: np.ndarray  # mean-field: |psi1|^2, many-body: <n1>
    norm: np.ndarray
    final_state: object
    p_lz: float
    p_lz_raw: float = math.nan  # ratio of bare diabatic populations at the window ends
    steps: int = 0

    @property
    def n_particles(self):
        return 1 if self.kind == "meanfield" else self.params.n

    @property
    def n1_fraction(self):
        return self.n1 / self.n_particles

    @property
    def epsilon(self):
        return self.params.alpha * self.times

    @property
    def max_norm_drift(self):
        return float(np.max(np.abs(self.norm - 1.0)))


def _check_norm(norm, times):
    drift = np.abs(norm - 1.0)
    worst = int(np.argmax(drift))
    if drift[worst] > NORM_DRIFT_TOL:
        raise IntegrationError(
            f"norm drift {drift[worst]:.3g} exceeds {NORM_DRIFT_TOL:g} at t={times[worst]:.12g}",
            float(times[worst]),
        )


def _meanfield_effective(params, t, p1):
    eps = params.alpha * t
    return np.array([[eps + params.g * p1, params.v], [params.v, -eps + params.g * (1.0 - p1)]])


def dressed_meanfield_state(params: ModelParams, t: float, tol=1e-15, max_iter=200):
    """Stationary nonlinear state at time t that is dominated by well 1.

    Self-consistent iteration on the 2x2 eigenproblem; converges quickly
    once |epsilon| dominates v and |g|.
    """
    p1 = 1.0
    vec = np.array([1.0, 0.0])
    for _ in range(max_iter):
        _, vecs = np.linalg.eigh(_meanfield_effective(params, t, p1))
        vec = vecs[:, int(np.argmax(np.abs(vecs[0])))]
        new = float(vec[0] ** 2)
        if abs(new - p1) < tol:
            break
        p1 = new
    if vec[0] < 0:
        vec = -vec
    return vec.astype(complex)


def meanfield_adiabatic_population(params: ModelParams, t: float, psi) -> float:
    """Weight of ``psi`` on the instantaneous eigenvector dominated by well 1.

    The eigenbasis is that of the linear 2x2 matrix with the nonlinear
    diagonal frozen at the current populations.
    """
    psi = np.asarray(psi)
    p1 = float(abs(psi[0]) ** 2 / np.sum(np.abs(psi) ** 2))
    _, vecs = np.linalg.eigh(_meanfield_effective(params, t, p1))
    vec = vecs[:, int(np.argmax(np.abs(vecs[0])))]
    return float(abs(np.vdot(vec, psi)) ** 2)


def integrate_meanfield(params: ModelParams, window: SweepWindow | None = None,
                        config: IntegratorConfig | None = None) -> SweepRecord:
    window = window or SweepWindow.symmetric(params)
    config = config or IntegratorConfig()
    window.validate(params)
    ts = window.times()
    a = params.alpha
    args = np.array([a, params.g, params.v])
    # interaction-picture phases: psi = exp(-+ i a t^2/2) y
    rot = np.array([-0.5j, 0.5j]) * a

    if window.dressed_ends:
        psi0 = dressed_meanfield_state(params, ts[0])
    else:
        psi0 = np.array([1.0, 0.0], dtype=complex)
    y0 = psi0 * np.exp(-rot * ts[0] ** 2)

    def rate(t):
        return 2.0 * a * abs(t) + abs(params.g) + 2.0 * abs(params.v)

    ys, steps = integrate(_kernels.meanfield_rhs_ip, args, y0, ts, config, rate)
    pops = np.abs(ys) ** 2
    norm = pops.sum(axis=1)
    _check_norm(norm, ts)
    psi = ys[-1] * np.exp(rot * ts[-1] ** 2)
    p_raw = float(pops[-1, 0] / pops[0, 0])
    if window.dressed_ends:
        p_lz = (meanfield_adiabatic_population(params, ts[-1], psi)
                / meanfield_adiabatic_population(params, ts[0], psi0))
    else:
        p_lz = p_raw
    psi = psi / math.sqrt(norm[-1])
    return SweepRecord("meanfield", params, ts, pops[:, 0], norm,
                       MeanFieldState(complex(psi[0]), complex(psi[1])), float(p_lz), p_raw, steps)


def _manybody_phases(params: ModelParams, t):
    n = params.n
    slope = 2.0 * np.arange(n + 1) - n
    return 0.5 * params.alpha * t * t * slope + interaction_energies(params) * t


def _adiabatic_basis(params: ModelParams, t):
    """Eigenvectors of H(t) (columns) and the diabatic label of each.

    Labels pair the m-th lowest eigenvalue with the m-th lowest diabatic
    level, which is exact outside all crossings.
    """
    h = build_manybody_hamiltonian(params, params.alpha * t)
    _, vecs = np.linalg.eigh(h.to_dense())
    labels = np.argsort(h.diag, kind="stable")
    return vecs, labels


def integrate_manybody(params: ModelParams, window: SweepWindow | None = None,
                       config: IntegratorConfig | None = None) -> SweepRecord:
    window = window or SweepWindow.symmetric(params)
    config = config or IntegratorConfig()
    window.validate(params)
    n = params.n
    ts = window.times()
    k = np.arange(n + 1)

    args = np.concatenate([[params.alpha, params.gbar, float(n)], hopping_couplings(params)])
    if window.dressed_ends:
        vecs, labels = _adiabatic_basis(params, ts[0])
        c0 = vecs[:, int(np.flatnonzero(labels == n)[0])].astype(complex)
        c0 *= np.sign(c0[n].real) or 1.0
    else:
        c0 = np.zeros(n + 1, dtype=complex)
        c0[n] = 1.0
    n1_start = float(n)
    y0 = c0 * np.exp(1j * _manybody_phases(params, ts[0]))

    def rate(t):
        return 2.0 * params.alpha * abs(t) + abs(params.g) + abs(params.gbar) \
            + 2.0 * abs(params.v) * math.sqrt(n)

    ys, steps = integrate(_kernels.manybody_rhs_ip, args, y0, ts, config, rate)
    pops = np.abs(ys) ** 2
    norm = pops.sum(axis=1)
    _check_norm(norm, ts)
    n1 = pops @ k
    c = ys[-1] * np.exp(-1j * _manybody_phases(params, ts[-1]))
    p_raw = float(n1[-1] / n1[0])
    if window.dressed_ends:
        vecs, labels = _adiabatic_basis(params, ts[-1])
        weights = np.abs(vecs.T @ c) ** 2
        p_lz = float(weights @ labels) / n1_start
    else:
        p_lz = p_raw
    final = ManyBodyState(c / math.sqrt(norm[-1]))
    return SweepRecord("manybody", params, ts, n1, norm, final, p_lz, p_raw, steps)


def expectation_n1(state) -> float:
    """Mean occupation of well 1, sum_k k |c_k|^2."""
    coeffs = state.coeffs if isinstance(state, ManyBodyState) else np.asarray(state)
    k = np.arange(len(coeffs))
    return float(np.sum(k * np.abs(coeffs) ** 2))


@dataclass
class GridPoint:
    value: float
    p_lz_mf: float = math.nan
    p_lz_mp: float = math.nan
    error: str | None = None
    extra: dict = field(default_factory=dict)

    @property
    def ok(self):
        return self.error is None


def _with_axis(params: ModelParams, axis, value):
    if axis == "n":
        # g is held fixed; gbar follows
        return params.replace(n=int(value))
    return params.replace(**{axis: value})


def _grid_worker(job):
    params, axis, value, window_factor, sample_count, config, kinds = job
    point = GridPoint(value)
    try:
        p = _with_axis(params, axis, value)
        if "meanfield" in kinds:
            w = SweepWindow.symmetric(p, window_factor, sample_count)
            point.p_lz_mf = integrate_meanfield(p, w, config).p_lz
        if "manybody" in kinds:
            w = SweepWindow.symmetric(p, window_factor, sample_count)
            point.p_lz_mp = integrate_manybody(p, w, config).p_lz
    except (IntegrationError, ValueError) as exc:
        point.error = f"{type(exc).__name__}: {exc}"
    return point


def default_jobs():
    env = os.environ.get("LZBEC_JOBS")
    if env:
        return max(1, int(env))
    return os.cpu_count() or 1


def run_sweep_grid(params: ModelParams, axis: str, values, window_factor=DEFAULT_WINDOW_FACTOR,
                   config: IntegratorConfig | None = None, jobs=1,
                   kinds=("meanfield", "manybody"), sample_count=2):
    """Transition probabilities over a 1-D parameter grid.

    Points are independent; with ``jobs > 1`` they run in worker processes.
    Results are returned in input order.  A failed point keeps its slot with
    NaN probabilities and ``error`` set.
    """
    if axis not in GRID_AXES:
        raise ValueError(f"axis must be one of {GRID_AXES}, got {axis!r}")
    config = config or IntegratorConfig()
    jobs_list = [(params, axis, v, window_factor, sample_count, config, tuple(kinds))
                 for v in values]
    if jobs <= 1 or len(jobs_list) <= 1:
        return [_grid_worker(j) for j in jobs_list]
    with ProcessPoolExecutor(max_workers=jobs) as pool:
        return list(pool.map(_grid_worker, jobs_list))
