"""Adiabatic spectra, anti-crossing data, and analytic splitting profiles."""

from __future__ import annotations

import math
import warnings
from dataclasses import dataclass

import numpy as np
from scipy.optimize import minimize_scalar

from .model import ModelParams, build_manybody_hamiltonian, diabatic_level
from .tridiag import eigenvalues_by_index, eigenvalues_tridiagonal, sturm_count

XC_FIT_CONSTANT = 1.14


class RegimeError(ValueError):
    """An approximation was requested outside its regime of validity."""


class RegimeWarning(UserWarning):
    pass


@dataclass(frozen=True)
class SpectrumSlice:
    epsilon: float
    eigenvalues: np.ndarray

    @property
    def gaps(self):
        return np.diff(self.eigenvalues)


@dataclass(frozen=True)
class CrossingData:
    ell: int
    x: float
    t_cross: float
    b: float
    w: float
    p: float = math.nan


def spectrum_slice(params: ModelParams, epsilon: float) -> SpectrumSlice:
    h = build_manybody_hamiltonian(params, epsilon)
    return SpectrumSlice(float(epsilon), eigenvalues_tridiagonal(h))


def _check_ell(params, ell):
    if not 0 <= ell <= params.n - 1:
        raise IndexError(f"crossing index {ell} outside 0..{params.n - 1}")


def crossing_time(params: ModelParams, ell: int) -> float:
    """Time at which diabatic levels ``ell`` and ``N`` cross."""
    _check_ell(params, ell)
    return -params.gbar * ell / (2.0 * params.alpha)


def slope_difference(params: ModelParams, ell: int) -> float:
    _check_ell(params, ell)
    return 2.0 * params.alpha * (params.n - ell)


PAIR_RULES = ("adjacent", "nearest")


def _nearest_pair(h, energy):
    """Indices (i, j) of the two eigenvalues closest to ``energy``."""
    n = h.size
    m = sturm_count(h, energy)
    idx = [k for k in range(m - 2, m + 2) if 0 <= k < n]
    vals = eigenvalues_by_index(h, idx)
    order = np.argsort(np.abs(vals - energy), kind="stable")[:2]
    return tuple(sorted(idx[o] for o in order))


def crossing_pair(params: ModelParams, ell: int, rule: str = "adjacent"):
    """Adiabatic level indices (ascending, 0-based) that anti-cross at ``ell``.

    ``adjacent``: levels ``ell`` and ``ell + 1``.  Starting in the ground
    state, the system reaches crossing ``ell`` on adiabatic level ``ell``
    after ``ell`` diabatic passages, so this is the pair the cascade sees.
    ``nearest``: the two eigenvalues closest to the common diabatic energy
    h_N(t).  The hopping couplings (~ vN/2) exceed the diabatic spacings
    (~ |g|), so this picks the wrong pair for much of the supercritical
    range; it is kept for comparison.
    """
    if rule == "adjacent":
        _check_ell(params, ell)
        return ell, ell + 1
    if rule == "nearest":
        t = crossing_time(params, ell)
        h = build_manybody_hamiltonian(params, params.alpha * t)
        return _nearest_pair(h, diabatic_level(params, params.n, t))
    raise ValueError(f"unknown pair rule {rule!r}; choose from {PAIR_RULES}")


def splitting_at_crossing(params: ModelParams, ell: int, refine_min: bool = False,
                          rule: str = "adjacent") -> float:
    """Adiabatic level splitting at the crossing of diabatic levels ``ell`` and N.

    Evaluated at the crossing time.  With ``refine_min`` the gap of the same
    pair is minimized over a window of width |gbar|/alpha around it.
    """
    t = crossing_time(params, ell)
    i, j = crossing_pair(params, ell, rule)

    def pair_gap(tt):
        hh = build_manybody_hamiltonian(params, params.alpha * tt)
        a, b = eigenvalues_by_index(hh, [i, j])
        return b - a

    gap = pair_gap(t)
    if not refine_min or params.gbar == 0:
        return gap
    half = 0.5 * abs(params.gbar) / params.alpha
    res = minimize_scalar(pair_gap, bounds=(t - half, t + half), method="bounded",
                          options={"xatol": 1e-10 * max(1.0, half)})
    return min(gap, float(res.fun))


def splitting_profile(params: ModelParams, refine_min: bool = False, rule: str = "adjacent"):
    """Scaled indices x = l/N and splittings w_l for every crossing."""
    ells = np.arange(params.n)
    w = np.array([splitting_at_crossing(params, int(l), refine_min, rule) for l in ells])
    return ells / params.n, w


def spectrum_perturbative(params, m_z: float) -> float:
    """Second-order level E(m_z) of the subcritical spectrum at epsilon = 0."""
    v, g, n = params.v, params.g, params.n
    if not abs(m_z) <= n / 2 or (2 * m_z) % 1:
        raise ValueError(f"m_z={m_z} must be a (half-)integer in [-N/2, N/2]")
    if abs(g) >= 2 * abs(v):
        warnings.warn(f"|g|={abs(g)} >= 2v: perturbative levels are unreliable",
                      RegimeWarning, stacklevel=2)
    r = g / (2 * v)
    return 2 * v * m_z * (1 - r * m_z / (2 * n) - r * r * m_z * m_z / (4 * n * n))


def bogoliubov_frequency(params) -> float:
    arg = 4 * params.v ** 2 - 2 * params.v * params.g
    if arg < 0:
        raise ValueError(f"Bogoliubov frequency undefined: 4v^2 - 2vg = {arg} < 0")
    return math.sqrt(arg)


def critical_index(params, a: float = XC_FIT_CONSTANT) -> float:
    """Scaled crossing index below which splittings are exponentially small.

    Clamped at 0, where the fitted form would go negative near |g| = 2v.
    """
    if params.g == 0:
        raise ValueError("critical index needs g != 0")
    return max(0.0, 1.0 - a * math.sqrt(2 * params.v / abs(params.g)))


def w2_supercritical(params, x, a: float = XC_FIT_CONSTANT):
    """Piecewise-linear squared splitting: 0 below x_c, rising to omega^2 at x=1."""
    if not abs(params.g) > 2 * params.v:
        raise RegimeError(f"supercritical profile needs |g| > 2v (g={params.g}, v={params.v})")
    xc = critical_index(params, a)
    om2 = bogoliubov_frequency(params) ** 2
    x = np.asarray(x, dtype=float)
    out = np.where(x > xc, om2 * (x - xc) / (1 - xc), 0.0)
    return float(out) if out.ndim == 0 else out


SUBCRITICAL_FORMS = ("expanded", "printed")


def w_subcritical_coefficients(params, form: str = "expanded"):
    """Offset and slope of the linear subcritical splitting w0 + w1 x.

    ``expanded`` is the second-order expansion of the perturbative level
    spacing about x = 1/2, ``w0 = 2v + g/2 - 3g^2/(32v)``.  ``printed`` keeps
    the published constant term ``(16v^2 + 4g - 3g^2/4)/(8v)``, whose ``4g``
    is dimensionally inconsistent and lies far below the exact splittings.
    Both share ``w1 = 3g^2/(8v) - g`` and agree at g = 0.
    """
    v, g = params.v, params.g
    if form == "expanded":
        w0 = (16 * v * v + 4 * g * v - 0.75 * g * g) / (8 * v)
    elif form == "printed":
        w0 = (16 * v * v + 4 * g - 0.75 * g * g) / (8 * v)
    else:
        raise ValueError(f"unknown form {form!r}; choose from {SUBCRITICAL_FORMS}")
    w1 = 3 * g * g / (8 * v) - g
    return w0, w1


def w_subcritical(params, x, form: str = "expanded"):
    """Linear-in-x splitting of the subcritical regime."""
    if abs(params.g) > 2 * params.v:
        raise RegimeError(f"subcritical profile needs |g| <= 2v (g={params.g}, v={params.v})")
    w0, w1 = w_subcritical_coefficients(params, form)
    x = np.asarray(x, dtype=float)
    out = w0 + w1 * x
    return float(out) if out.ndim == 0 else out
