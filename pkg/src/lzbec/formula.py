"""Closed-form Landau-Zener probabilities in the macroscopic limit.

Replacing the crossing sums by integrals gives

    P = int_0^1 exp[-kappa pi int_0^y w^2(x) / (2 alpha (1 - x)) dx] dy,

which has closed forms for the two analytic splitting profiles.  ``kappa``
is the gap convention of :mod:`lzbec.ica`; the published formulas are
``kappa = 1``.
"""

from __future__ import annotations

import math
import warnings
from dataclasses import dataclass

import numpy as np
from scipy import integrate

from .special import scaled_lower_gamma
from .spectrum import (XC_FIT_CONSTANT, RegimeError, bogoliubov_frequency, critical_index,
                       w_subcritical_coefficients)


@dataclass(frozen=True)
class ClosedFormInput:
    v: float
    g: float
    alpha: float
    a: float = XC_FIT_CONSTANT
    kappa: float = 1.0

    def __post_init__(self):
        if not self.alpha > 0:
            raise ValueError(f"alpha must be > 0, got {self.alpha}")
        if self.g > 0:
            raise ValueError(f"closed forms cover the attractive branch g <= 0 only, got g={self.g}")
        if not self.kappa > 0:
            raise ValueError("kappa must be > 0")

    @classmethod
    def from_params(cls, params, a=XC_FIT_CONSTANT, kappa=1.0):
        return cls(params.v, params.g, params.alpha, a, kappa)

    @property
    def regime(self):
        return "supercritical" if abs(self.g) > 2 * self.v else "subcritical"


def plz_linear(v: float, alpha: float) -> float:
    if not alpha > 0:
        raise ValueError("alpha must be > 0")
    return math.exp(-math.pi * v * v / alpha)


def supercritical_exponent(inp: ClosedFormInput) -> float:
    """u = kappa pi omega^2 / (2 alpha)."""
    return inp.kappa * math.pi * bogoliubov_frequency(inp) ** 2 / (2 * inp.alpha)


def plz_supercritical(inp: ClosedFormInput, strict: bool = True) -> float:
    """``strict=False`` also admits |g| = 2v, where x_c clamps to 0."""
    if not (abs(inp.g) > 2 * inp.v or (not strict and abs(inp.g) == 2 * inp.v)):
        raise RegimeError(f"supercritical formula needs |g| > 2v (g={inp.g}, v={inp.v})")
    xc = critical_index(inp, inp.a)
    u = supercritical_exponent(inp)
    # e^u u^-(u+1) gamma(u+1, u), evaluated as a series without the prefactors
    return xc + (1 - xc) * scaled_lower_gamma(u + 1.0, u)


def subcritical_exponents(inp: ClosedFormInput, form: str = "expanded"):
    """(c0, c1) of the subcritical closed form."""
    w0, w1 = w_subcritical_coefficients(inp, form)
    c0 = inp.kappa * math.pi * (w0 * w0 + 2 * w0 * w1) / (2 * inp.alpha)
    c1 = inp.kappa * math.pi * w0 * w1 / inp.alpha
    return c0, c1


def plz_subcritical(inp: ClosedFormInput, form: str = "expanded") -> float:
    if abs(inp.g) > 2 * inp.v:
        raise RegimeError(f"subcritical formula needs |g| <= 2v (g={inp.g}, v={inp.v})")
    c0, c1 = subcritical_exponents(inp, form)
    if c1 < 0 or c0 <= -1:
        raise RegimeError(f"splitting profile has w0 < 0 (c0={c0}, c1={c1})")
    return scaled_lower_gamma(c0 + 1.0, c1)


def plz_closed_form(inp: ClosedFormInput, form: str = "expanded") -> float:
    """Dispatch on the regime; |g| = 2v falls to the subcritical branch."""
    if abs(inp.g) > 2 * inp.v:
        return plz_supercritical(inp)
    return plz_subcritical(inp, form)


# splitting profiles for the integral form: (callable w^2(x), kink locations)

def supercritical_profile(inp: ClosedFormInput):
    from .spectrum import w2_supercritical

    return (lambda x: w2_supercritical(inp, x, inp.a)), [critical_index(inp, inp.a)]


def subcritical_profile(inp: ClosedFormInput, form: str = "expanded", linearized: bool = True):
    """w^2 from the linear splitting; ``linearized`` drops the w1^2 x^2 term."""
    w0, w1 = w_subcritical_coefficients(inp, form)
    if linearized:
        return (lambda x: w0 * w0 + 2 * w0 * w1 * x), []
    return (lambda x: (w0 + w1 * x) ** 2), []


def tabulated_profile(x, w2):
    """Piecewise-linear interpolation of tabulated squared splittings on [0, 1]."""
    x = np.asarray(x, dtype=float)
    w2 = np.asarray(w2, dtype=float)
    if x[0] > 0:
        x = np.concatenate([[0.0], x])
        w2 = np.concatenate([[w2[0]], w2])
    if x[-1] < 1:
        x = np.concatenate([x, [1.0]])
        w2 = np.concatenate([w2, [w2[-1]]])
    return (lambda xx: float(np.interp(xx, x, w2))), []


class QuadratureError(ArithmeticError):
    pass


def plz_integral_form(profile, alpha: float, kappa: float = 1.0, breakpoints=(),
                      tol: float = 1e-8) -> float:
    """Nested adaptive quadrature of the continuum ICA probability.

    ``profile`` is a callable w^2(x) on [0, 1] (see the ``*_profile``
    helpers, which also return kink locations for ``breakpoints``).
    """
    if not alpha > 0:
        raise ValueError("alpha must be > 0")
    pts = sorted(p for p in breakpoints if 0 < p < 1)

    def exponent(y):
        if y <= 0:
            return 0.0
        inner_pts = [p for p in pts if p < y]
        val, err = integrate.quad(lambda x: profile(x) / (2 * alpha * (1 - x)), 0.0, y,
                                  points=inner_pts or None, limit=400,
                                  epsabs=1e-13, epsrel=1e-12)
        return kappa * math.pi * val

    def outer(y):
        if y >= 1.0:
            return 1.0 if profile(1.0) == 0 else 0.0
        return math.exp(-exponent(y))

    with warnings.catch_warnings():
        warnings.simplefilter("error", integrate.IntegrationWarning)
        try:
            val, err = integrate.quad(outer, 0.0, 1.0, points=pts or None, limit=400,
                                      epsabs=tol * 1e-2, epsrel=tol * 1e-2)
        except integrate.IntegrationWarning as exc:
            raise QuadratureError(f"quadrature did not converge: {exc}") from exc
    if err > tol:
        raise QuadratureError(f"quadrature error estimate {err:.3g} above tolerance {tol:g}")
    return val
