"""Two-mode Bose-Einstein condensate model: parameters, Hamiltonians, energies.

Number-basis convention: ``coeffs[k]`` is the amplitude of ``|k>``, the Fock
state with ``k`` particles in well 1 and ``N - k`` in well 2.  The initial
state of a sweep (all particles in well 1) is therefore the *last*
coefficient.  Time evolution follows ``i dpsi/dt = H psi``.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

NORM_TOL = 1e-9


@dataclass(frozen=True)
class ModelParams:
    """Physical parameters in scaled units (hbar = 1).

    The effective nonlinearity ``g`` is stored; the bare interaction
    ``gbar = g / n`` is derived so the macroscopic limit (``n`` growing at
    fixed ``g``) is a one-field change.  Use :meth:`create` to build from
    either ``g`` or ``gbar``.
    """

    v: float
    alpha: float
    n: int = 1
    g: float = 0.0

    def __post_init__(self):
        if int(self.n) != self.n or self.n < 1:
            raise ValueError(f"particle number must be an integer >= 1, got {self.n!r}")
        object.__setattr__(self, "n", int(self.n))
        if not self.alpha > 0:
            raise ValueError(f"sweep rate alpha must be > 0, got {self.alpha!r}")
        if not (math.isfinite(self.v) and math.isfinite(self.g)):
            raise ValueError("v and g must be finite")

    @classmethod
    def create(cls, v, alpha, n=1, g=None, gbar=None):
        if (g is None) == (gbar is None):
            raise ValueError("give exactly one of g or gbar")
        if g is None:
            g = gbar * n
        return cls(v=float(v), alpha=float(alpha), n=n, g=float(g))

    @property
    def gbar(self):
        return self.g / self.n

    @property
    def g_c(self):
        return 2.0 * self.v

    def replace(self, **changes):
        """Copy with some fields changed; ``gbar`` is accepted in place of ``g``."""
        fields = {"v": self.v, "alpha": self.alpha, "n": self.n, "g": self.g}
        if "gbar" in changes:
            if "g" in changes:
                raise ValueError("give exactly one of g or gbar")
            n = changes.get("n", self.n)
            changes["g"] = changes.pop("gbar") * n
        fields.update(changes)
        return ModelParams(**fields)


@dataclass(frozen=True)
class MeanFieldState:
    psi1: complex
    psi2: complex

    def __post_init__(self):
        norm = abs(self.psi1) ** 2 + abs(self.psi2) ** 2
        if abs(norm - 1.0) > NORM_TOL:
            raise ValueError(f"mean-field state not normalized (norm {norm!r})")

    def as_array(self):
        return np.array([self.psi1, self.psi2], dtype=complex)


@dataclass(frozen=True)
class ManyBodyState:
    coeffs: np.ndarray

    def __post_init__(self):
        c = np.array(self.coeffs, dtype=complex)
        c.setflags(write=False)
        object.__setattr__(self, "coeffs", c)
        norm = float(np.sum(np.abs(c) ** 2))
        if abs(norm - 1.0) > NORM_TOL:
            raise ValueError(f"many-body state not normalized (norm {norm!r})")

    @property
    def n(self):
        return len(self.coeffs) - 1

    @classmethod
    def fock(cls, n, k):
        c = np.zeros(n + 1, dtype=complex)
        c[k] = 1.0
        return cls(c)


@dataclass(frozen=True)
class TridiagonalHamiltonian:
    """Symmetric tridiagonal matrix; only the superdiagonal is stored."""

    diag: np.ndarray
    offdiag: np.ndarray

    def __post_init__(self):
        d = np.array(self.diag, dtype=float)
        e = np.array(self.offdiag, dtype=float)
        if d.ndim != 1 or e.ndim != 1 or len(e) != len(d) - 1:
            raise ValueError("offdiag must have exactly one entry fewer than diag")
        d.setflags(write=False)
        e.setflags(write=False)
        object.__setattr__(self, "diag", d)
        object.__setattr__(self, "offdiag", e)

    @property
    def size(self):
        return len(self.diag)

    def to_dense(self):
        return np.diag(self.diag) + np.diag(self.offdiag, 1) + np.diag(self.offdiag, -1)


def interaction_energies(params: ModelParams) -> np.ndarray:
    """Constant part of the diabatic levels, (gbar/2)(2l^2 - 2lN + N^2 - N)."""
    n = params.n
    ell = np.arange(n + 1, dtype=float)
    # integer polynomial first, then scale: exact for all realistic N
    poly = 2 * ell * ell - 2 * ell * n + n * n - n
    return 0.5 * params.gbar * poly


def hopping_couplings(params: ModelParams) -> np.ndarray:
    n = params.n
    ell = np.arange(n, dtype=float)
    return params.v * np.sqrt((ell + 1.0) * (n - ell))


def diabatic_level(params: ModelParams, ell: int, t: float) -> float:
    """Energy h_l(t) of the uncoupled number state |l> at time t."""
    n = params.n
    if not 0 <= ell <= n:
        raise IndexError(f"level index {ell} outside 0..{n}")
    poly = 2 * ell * ell - 2 * ell * n + n * n - n
    return params.alpha * t * (2 * ell - n) + 0.5 * params.gbar * poly


def build_manybody_hamiltonian(params: ModelParams, epsilon: float) -> TridiagonalHamiltonian:
    n = params.n
    slope = 2.0 * np.arange(n + 1, dtype=float) - n
    return TridiagonalHamiltonian(
        diag=epsilon * slope + interaction_energies(params),
        offdiag=hopping_couplings(params),
    )


def build_spin_hamiltonian(params: ModelParams) -> np.ndarray:
    """Dense matrix of ``2v Jz + (g/N) Jx^2`` in the number basis.

    Jx is diagonal there with eigenvalue ``(N - 2k)/2`` on ``|k>``.  The
    result differs from :func:`build_manybody_hamiltonian` at ``epsilon=0``
    by the constant ``-(gbar/4)(N^2 - 2N)`` times the identity.
    """
    n = params.n
    k = np.arange(n + 1, dtype=float)
    mx = 0.5 * (n - 2.0 * k)
    jz_off = 0.5 * np.sqrt((k[:-1] + 1.0) * (n - k[:-1]))
    h = np.diag(params.g / n * mx * mx)
    h += np.diag(2.0 * params.v * jz_off, 1) + np.diag(2.0 * params.v * jz_off, -1)
    return h


def _as_pair(state):
    if isinstance(state, MeanFieldState):
        return complex(state.psi1), complex(state.psi2)
    psi1, psi2 = state
    return complex(psi1), complex(psi2)


def meanfield_rhs(params: ModelParams, t: float, state) -> np.ndarray:
    """Time derivative ``-i H(|psi1|^2, |psi2|^2, t) psi`` of the mean-field state."""
    psi1, psi2 = _as_pair(state)
    eps = params.alpha * t
    h1 = (eps + params.g * abs(psi1) ** 2) * psi1 + params.v * psi2
    h2 = params.v * psi1 + (-eps + params.g * abs(psi2) ** 2) * psi2
    return -1j * np.array([h1, h2])


def meanfield_total_energy(params: ModelParams, t: float, state) -> float:
    psi1, psi2 = _as_pair(state)
    eps = params.alpha * t
    p1 = abs(psi1) ** 2
    p2 = abs(psi2) ** 2
    # psi1* psi2 + c.c. is real by construction
    hop = 2.0 * (psi1.conjugate() * psi2).real
    return float(eps * (p1 - p2) + 0.5 * params.g * (p1 * p1 + p2 * p2) + params.v * hop)


def meanfield_stationary_energies(params: ModelParams, epsilon: float, tol=1e-9) -> np.ndarray:
    """Total energies of the real stationary mean-field states, ascending.

    With z = |psi1|^2 - |psi2|^2 and relative phase 0 or pi the energy is
    eps z + g (1 + z^2)/4 + s v sqrt(1 - z^2), s = +-1; stationary points
    are roots of (eps + g z/2)^2 (1 - z^2) = v^2 z^2.  Two levels below
    the loop, four inside it.
    """
    eps, g, v = float(epsilon), params.g, params.v
    if v == 0:
        return np.sort(np.array([eps + g / 2, -eps + g / 2]))
    # (eps + g z/2)^2 (1 - z^2) - v^2 z^2, highest power first
    a2 = np.array([g * g / 4, g * eps, eps * eps])
    poly = np.polysub(np.polymul(a2, [-1.0, 0.0, 1.0]), [v * v, 0.0, 0.0])
    roots = np.roots(poly) if np.any(poly) else np.array([])
    levels = []
    for z in roots:
        if abs(z.imag) > 1e-7 or not -1 < z.real < 1:
            continue
        z = float(z.real)
        root = math.sqrt(1 - z * z)
        for s in (1.0, -1.0):
            if abs((eps + g * z / 2) * root - s * v * z) <= tol * max(1.0, abs(eps), abs(g), v):
                levels.append(eps * z + g * (1 + z * z) / 4 + s * v * root)
    levels = np.sort(np.array(levels))
    if len(levels) > 1:
        keep = np.concatenate([[True], np.diff(levels) > 1e-9 * max(1.0, abs(g), abs(eps), v)])
        levels = levels[keep]
    return levels
