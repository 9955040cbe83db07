"""Interaction-picture right-hand sides for the sweep models.

The diagonal part of each Hamiltonian grows linearly in time and is removed
analytically, leaving couplings that rotate at the neighbour detuning only.
"""

import math

import numpy as np
from numba import njit


@njit(cache=True)
def meanfield_rhs_ip(t, y, args, out):
    # args = (alpha, g, v); psi1 = exp(-i a t^2/2) y0, psi2 = exp(+i a t^2/2) y1
    alpha = args[0]
    g = args[1]
    v = args[2]
    ph = alpha * t * t
    rot = complex(math.cos(ph), math.sin(ph))
    a = y[0]
    b = y[1]
    n1 = a.real * a.real + a.imag * a.imag
    n2 = b.real * b.real + b.imag * b.imag
    out[0] = -1j * (g * n1 * a + v * rot * b)
    out[1] = -1j * (v * rot.conjugate() * a + g * n2 * b)


@njit(cache=True)
def manybody_rhs_ip(t, y, args, out):
    # args = (alpha, gbar, N, v_0 .. v_{N-1}); c_k = exp(-i Phi_k(t)) y_k
    alpha = args[0]
    gbar = args[1]
    n = int(args[2])
    ph0 = alpha * t * t + gbar * (1.0 - n) * t
    base = complex(math.cos(ph0), math.sin(ph0))
    ph1 = 2.0 * gbar * t
    z = complex(math.cos(ph1), math.sin(ph1))
    for k in range(n + 1):
        out[k] = 0.0
    e = base
    for k in range(n):
        vk = args[3 + k]
        # e = exp(i (Phi_{k+1} - Phi_k))
        out[k] += vk * e.conjugate() * y[k + 1]
        out[k + 1] += vk * e * y[k]
        e = e * z
        if k % 32 == 31:
            ph = ph0 + (k + 1) * ph1
            e = complex(math.cos(ph), math.sin(ph))
    for k in range(n + 1):
        out[k] = -1j * out[k]


@njit(cache=True)
def linear_sweep_rhs_ip(t, y, args, out):
    # H = diag(beta_k t + b_k) + V with V real symmetric, zero diagonal
    # args = (m, beta_0..beta_{m-1}, b_0..b_{m-1}, V row-major)
    m = int(args[0])
    for k in range(m):
        acc = 0.0 + 0.0j
        phk = 0.5 * args[1 + k] * t * t + args[1 + m + k] * t
        for j in range(m):
            vkj = args[1 + 2 * m + k * m + j]
            if vkj != 0.0:
                ph = phk - (0.5 * args[1 + j] * t * t + args[1 + m + j] * t)
                acc += vkj * complex(math.cos(ph), math.sin(ph)) * y[j]
        out[k] = -1j * acc


def diabatic_phases(t, betas, offsets):
    return 0.5 * np.asarray(betas) * t * t + np.asarray(offsets) * t
