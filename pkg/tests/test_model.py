import math

import numpy as np
import pytest

from lzbec.model import (ManyBodyState, MeanFieldState, ModelParams, build_manybody_hamiltonian,
                         build_spin_hamiltonian, diabatic_level, meanfield_rhs,
                         meanfield_stationary_energies, meanfield_total_energy)


def fock_hamiltonian(n, v, gbar, eps):
    """H built from two-mode ladder operators, projected on n1 + n2 = n.

    Basis order: k = n1 = 0..n, matching the tridiagonal construction.
    """
    dim = n + 1
    a = np.diag(np.sqrt(np.arange(1, dim)), 1)
    eye = np.eye(dim)
    a1, a2 = np.kron(a, eye), np.kron(eye, a)
    n1, n2 = a1.T @ a1, a2.T @ a2
    h = (eps * (n1 - n2)
         + 0.5 * gbar * (a1.T @ a1.T @ a1 @ a1 + a2.T @ a2.T @ a2 @ a2)
         + v * (a1.T @ a2 + a2.T @ a1))
    idx = [k * dim + (n - k) for k in range(n + 1)]
    return h[np.ix_(idx, idx)]


@pytest.mark.parametrize("n", range(1, 7))
@pytest.mark.parametrize("gbar,eps", [(0.0, 0.3), (-0.5, 0.0), (0.7, -1.3), (-0.01, 2.0)])
def test_manybody_matches_second_quantized_oracle(n, gbar, eps):
    p = ModelParams.create(v=0.2, alpha=1.0, n=n, gbar=gbar)
    h = build_manybody_hamiltonian(p, eps).to_dense()
    np.testing.assert_allclose(h, fock_hamiltonian(n, 0.2, gbar, eps), atol=1e-12)


def test_two_particle_matrix():
    p = ModelParams.create(v=0.2, alpha=1.0, n=2, gbar=-0.5)
    h = build_manybody_hamiltonian(p, 0.0)
    np.testing.assert_allclose(h.diag, [-0.5, 0.0, -0.5])
    np.testing.assert_allclose(h.offdiag, [0.2 * math.sqrt(2)] * 2)


def test_single_particle_is_linear_model():
    p = ModelParams(v=0.2, alpha=1.0, n=1, g=-3.0)
    h = build_manybody_hamiltonian(p, 0.5)
    np.testing.assert_allclose(h.diag, [-0.5, 0.5])
    np.testing.assert_allclose(h.offdiag, [0.2])


def test_diabatic_levels():
    assert diabatic_level(ModelParams(v=0.2, alpha=1.0, n=2, g=0.0), 1, 5.0) == 0.0
    p = ModelParams.create(v=0.2, alpha=0.01, n=100, gbar=-0.01)
    assert diabatic_level(p, 100, 0.0) == pytest.approx(-49.5, rel=1e-14)
    with pytest.raises(IndexError):
        diabatic_level(p, 101, 0.0)


@pytest.mark.parametrize("n", [1, 2, 5, 13, 20])
@pytest.mark.parametrize("g", [0.0, -1.0, 0.6])
def test_spin_form_differs_by_constant(n, g):
    p = ModelParams(v=0.2, alpha=1.0, n=n, g=g)
    diff = build_spin_hamiltonian(p) - build_manybody_hamiltonian(p, 0.0).to_dense()
    c = diff[0, 0]
    np.testing.assert_allclose(diff, c * np.eye(n + 1), atol=1e-10)
    assert c == pytest.approx(-(p.gbar / 4) * (n * n - 2 * n), abs=1e-10)
    ev_spin = np.linalg.eigvalsh(build_spin_hamiltonian(p))
    ev_mb = np.linalg.eigvalsh(build_manybody_hamiltonian(p, 0.0).to_dense())
    np.testing.assert_allclose(ev_spin - c, ev_mb, atol=1e-10)


def test_spin_half():
    np.testing.assert_allclose(build_spin_hamiltonian(ModelParams(v=0.2, alpha=1.0, n=1)),
                               [[0, 0.2], [0.2, 0]], atol=1e-15)


def test_params_g_gbar():
    p = ModelParams.create(v=0.2, alpha=0.1, n=100, gbar=-0.01)
    assert p.g == pytest.approx(-1.0)
    assert p.gbar == pytest.approx(-0.01)
    assert p.g_c == pytest.approx(0.4)
    assert p.replace(n=50).g == p.g
    with pytest.raises((TypeError, ValueError)):
        ModelParams.create(v=0.2, alpha=0.1, n=10, g=-1, gbar=-0.1)
    with pytest.raises(ValueError):
        ModelParams(v=0.2, alpha=0.0)
    with pytest.raises(ValueError):
        ModelParams(v=0.2, alpha=1.0, n=0)


def test_states_validate_norm():
    with pytest.raises(ValueError):
        MeanFieldState(1.0, 0.1)
    with pytest.raises(ValueError):
        ManyBodyState(np.array([1.0, 1.0]))
    s = ManyBodyState.fock(4, 4)
    assert s.n == 4 and s.coeffs[-1] == 1


def test_meanfield_rhs():
    p = ModelParams(v=0.2, alpha=1.0, g=-1.0)
    np.testing.assert_allclose(meanfield_rhs(p, 0.0, MeanFieldState(1.0, 0.0)), [1j, -0.2j])
    psi = np.array([0.6, 0.8j])
    d = meanfield_rhs(p, 1.7, psi)
    assert abs(np.vdot(psi, d).real) < 1e-15  # norm conserving


def test_meanfield_energy():
    p = ModelParams(v=0.2, alpha=1.0, g=-1.0)
    assert meanfield_total_energy(p, -2.0, MeanFieldState(1.0, 0.0)) == pytest.approx(-2.5)
    q = ModelParams(v=0.2, alpha=1.0, g=0.0)
    s = 1 / math.sqrt(2)
    assert meanfield_total_energy(q, 3.0, MeanFieldState(s, s)) == pytest.approx(0.2)


@pytest.mark.parametrize("eps", [-1.0, -0.2, -0.05, 0.0, 0.1, 0.7])
def test_stationary_energies_are_stationary(eps):
    p = ModelParams(v=0.2, alpha=1.0, g=-1.0)
    levels = meanfield_stationary_energies(p, eps)
    assert len(levels) in (2, 3, 4)
    # brute force: energy on a fine z grid for both relative phases, local extrema
    z = np.linspace(-1, 1, 400001)
    found = []
    for s in (1, -1):
        e = eps * z + p.g * (1 + z * z) / 4 + s * p.v * np.sqrt(1 - z * z)
        d = np.diff(e)
        ext = np.nonzero(np.sign(d[1:]) != np.sign(d[:-1]))[0] + 1
        found.extend(e[ext])
    for lv in levels:
        assert min(abs(np.array(found) - lv)) < 1e-6


def test_stationary_energies_linear_limit():
    p = ModelParams(v=0.2, alpha=1.0, g=0.0)
    np.testing.assert_allclose(meanfield_stationary_energies(p, 0.5), [-math.hypot(0.5, 0.2),
                                                                      math.hypot(0.5, 0.2)])


def test_loop_opens_above_critical_coupling():
    # four stationary states near eps = 0 only when |g| > 2v
    assert len(meanfield_stationary_energies(ModelParams(v=0.2, alpha=1, g=-1.0), 0.05)) == 4
    assert len(meanfield_stationary_energies(ModelParams(v=0.2, alpha=1, g=-0.3), 0.05)) == 2
