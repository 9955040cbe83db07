import math
import warnings

import numpy as np
import pytest

from lzbec.model import ModelParams, TridiagonalHamiltonian, build_manybody_hamiltonian, diabatic_level
from lzbec.spectrum import (RegimeError, RegimeWarning, bogoliubov_frequency, critical_index,
                            crossing_pair, crossing_time, slope_difference, spectrum_perturbative,
                            spectrum_slice, splitting_at_crossing, splitting_profile,
                            w2_supercritical, w_subcritical, w_subcritical_coefficients)
from lzbec.tridiag import eigenvalues_by_index, eigenvalues_tridiagonal, sturm_count


def test_two_by_two():
    h = TridiagonalHamiltonian(np.array([-0.5, 0.5]), np.array([0.2]))
    np.testing.assert_allclose(eigenvalues_tridiagonal(h), [-math.sqrt(0.29), math.sqrt(0.29)])


def test_toeplitz_three():
    a, b = 0.3, -0.7
    h = TridiagonalHamiltonian(np.full(3, a), np.full(2, b))
    want = sorted([a - math.sqrt(2) * abs(b), a, a + math.sqrt(2) * abs(b)])
    np.testing.assert_allclose(eigenvalues_tridiagonal(h), want, atol=1e-14)


@pytest.mark.parametrize("seed", range(5))
def test_random_against_dense(seed):
    rng = np.random.default_rng(seed)
    n = int(rng.integers(2, 201))
    h = TridiagonalHamiltonian(rng.normal(size=n), rng.normal(size=n - 1))
    ref = np.linalg.eigvalsh(h.to_dense())
    np.testing.assert_allclose(eigenvalues_tridiagonal(h), ref, atol=1e-10)
    idx = sorted(rng.choice(n, size=min(n, 5), replace=False))
    np.testing.assert_allclose(eigenvalues_by_index(h, idx), ref[idx], atol=1e-10)
    assert sturm_count(h, 0.0) == int(np.sum(ref < 0))


def test_index_out_of_range():
    h = TridiagonalHamiltonian(np.zeros(3), np.ones(2))
    with pytest.raises(IndexError):
        eigenvalues_by_index(h, [3])


def test_eigenvalues_distinct():
    p = ModelParams(v=0.2, alpha=1.0, n=60, g=-1.0)
    for eps in np.linspace(-2, 2, 21):
        assert np.all(np.diff(spectrum_slice(p, eps).eigenvalues) > 1e-300)


def test_crossing_identities():
    p = ModelParams(v=0.2, alpha=0.01, n=100, g=-1.0)
    assert crossing_time(p, 0) == 0.0
    assert crossing_time(p, 50) == pytest.approx(25.0)
    assert slope_difference(p, 99) == pytest.approx(0.02)
    assert slope_difference(p, 0) == pytest.approx(2.0)
    for ell in (3, 50):
        t = crossing_time(p, ell)
        fd = (diabatic_level(p, 100, t + 1) - diabatic_level(p, ell, t + 1)) - (
            diabatic_level(p, 100, t) - diabatic_level(p, ell, t))
        assert abs(fd) == pytest.approx(slope_difference(p, ell), rel=1e-9)
    with pytest.raises(IndexError):
        crossing_time(p, 100)


def test_splitting_single_particle():
    p = ModelParams(v=0.2, alpha=0.3, n=1, g=-5.0)
    assert splitting_at_crossing(p, 0) == pytest.approx(0.4, rel=1e-12)


@pytest.mark.parametrize("rule", ["adjacent", "nearest"])
def test_splitting_linear_limit(rule):
    p = ModelParams(v=0.2, alpha=0.1, n=12, g=0.0)
    for ell in range(12):
        assert splitting_at_crossing(p, ell, rule=rule) == pytest.approx(0.4, rel=1e-10)


def test_crossing_pair_rules():
    p = ModelParams(v=0.2, alpha=0.01, n=20, g=-1.0)
    assert crossing_pair(p, 7) == (7, 8)
    i, j = crossing_pair(p, 7, "nearest")
    assert j == i + 1
    with pytest.raises(ValueError):
        crossing_pair(p, 7, "other")


def test_refine_min_never_larger():
    p = ModelParams(v=0.2, alpha=0.01, n=30, g=-1.0)
    for ell in (5, 15, 29):
        assert splitting_at_crossing(p, ell, refine_min=True) <= splitting_at_crossing(p, ell) + 1e-15


def test_fig5_supercritical_shape():
    p = ModelParams(v=0.2, alpha=0.01, n=100, g=-1.0)
    x, w = splitting_profile(p)
    om2 = bogoliubov_frequency(p) ** 2
    assert np.all(w[x < 0.2] ** 2 < 0.05 * om2)
    assert w[-1] ** 2 == pytest.approx(om2, rel=0.1)
    # monotone rise past the onset
    assert np.all(np.diff(w[x > 0.35] ** 2) > 0)


@pytest.mark.parametrize("g", [-1.0, -0.1])
def test_profile_stable_under_doubling_n(g):
    p = ModelParams(v=0.2, alpha=0.01, n=100, g=g)
    _, w1 = splitting_profile(p)
    _, w2 = splitting_profile(p.replace(n=200))
    diff = np.abs(w2[::2] ** 2 - w1 ** 2)
    assert diff.max() <= 0.05 * np.max(w1 ** 2)


def test_perturbative_examples():
    p = ModelParams(v=0.2, alpha=1.0, n=50, g=-0.1)
    assert spectrum_perturbative(p, 25) == pytest.approx(10.5859375)
    q = p.replace(g=0.0)
    assert spectrum_perturbative(q, 7) == pytest.approx(0.4 * 7)
    with pytest.raises(ValueError):
        spectrum_perturbative(p, 0.3)
    with pytest.warns(RegimeWarning):
        spectrum_perturbative(p.replace(g=-1.0), 3)


def test_perturbative_against_exact():
    p = ModelParams(v=0.2, alpha=1.0, n=50, g=-0.1)
    ev = spectrum_slice(p, 0.0).eigenvalues
    # the level formula drops the constants (g/N) j(j+1)/2 of <Jx^2> and the
    # number-basis offset (gbar/4)(N^2 - 2N)
    j = p.n / 2
    shift = p.g / p.n * j * (j + 1) / 2 + p.gbar / 4 * (p.n ** 2 - 2 * p.n)
    mz = np.arange(p.n + 1) - j
    pert = np.array([spectrum_perturbative(p, m) for m in mz]) + shift
    top = slice(3 * p.n // 4, p.n + 1)
    assert np.max(np.abs(ev[top] - pert[top]) / np.abs(pert[top])) < 0.01
    # spacing grows slowly toward the top for g < 0
    gaps = np.diff(ev)
    assert gaps[-1] > gaps[p.n // 2]


def test_fig4_structure():
    p = ModelParams(v=0.2, alpha=1.0, n=50, g=-2.0)
    ev = spectrum_slice(p, 0.0).eigenvalues
    gaps = np.diff(ev)
    om = bogoliubov_frequency(p)
    assert om == pytest.approx(0.97980, abs=1e-5)
    assert np.all(gaps[0:10:2] < 1e-6 * om)
    assert gaps[-1] == pytest.approx(om, rel=0.05)
    sub = spectrum_slice(p.replace(g=-0.1), 0.0)
    mid = sub.gaps[10:40]
    assert np.all(np.abs(mid - 0.4) < 0.15 * 0.4)


def test_bogoliubov():
    assert bogoliubov_frequency(ModelParams(v=0.2, alpha=1.0, g=0.0)) == pytest.approx(0.4)
    with pytest.raises(ValueError):
        bogoliubov_frequency(ModelParams(v=0.2, alpha=1.0, g=1.0))


def test_critical_index():
    p = ModelParams(v=0.2, alpha=1.0, n=100, g=-1.0)
    assert critical_index(p) == pytest.approx(0.27901, abs=1e-5)
    assert critical_index(p.replace(g=-0.4)) == 0.0
    assert critical_index(p.replace(g=-1e6)) == pytest.approx(1.0, abs=1e-3)


def test_w2_supercritical():
    p = ModelParams(v=0.2, alpha=1.0, n=100, g=-1.0)
    xc = critical_index(p)
    assert w2_supercritical(p, xc) == 0.0
    assert w2_supercritical(p, 1.0) == pytest.approx(0.56)
    assert w2_supercritical(p, 0.64) == pytest.approx(0.56 * (0.64 - xc) / (1 - xc))
    assert w2_supercritical(p, 0.64) == pytest.approx(0.2804, abs=1e-4)
    with pytest.raises(RegimeError):
        w2_supercritical(p.replace(g=-0.1), 0.5)


def test_w_subcritical_forms():
    p = ModelParams(v=0.2, alpha=1.0, n=100, g=-0.1)
    w0, w1 = w_subcritical_coefficients(p, "printed")
    assert (w0, w1) == pytest.approx((0.1453125, 0.11875))
    w0e, w1e = w_subcritical_coefficients(p)
    assert w0e == pytest.approx(2 * 0.2 - 0.05 - 3 * 0.01 / (32 * 0.2))
    assert w1e == w1
    assert w_subcritical(p.replace(g=0.0), 0.37) == pytest.approx(0.4)
    with pytest.raises(RegimeError):
        w_subcritical(p.replace(g=-1.0), 0.5)


def test_w_subcritical_tracks_exact():
    p = ModelParams(v=0.2, alpha=0.01, n=100, g=-0.1)
    x, w = splitting_profile(p)
    m = (x >= 0.1) & (x <= 0.9)
    approx = w_subcritical(p, x[m]) ** 2
    assert np.max(np.abs(approx - w[m] ** 2) / w[m] ** 2) <= 0.2
    # the verbatim constant term does not
    printed = w_subcritical(p, x[m], "printed") ** 2
    assert np.max(np.abs(printed - w[m] ** 2) / w[m] ** 2) > 0.2
