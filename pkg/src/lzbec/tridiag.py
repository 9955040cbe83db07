"""Eigenvalues of real symmetric tridiagonal matrices.

Full spectra use the implicit-shift QL iteration; single eigenvalues are
located by bisection on Sturm sequence counts.
"""

import math

import numpy as np
from numba import njit

EPS = np.finfo(float).eps
MAX_QL_ITER = 60


class ConvergenceError(RuntimeError):
    pass


@njit(cache=True)
def _tql1(d, e, max_iter):
    # d: diagonal (overwritten by eigenvalues), e: e[i] couples i and i+1, len n
    n = d.shape[0]
    eps = 2.220446049250313e-16
    for l in range(n):
        it = 0
        while True:
            m = l
            while m < n - 1:
                dd = abs(d[m]) + abs(d[m + 1])
                if abs(e[m]) <= eps * dd:
                    break
                m += 1
            if m == l:
                break
            if it == max_iter:
                return l
            it += 1
            g = (d[l + 1] - d[l]) / (2.0 * e[l])
            r = math.hypot(g, 1.0)
            g = d[m] - d[l] + e[l] / (g + math.copysign(r, g))
            s = 1.0
            c = 1.0
            p = 0.0
            deflated = False
            i = m - 1
            while i >= l:
                f = s * e[i]
                b = c * e[i]
                r = math.hypot(f, g)
                e[i + 1] = r
                if r == 0.0:
                    d[i + 1] -= p
                    e[m] = 0.0
                    deflated = True
                    break
                s = f / r
                c = g / r
                g = d[i + 1] - p
                r = (d[i] - g) * s + 2.0 * c * b
                p = s * r
                d[i + 1] = g + p
                g = c * r - b
                i -= 1
            if deflated:
                continue
            d[l] -= p
            e[l] = g
            e[m] = 0.0
    return -1


def eigenvalues_tridiagonal(h) -> np.ndarray:
    """All eigenvalues of a symmetric tridiagonal matrix, ascending.

    ``h`` is anything with ``diag`` and ``offdiag`` arrays.  O(n^2).
    """
    d = np.array(h.diag, dtype=float)
    e = np.zeros_like(d)
    e[: len(d) - 1] = h.offdiag
    failed = _tql1(d, e, MAX_QL_ITER)
    if failed >= 0:
        raise ConvergenceError(
            f"QL iteration did not converge for eigenvalue {failed} after {MAX_QL_ITER} sweeps"
        )
    d.sort()
    return d


@njit(cache=True)
def _sturm_count(d, e2, x, pivmin):
    # number of eigenvalues strictly below x
    count = 0
    q = d[0] - x
    if abs(q) < pivmin:
        q = -pivmin
    if q < 0.0:
        count += 1
    for i in range(1, d.shape[0]):
        q = d[i] - x - e2[i - 1] / q
        if abs(q) < pivmin:
            q = -pivmin
        if q < 0.0:
            count += 1
    return count


@njit(cache=True)
def _bisect(d, e2, k, lo, hi, pivmin):
    # k-th smallest eigenvalue (0-based) inside [lo, hi]
    for _ in range(200):
        mid = 0.5 * (lo + hi)
        if mid <= lo or mid >= hi:
            break
        if hi - lo <= 2.0 * 2.220446049250313e-16 * max(abs(lo), abs(hi)):
            break
        if _sturm_count(d, e2, mid, pivmin) > k:
            hi = mid
        else:
            lo = mid
    return 0.5 * (lo + hi)


def _prep(h):
    d = np.ascontiguousarray(h.diag, dtype=float)
    e = np.ascontiguousarray(h.offdiag, dtype=float)
    e2 = e * e
    scale = max(np.max(np.abs(d)), np.max(np.abs(e)) if len(e) else 0.0, 1e-300)
    pivmin = np.finfo(float).tiny * max(1.0, scale * scale)
    pad = np.zeros_like(d)
    pad[:-1] += np.abs(e)
    pad[1:] += np.abs(e)
    lo = float(np.min(d - pad))
    hi = float(np.max(d + pad))
    width = (hi - lo) + scale
    lo -= 2 * EPS * width + pivmin
    hi += 2 * EPS * width + pivmin
    return d, e2, lo, hi, pivmin


def sturm_count(h, x: float) -> int:
    d, e2, _, _, pivmin = _prep(h)
    return int(_sturm_count(d, e2, float(x), pivmin))


def eigenvalues_by_index(h, indices) -> np.ndarray:
    """Selected eigenvalues (0-based ascending indices) by Sturm bisection."""
    d, e2, lo, hi, pivmin = _prep(h)
    n = len(d)
    out = np.empty(len(indices))
    for j, k in enumerate(indices):
        if not 0 <= k < n:
            raise IndexError(f"eigenvalue index {k} outside 0..{n - 1}")
        out[j] = _bisect(d, e2, int(k), lo, hi, pivmin)
    return out
