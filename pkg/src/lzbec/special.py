"""Incomplete gamma function in plain, logarithmic and scaled forms.

Series expansion below ``x = s + 1``, Lentz continued fraction for the
complement above.  The scaled form ``e^x x^-s gamma(s, x)`` is what the
closed-form transition probabilities need: on the series branch it is the
bare series sum, so it stays finite for any s.
"""

import math

EPS = 1e-16
TINY = 1e-300


class GammaConvergenceError(ArithmeticError):
    pass


def _check(s, x):
    if not s > 0:
        raise ValueError(f"incomplete gamma needs s > 0, got s={s}")
    if not x >= 0:
        raise ValueError(f"incomplete gamma needs x >= 0, got x={x}")


def _max_terms(s, x):
    return 200 + int(50 * math.sqrt(s + x))


def _series_sum(s, x):
    """sum_{n>=0} x^n / (s (s+1) ... (s+n)); equals e^x x^-s gamma(s, x)."""
    term = 1.0 / s
    total = term
    ap = s
    for _ in range(_max_terms(s, x)):
        ap += 1.0
        term *= x / ap
        total += term
        if term < total * EPS:
            return total
    raise GammaConvergenceError(f"series for gamma({s}, {x}) did not converge")


def _continued_fraction(s, x):
    """Continued fraction h with Gamma(s, x) = e^-x x^s h (valid for x > s + 1)."""
    b = x + 1.0 - s
    c = 1.0 / TINY
    d = 1.0 / b
    h = d
    for i in range(1, _max_terms(s, x)):
        an = -i * (i - s)
        b += 2.0
        d = an * d + b
        if abs(d) < TINY:
            d = TINY
        c = b + an / c
        if abs(c) < TINY:
            c = TINY
        d = 1.0 / d
        delta = d * c
        h *= delta
        if abs(delta - 1.0) < EPS:
            return h
    raise GammaConvergenceError(f"continued fraction for Gamma({s}, {x}) did not converge")


def _log_prefactor(s, x):
    return -x + s * math.log(x)


def regularized_lower_gamma(s: float, x: float) -> float:
    """P(s, x) = gamma(s, x) / Gamma(s)."""
    _check(s, x)
    if x == 0:
        return 0.0
    if x < s + 1.0:
        return math.exp(_log_prefactor(s, x) - math.lgamma(s) + math.log(_series_sum(s, x)))
    q = math.exp(_log_prefactor(s, x) - math.lgamma(s) + math.log(_continued_fraction(s, x)))
    return 1.0 - q


def regularized_upper_gamma(s: float, x: float) -> float:
    """Q(s, x) = Gamma(s, x) / Gamma(s)."""
    _check(s, x)
    if x == 0:
        return 1.0
    if x < s + 1.0:
        return 1.0 - regularized_lower_gamma(s, x)
    return math.exp(_log_prefactor(s, x) - math.lgamma(s) + math.log(_continued_fraction(s, x)))


def log_lower_incomplete_gamma(s: float, x: float) -> float:
    """ln gamma(s, x); -inf at x = 0."""
    _check(s, x)
    if x == 0:
        return -math.inf
    if x < s + 1.0:
        return _log_prefactor(s, x) + math.log(_series_sum(s, x))
    q = math.exp(_log_prefactor(s, x) - math.lgamma(s) + math.log(_continued_fraction(s, x)))
    return math.lgamma(s) + math.log1p(-q)


def lower_incomplete_gamma(s: float, x: float) -> float:
    """gamma(s, x) = integral_0^x t^(s-1) e^-t dt.

    Overflows to inf once gamma(s, x) exceeds the double range (s above
    roughly 170); use :func:`log_lower_incomplete_gamma` or
    :func:`scaled_lower_gamma` there.
    """
    lg = log_lower_incomplete_gamma(s, x)
    if lg == -math.inf:
        return 0.0
    if lg > 709.0:
        return math.inf
    return math.exp(lg)


def upper_incomplete_gamma(s: float, x: float) -> float:
    _check(s, x)
    if x == 0:
        return math.gamma(s)
    if x < s + 1.0:
        return math.gamma(s) - lower_incomplete_gamma(s, x)
    return math.exp(_log_prefactor(s, x) + math.log(_continued_fraction(s, x)))


def scaled_lower_gamma(s: float, x: float) -> float:
    """e^x x^-s gamma(s, x), finite for all s > 0, x >= 0; equals 1/s at x = 0."""
    _check(s, x)
    if x == 0:
        return 1.0 / s
    if x < s + 1.0:
        return _series_sum(s, x)
    return math.exp(-_log_prefactor(s, x) + log_lower_incomplete_gamma(s, x))
