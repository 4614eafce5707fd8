"""Self-contained special functions: binomial CDF, regularized incomplete
gamma and the Gamma quantile.

Kept free of scipy so that the audit-grade golden values (e.g. the monetary
unit sample size) are bit-stable across environments; scipy is used only as
an independent oracle in the test suite.
"""

from __future__ import annotations

import math

__all__ = ["binom_cdf", "gammainc_lower", "gamma_quantile"]


def binom_cdf(k: int, n: int, p: float) -> float:
    """P(X <= k) for X ~ Binomial(n, p), summed in the smaller tail.

    k < 0 gives 0, k >= n gives 1.  n must be a nonnegative integer.
    """
    if n < 0:
        raise ValueError(f"n must be >= 0, got {n}")
    if not 0.0 <= p <= 1.0:
        raise ValueError(f"p must be in [0, 1], got {p}")
    if k < 0:
        return 0.0
    if k >= n:
        return 1.0
    if p == 0.0:
        return 1.0
    if p == 1.0:
        return 0.0
    # Sum whichever tail has fewer terms; terms built multiplicatively from
    # the log of the first one to avoid under/overflow.
    if k + 1 <= n - k:
        lo, hi, tail_p = 0, k, p
        flip = False
    else:
        # complement: P(X <= k) = 1 - P(Y <= n-k-1) with Y ~ Bin(n, 1-p)
        lo, hi, tail_p = 0, n - k - 1, 1.0 - p
        flip = True
    log_term = lo * math.log(tail_p) + (n - lo) * math.log1p(-tail_p)
    # log C(n, lo) = 0 for lo = 0
    term = math.exp(log_term)
    total = term
    ratio_p = tail_p / (1.0 - tail_p)
    for j in range(lo + 1, hi + 1):
        term *= (n - j + 1) / j * ratio_p
        total += term
    total = min(total, 1.0)
    return 1.0 - total if flip else total


def _gammainc_series(a: float, x: float) -> float:
    # Lower regularized incomplete gamma by power series, for x < a + 1.
    term = 1.0 / a
    total = term
    denom = a
    for _ in range(10_000):
        denom += 1.0
        term *= x / denom
        total += term
        if abs(term) < abs(total) * 1e-16:
            break
    return total * math.exp(-x + a * math.log(x) - math.lgamma(a))

def _gammainc_cf(a: float, x: float) -> float:
    # Upper regularized incomplete gamma by Lentz's continued fraction,
    # for x >= a + 1.
    tiny = 1e-300
    b = x + 1.0 - a
    c = 1.0 / tiny
    d = 1.0 / b
    h = d
    for i in range(1, 10_000):
        an = -i * (i - a)
        b += 2.0
        d = an * d + b
        if abs(d) < tiny:
            d = tiny
        c = b + an / c
        if abs(c) < tiny:
            c = tiny
        d = 1.0 / d
        delta = d * c
        h *= delta
        if abs(delta - 1.0) < 1e-16:
            break
    return h * math.exp(-x + a * math.log(x) - math.lgamma(a))


def gammainc_lower(a: float, x: float) -> float:
    """Regularized lower incomplete gamma P(a, x) = P(Gamma(a, 1) <= x)."""
    if a <= 0.0:
        raise ValueError(f"shape must be > 0, got {a}")
    if x < 0.0:
        raise ValueError(f"x must be >= 0, got {x}")
    if x == 0.0:
        return 0.0
    if x < a + 1.0:
        return min(_gammainc_series(a, x), 1.0)
    return max(1.0 - _gammainc_cf(a, x), 0.0)


def gamma_quantile(p: float, shape: float, tol: float = 1e-10) -> float:
    """p-quantile of the Gamma(shape, scale=1) distribution, by bisection."""
    if not 0.0 < p < 1.0:
        raise ValueError(f"p must be in (0, 1), got {p}")
    lo = 0.0
    hi = shape + 10.0
    while gammainc_lower(shape, hi) < p:
        hi *= 2.0
        if hi > 1e12:
            raise RuntimeError("gamma_quantile failed to bracket")
    while hi - lo > tol * max(1.0, hi):
        mid = 0.5 * (lo + hi)
        if gammainc_lower(shape, mid) < p:
            lo = mid
        else:
            hi = mid
    return 0.5 * (lo + hi)
