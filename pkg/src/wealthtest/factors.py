"""Alternative wealth-process factors: sub-Gaussian, Bernoulli and Poisson
likelihood-ratio style bets, the binomial-tail martingale, and the Hoeffding
tail bound.

All are pure functions.  Deliberately absent: any accessor for
sup-over-h wealth, which is not a supermartingale and must not be used as
evidence.
"""

from __future__ import annotations

import math

from .core import DomainError
from .special import binom_cdf

__all__ = [
    "subgaussian_factor",
    "bernoulli_lr_factor",
    "poisson_factor",
    "hoeffding_upper_bound",
    "binomial_tail_martingale_step",
]


def subgaussian_factor(x: float, h: float, mu: float, tau_g: float) -> float:
    """exp(h*x - h*mu - h^2*tau_g^2/2); a valid bet when X - E(X) is
    sub-Gaussian with Gauss deviation <= tau_g and E(X) <= mu."""
    if h < 0:
        raise DomainError(f"h must be >= 0, got {h}")
    if tau_g <= 0:
        raise DomainError(f"tau_g must be > 0, got {tau_g}")
    return math.exp(h * x - h * mu - 0.5 * h * h * tau_g * tau_g)


def bernoulli_lr_factor(t: float, nu: float, mu: float) -> float:
    """nu^t (1-nu)^(1-t) / (mu^t (1-mu)^(1-t)) for t in [0, 1]."""
    if not 0.0 < nu < 1.0:
        raise DomainError(f"nu must be in (0, 1), got {nu}")
    if not 0.0 < mu < 1.0:
        raise DomainError(f"mu must be in (0, 1), got {mu}")
    if not 0.0 <= t <= 1.0:
        raise DomainError(f"t must be in [0, 1], got {t}")
    return math.exp(
        t * (math.log(nu) - math.log(mu))
        + (1.0 - t) * (math.log1p(-nu) - math.log1p(-mu))
    )


def poisson_factor(t: float, nu: float, mu: float) -> float:
    """nu^t e^(-nu) / (mu^t e^(-mu)); valid for observations in [0, 1] with
    (E(T) - mu)(nu - mu) <= 0."""
    if nu <= 0:
        raise DomainError(f"nu must be > 0, got {nu}")
    if mu <= 0:
        raise DomainError(f"mu must be > 0, got {mu}")
    if t < 0:
        raise DomainError(f"t must be >= 0, got {t}")
    return math.exp(t * math.log(nu / mu) - nu + mu)


def hoeffding_upper_bound(n: int, theta: float, mu: float) -> float:
    """Upper bound for P(sample mean >= theta) for n iid [0,1] variables
    with mean mu:  {(theta/mu)^theta ((1-theta)/(1-mu))^(1-theta)}^(-n)."""
    if n < 1:
        raise DomainError(f"n must be >= 1, got {n}")
    if not 0.0 < mu < theta < 1.0:
        raise DomainError(f"need 0 < mu < theta < 1, got mu={mu}, theta={theta}")
    log_rate = theta * math.log(theta / mu) + (1.0 - theta) * math.log((1.0 - theta) / (1.0 - mu))
    return math.exp(-n * log_rate)


def binomial_tail_martingale_step(
    y_prev: float, k: int, n: int, i: int, z: int, s_prev: int, mu: float
) -> float:
    """One step of the binomial-tail martingale Y_i = F(k - S_i; n - i, mu).

    y_prev is Y_{i-1}, z is the i-th Bernoulli observation and s_prev the
    success count before it.  After time n the process is frozen.
    """
    if z not in (0, 1):
        raise DomainError(f"z must be 0 or 1, got {z}")
    if i > n:
        return y_prev
    if not 1 <= i <= n:
        raise DomainError(f"need 1 <= i <= n, got i={i}, n={n}")
    if not 0 <= s_prev <= i - 1:
        raise DomainError(f"inconsistent s_prev={s_prev} for i={i}")
    s = s_prev + z
    return binom_cdf(k - s, n - i, mu)
