"""Growth-rate analysis of fixed-bet wealth processes.

lambda(c) = E log((1-c) + c X/mu) is the per-observation log growth rate.
This module computes it (exactly for discrete distributions, by adaptive
quadrature for Beta), finds the optimal and maximal bet sizes on its concave
graph, evaluates the worst-case two-point alternative with a given mean and
variance budget, and turns a growth rate into expected-sample-size numbers
via the renewal/Wald/Lorden approximations.
"""

from __future__ import annotations

import math
import warnings
from dataclasses import dataclass
from typing import Optional, Sequence, Tuple, Union

import numpy as np
from scipy.integrate import quad

from .core import DomainError

__all__ = [
    "PointMass",
    "TwoPoint",
    "Bernoulli",
    "ScaledBernoulli",
    "BetaDist",
    "Empirical",
    "DistSpec",
    "GrowthReport",
    "NoGrowthError",
    "BoundaryOptimumWarning",
    "lambda_of_c",
    "lambda_derivatives",
    "c_opt",
    "c_max",
    "worst_case",
    "WorstCase",
    "sample_size_report",
    "type1_band",
]

_C_TOL = 1e-9
_QUAD_ABS_TOL = 1e-10


class NoGrowthError(ValueError):
    """E(X) <= mu: no bet size has positive expected log growth."""


class BoundaryOptimumWarning(UserWarning):
    """The optimum/root sits at the c -> 1 boundary and was capped."""


@dataclass(frozen=True)
class PointMass:
    v: float

    def __post_init__(self):
        if self.v < 0:
            raise DomainError(f"point mass value must be >= 0, got {self.v}")


@dataclass(frozen=True)
class TwoPoint:
    x: float
    y: float
    p_y: float

    def __post_init__(self):
        if not 0 <= self.x < self.y:
            raise DomainError(f"need 0 <= x < y, got x={self.x}, y={self.y}")
        if not 0.0 < self.p_y < 1.0:
            raise DomainError(f"p_y must be in (0, 1), got {self.p_y}")


@dataclass(frozen=True)
class Bernoulli:
    nu: float

    def __post_init__(self):
        if not 0.0 <= self.nu <= 1.0:
            raise DomainError(f"nu must be in [0, 1], got {self.nu}")


@dataclass(frozen=True)
class ScaledBernoulli:
    scale: float
    p: float

    def __post_init__(self):
        if self.scale <= 0:
            raise DomainError(f"scale must be > 0, got {self.scale}")
        if not 0.0 <= self.p <= 1.0:
            raise DomainError(f"p must be in [0, 1], got {self.p}")


@dataclass(frozen=True)
class BetaDist:
    a: float
    b: float

    def __post_init__(self):
        if self.a <= 0 or self.b <= 0:
            raise DomainError(f"Beta parameters must be > 0, got ({self.a}, {self.b})")


@dataclass(frozen=True)
class Empirical:
    values: tuple

    def __post_init__(self):
        vals = tuple(float(v) for v in self.values)
        if len(vals) == 0:
            raise DomainError("empirical distribution needs at least one value")
        if any(v < 0 for v in vals):
            raise DomainError("empirical values must be >= 0")
        object.__setattr__(self, "values", vals)


DistSpec = Union[PointMass, TwoPoint, Bernoulli, ScaledBernoulli, BetaDist, Empirical]


def atoms(dist: DistSpec) -> Optional[Tuple[np.ndarray, np.ndarray]]:
    """(values, probabilities) for distributions with finite support."""
    if isinstance(dist, PointMass):
        return np.array([dist.v]), np.array([1.0])
    if isinstance(dist, TwoPoint):
        return np.array([dist.x, dist.y]), np.array([1.0 - dist.p_y, dist.p_y])
    if isinstance(dist, Bernoulli):
        return np.array([0.0, 1.0]), np.array([1.0 - dist.nu, dist.nu])
    if isinstance(dist, ScaledBernoulli):
        return np.array([0.0, dist.scale]), np.array([1.0 - dist.p, dist.p])
    if isinstance(dist, Empirical):
        vals = np.asarray(dist.values)
        return vals, np.full(len(vals), 1.0 / len(vals))
    return None


def dist_mean(dist: DistSpec) -> float:
    if isinstance(dist, BetaDist):
        return dist.a / (dist.a + dist.b)
    vals, probs = atoms(dist)
    return float(np.dot(vals, probs))


def prob_zero(dist: DistSpec) -> float:
    if isinstance(dist, BetaDist):
        return 0.0
    vals, probs = atoms(dist)
    return float(probs[vals == 0.0].sum())


def _beta_expect(dist: BetaDist, fn) -> float:
    # Adaptive quadrature of fn against the Beta(a, b) density, splitting at
    # the (possibly singular) endpoints.
    a, b = dist.a, dist.b
    log_norm = math.lgamma(a + b) - math.lgamma(a) - math.lgamma(b)

    def integrand(t):
        return fn(t) * math.exp(log_norm + (a - 1.0) * math.log(t) + (b - 1.0) * math.log1p(-t))

    mid = a / (a + b)
    left, _ = quad(integrand, 0.0, mid, epsabs=_QUAD_ABS_TOL, epsrel=1e-12, limit=200)
    right, _ = quad(integrand, mid, 1.0, epsabs=_QUAD_ABS_TOL, epsrel=1e-12, limit=200)
    return left + right


def lambda_of_c(dist: DistSpec, c: float, mu: float) -> float:
    """Expected log factor E log((1-c) + c X/mu).

    c = 1 with an atom at zero gives -inf (wealth is eventually absorbed),
    returned as a value rather than raised.
    """
    if mu <= 0:
        raise DomainError(f"mu must be > 0, got {mu}")
    if not 0.0 <= c <= 1.0:
        raise DomainError(f"c must be in [0, 1], got {c}")
    if c == 1.0 and prob_zero(dist) > 0:
        return float("-inf")
    if isinstance(dist, BetaDist):
        return _beta_expect(dist, lambda t: math.log((1.0 - c) + c * t / mu))
    vals, probs = atoms(dist)
    with np.errstate(divide="ignore"):
        logs = np.log((1.0 - c) + c * vals / mu)
    return float(np.dot(probs, logs))


def lambda_derivatives(dist: DistSpec, c: float, mu: float) -> Tuple[float, float]:
    """(lambda', lambda'') at c, with Z = X/mu:
    lambda' = E((Z-1)/(1-c+cZ)), lambda'' = -E(((Z-1)/(1-c+cZ))^2)."""
    if not 0.0 < c < 1.0:
        raise DomainError(f"c must be in (0, 1), got {c}")
    if isinstance(dist, BetaDist):
        d1 = _beta_expect(dist, lambda t: (t / mu - 1.0) / (1.0 - c + c * t / mu))
        d2 = -_beta_expect(dist, lambda t: ((t / mu - 1.0) / (1.0 - c + c * t / mu)) ** 2)
        return d1, d2
    vals, probs = atoms(dist)
    z = vals / mu
    g = (z - 1.0) / (1.0 - c + c * z)
    return float(np.dot(probs, g)), float(-np.dot(probs, g * g))


def c_opt(dist: DistSpec, mu: float) -> float:
    """Argmax of the concave lambda(c) on (0, 1], by derivative bisection.

    Returns 1 when lambda keeps increasing up to the boundary and there is
    no atom at zero; with an atom at zero the cap 1 - 1e-12 is returned with
    a BoundaryOptimumWarning.
    """
    if dist_mean(dist) <= mu:
        raise NoGrowthError(f"E(X) = {dist_mean(dist)} <= mu = {mu}")
    lo, hi = 1e-12, 1.0 - 1e-12
    d_hi, _ = lambda_derivatives(dist, hi, mu)
    if d_hi > 0:
        if prob_zero(dist) > 0:
            warnings.warn(
                "lambda' > 0 up to c -> 1 with an atom at 0; optimum capped at 1 - 1e-12",
                BoundaryOptimumWarning,
            )
            return hi
        return 1.0
    while hi - lo > _C_TOL:
        mid = 0.5 * (lo + hi)
        d_mid, _ = lambda_derivatives(dist, mid, mu)
        if d_mid > 0:
            lo = mid
        else:
            hi = mid
    return 0.5 * (lo + hi)


def c_max(dist: DistSpec, mu: float) -> float:
    """Root of lambda(c) = 0 above c_opt.  Returns 1 with a warning when
    lambda stays positive on all of (0, 1)."""
    copt = c_opt(dist, mu)
    hi = 1.0 - 1e-12
    if copt >= hi or lambda_of_c(dist, hi, mu) > 0:
        warnings.warn("lambda positive on all of (0, 1)", BoundaryOptimumWarning)
        return 1.0
    lo = copt
    while hi - lo > _C_TOL:
        mid = 0.5 * (lo + hi)
        if lambda_of_c(dist, mid, mu) > 0:
            lo = mid
        else:
            hi = mid
    return 0.5 * (lo + hi)


@dataclass(frozen=True)
class WorstCase:
    tau: float
    c0: float
    kl_value: float


def worst_case(theta: float, sigma2: float, mu: float) -> WorstCase:
    """Hardest alternative with mean theta and variance budget sigma2: the
    two-point distribution on {0, tau} with tau = (theta^2 + sigma2)/theta.

    The optimal bet against it is c0 = (theta - mu)/(tau - mu), with growth
    rate equal to the Bernoulli KL divergence D(Alt(theta/tau) || Alt(mu/tau)).
    """
    if theta <= mu:
        raise DomainError(f"need theta > mu, got theta={theta}, mu={mu}")
    if sigma2 <= 0:
        raise DomainError(f"sigma2 must be > 0, got {sigma2}")
    tau = (theta * theta + sigma2) / theta
    c0 = (theta - mu) / (tau - mu)
    p = theta / tau
    kl = (1.0 - p) * math.log((tau - theta) / (tau - mu)) + p * math.log(theta / mu)
    return WorstCase(tau=tau, c0=c0, kl_value=kl)


@dataclass(frozen=True)
class GrowthReport:
    omega: float
    rho2: float
    c_used: float
    expected_n: float
    var_n: float
    lorden_upper: float

    def to_json(self) -> dict:
        return {
            "omega": self.omega,
            "rho2": self.rho2,
            "c_used": self.c_used,
            "expected_n": self.expected_n,
            "var_n": self.var_n,
            "lorden_upper": self.lorden_upper,
        }


def sample_size_report(
    omega: float, rho2: float, alpha: float, c_used: float = float("nan")
) -> GrowthReport:
    """Renewal-theory first-passage numbers for a positive growth rate:
    E(N) ~ log(1/alpha)/omega, Var(N) ~ log(1/alpha) rho2/omega^3, and the
    Lorden excess upper bound log(1/alpha)/omega + 1 + rho2/omega^2."""
    if omega <= 0:
        raise NoGrowthError(f"omega must be > 0, got {omega}")
    if rho2 < 0:
        raise DomainError(f"rho2 must be >= 0, got {rho2}")
    if not 0.0 < alpha < 1.0:
        raise DomainError(f"alpha must be in (0, 1), got {alpha}")
    log_inv = math.log(1.0 / alpha)
    return GrowthReport(
        omega=omega,
        rho2=rho2,
        c_used=c_used,
        expected_n=log_inv / omega,
        var_n=log_inv * rho2 / omega**3,
        lorden_upper=log_inv / omega + 1.0 + rho2 / omega**2,
    )


def log_factor_moments(dist: DistSpec, c: float, mu: float) -> Tuple[float, float]:
    """(omega, rho2): mean and variance of the log factor under dist."""
    omega = lambda_of_c(dist, c, mu)
    if isinstance(dist, BetaDist):
        second = _beta_expect(dist, lambda t: math.log((1.0 - c) + c * t / mu) ** 2)
    else:
        vals, probs = atoms(dist)
        with np.errstate(divide="ignore"):
            logs = np.log((1.0 - c) + c * vals / mu)
        second = float(np.dot(probs, logs * logs))
    return omega, second - omega * omega


def type1_band(mu: float, c: float, alpha: float) -> Tuple[float, float]:
    """Bounds on the actual type-I error of the one-sided test of
    H0: E(T) >= mu at the boundary E(T) = mu: the rate is at most alpha but
    above alpha/(1 - c + c/(1 - mu))."""
    if not 0.0 < c <= 1.0:
        raise DomainError(f"c must be in (0, 1], got {c}")
    if not 0.0 < mu < 1.0:
        raise DomainError(f"mu must be in (0, 1), got {mu}")
    return alpha / (1.0 - c + c / (1.0 - mu)), alpha
