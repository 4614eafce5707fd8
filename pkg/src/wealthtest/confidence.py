"""mu-indexed families of wealth processes and anytime-valid confidence
bounds/intervals.

A decreasing family shares one predictable bet-size sequence across all mu;
its 1/alpha super-level set in mu gives a confidence lower bound B_l.  An
increasing family on the reflected stream tau - T gives an upper bound B_u.
Families keep the observation and bet history, so the continuous-mu wealth
is recomputed exactly during bisection instead of interpolated off the grid.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import List, Optional, Tuple

import numpy as np

from .core import (
    DomainError,
    Fixed,
    IntegratedGrid,
    ParamPolicy,
    Schedule,
    WealthState,
)

__all__ = [
    "FamilyDirection",
    "FamilyGrid",
    "ConfidenceState",
    "IntervalResult",
    "SwitchUnsafeError",
    "family_update",
    "lower_bound",
    "upper_bound",
    "confidence_interval",
    "switch_from_test",
    "default_mu_grid",
]

_MU_TOL = 1e-9


class SwitchUnsafeError(RuntimeError):
    """Reusing the sample would break the anytime guarantee."""


class FamilyDirection:
    DECREASING = "decreasing"   # wealth decreasing in mu; lower bounds
    INCREASING = "increasing"   # wealth increasing in mu; upper bounds


def default_mu_grid(lo: float = 1e-4, hi: float = 1.0 - 1e-4, n: int = 256) -> np.ndarray:
    """Geometric grid for taint-like means on (0, 1)."""
    return np.geomspace(lo, hi, n)


@dataclass
class FamilyGrid:
    """One wealth state per grid mu, driven by a shared, mu-independent
    bet-size policy.  tau is the a.s. upper bound of the observations; it is
    required (and defaults to 1) for increasing families."""

    direction: str = FamilyDirection.DECREASING
    mu_grid: np.ndarray = field(default_factory=default_mu_grid)
    policy: ParamPolicy = field(default_factory=lambda: IntegratedGrid.uniform())
    tau: float = 1.0
    n: int = 0
    observations: List[float] = field(default_factory=list)
    c_history: List[float] = field(default_factory=list)
    # (n_mu,) for Fixed/Schedule, (n_mu, n_b) for IntegratedGrid
    log_wealth: np.ndarray = field(default=None)

    def __post_init__(self):
        self.mu_grid = np.asarray(self.mu_grid, dtype=float)
        if np.any(np.diff(self.mu_grid) <= 0):
            raise DomainError("mu_grid must be strictly increasing")
        if self.direction == FamilyDirection.INCREASING:
            if np.any(self.mu_grid >= self.tau):
                raise DomainError("increasing family needs mu_grid < tau")
        if isinstance(self.policy, Schedule) and self.policy.depends_on_mu:
            raise DomainError("family policy must not depend on mu")
        if self.log_wealth is None:
            if isinstance(self.policy, IntegratedGrid):
                self.log_wealth = np.zeros((len(self.mu_grid), len(self.policy.points)))
            else:
                self.log_wealth = np.zeros(len(self.mu_grid))

    # ratio entering the affine factor: x/mu for decreasing families,
    # (tau - x)/(tau - mu) for increasing ones
    def _ratio(self, x: float, mu) -> np.ndarray:
        if self.direction == FamilyDirection.DECREASING:
            return x / mu
        return (self.tau - x) / (self.tau - mu)

    def _check_support(self, x: float) -> None:
        if x < 0:
            raise DomainError(f"observation {x} < 0")
        if self.direction == FamilyDirection.INCREASING and x > self.tau:
            raise DomainError(f"observation {x} exceeds tau={self.tau}")

    def grid_log_mixture(self) -> np.ndarray:
        """Current log wealth per grid mu (mixture over b for grid policies)."""
        if isinstance(self.policy, IntegratedGrid):
            _, wts = self.policy.as_arrays()
            with np.errstate(divide="ignore"):
                logw = np.where(wts > 0, np.log(wts), -np.inf) + self.log_wealth
            m = np.max(logw, axis=1, keepdims=True)
            m = np.where(np.isfinite(m), m, 0.0)
            return (m[:, 0] + np.log(np.exp(logw - m).sum(axis=1)))
        return self.log_wealth.copy()

    def log_wealth_at(self, mu: float) -> float:
        """Exact log wealth at a continuous mu, replayed from the history."""
        if not 0 < mu:
            raise DomainError(f"mu must be > 0, got {mu}")
        if self.direction == FamilyDirection.INCREASING and mu >= self.tau:
            raise DomainError(f"mu must be < tau for increasing families")
        obs = np.asarray(self.observations)
        if len(obs) == 0:
            return 0.0
        ratios = self._ratio(obs, mu)
        if isinstance(self.policy, IntegratedGrid):
            pts, wts = self.policy.as_arrays()
            with np.errstate(divide="ignore"):
                lw = np.log((1.0 - pts)[None, :] + pts[None, :] * ratios[:, None]).sum(axis=0)
                logw = np.where(wts > 0, np.log(wts), -np.inf) + lw
            m = np.max(logw)
            if not np.isfinite(m):
                return -np.inf
            return float(m + np.log(np.exp(logw - m).sum()))
        cs = np.asarray(self.c_history)
        with np.errstate(divide="ignore"):
            return float(np.log((1.0 - cs) + cs * ratios).sum())

    def sample_mean(self) -> float:
        """Mean of the raw observations.  May be a biased estimate of E(T)
        when the time of use depends on the sampling history."""
        if not self.observations:
            raise DomainError("no observations yet")
        return float(np.mean(self.observations))


def family_update(fam: FamilyGrid, x: float, c_override: Optional[float] = None) -> FamilyGrid:
    """Update every per-mu wealth with its own mu but one shared c_k.

    c_override replays a logged bet size (used when reconstructing a family
    from a test's history); it is ignored for grid policies, whose per-point
    wealths are deterministic in the history anyway.
    """
    fam._check_support(x)
    ratios = fam._ratio(x, fam.mu_grid)
    if isinstance(fam.policy, IntegratedGrid):
        pts, _ = fam.policy.as_arrays()
        with np.errstate(divide="ignore"):
            fam.log_wealth = fam.log_wealth + np.log(
                (1.0 - pts)[None, :] + pts[None, :] * ratios[:, None]
            )
        c_used = float("nan")
    else:
        if c_override is not None:
            c = float(c_override)
        elif isinstance(fam.policy, Fixed):
            c = fam.policy.c
        else:
            c = fam.policy.c_for(fam.observations)
        if not 0.0 <= c <= 1.0:
            raise DomainError(f"c={c} outside [0, 1]")
        with np.errstate(divide="ignore"):
            fam.log_wealth = fam.log_wealth + np.log((1.0 - c) + c * ratios)
        c_used = c
    fam.observations.append(float(x))
    fam.c_history.append(c_used)
    fam.n += 1
    return fam


def _crossing_mu(fam: FamilyGrid, alpha: float, side: str) -> float:
    """Continuous-mu crossing point of log wealth against log(1/alpha)."""
    thresh = math.log(1.0 / alpha)
    g = lambda mu: fam.log_wealth_at(mu) - thresh

    grid = fam.mu_grid
    vals = fam.grid_log_mixture() - thresh
    if side == "sup":       # decreasing wealth in mu: sup{mu : wealth >= 1/alpha}
        above = vals >= 0
        # bracket [lo, hi] with g(lo) >= 0 > g(hi)
        if above.any():
            i = int(np.max(np.nonzero(above)[0]))
            lo = grid[i]
            hi = grid[i + 1] if i + 1 < len(grid) else None
        else:
            lo = None
            hi = grid[0]
        if lo is None:
            # wealth may still cross below the grid: it blows up as mu -> 0
            # whenever some bet c_i * x_i > 0 was placed
            lo = grid[0]
            for _ in range(200):
                lo /= 2.0
                if g(lo) >= 0:
                    break
            else:
                return float("-inf")
        if hi is None:
            hi = grid[-1] if grid[-1] > lo else lo
            while g(hi) >= 0:
                hi *= 2.0
                if hi > 1e12:
                    return float("inf")
        while hi - lo > _MU_TOL * max(1.0, hi):
            mid = 0.5 * (lo + hi)
            if g(mid) >= 0:
                lo = mid
            else:
                hi = mid
        return lo
    else:                   # increasing wealth in mu: inf{mu : wealth >= 1/alpha}
        above = vals >= 0
        if above.any():
            i = int(np.min(np.nonzero(above)[0]))
            hi = grid[i]
            lo = grid[i - 1] if i > 0 else 0.0
        else:
            # wealth blows up as mu -> tau when some bet on tau - x > 0 was
            # placed; probe a point extremely close to tau before giving up
            lo = grid[-1]
            hi = fam.tau - (fam.tau - grid[-1]) * 1e-13
            if g(hi) < 0:
                return float("inf")
        while hi - lo > _MU_TOL * max(1.0, hi):
            mid = 0.5 * (lo + hi)
            if g(mid) >= 0:
                hi = mid
            else:
                lo = mid
        return hi


def lower_bound(fam: FamilyGrid, alpha: float) -> float:
    """(1-alpha) anytime-valid lower confidence bound
    B_l = sup{mu : M^mu >= 1/alpha}, or -inf when nothing crossed."""
    if fam.direction != FamilyDirection.DECREASING:
        raise DomainError("lower_bound needs a decreasing family")
    if fam.n == 0:
        return float("-inf")
    return _crossing_mu(fam, alpha, "sup")


def upper_bound(fam: FamilyGrid, alpha: float) -> float:
    """(1-alpha) anytime-valid upper confidence bound
    B_u = inf{mu : M^mu >= 1/alpha}, or +inf when nothing crossed."""
    if fam.direction != FamilyDirection.INCREASING:
        raise DomainError("upper_bound needs an increasing family")
    if fam.n == 0:
        return float("inf")
    return _crossing_mu(fam, alpha, "inf")


@dataclass
class IntervalResult:
    lo: float
    hi: float
    empty: bool = False

    def contains(self, mu: float) -> bool:
        return (not self.empty) and self.lo < mu < self.hi


def confidence_interval(
    minus: FamilyGrid,
    plus: FamilyGrid,
    p_minus: float,
    p_plus: float,
    alpha: float,
) -> IntervalResult:
    """Sublevel set {mu : p- M^mu,- + p+ M^mu,+ < 1/alpha}.

    Both families must be convex in mu (affine or integrated construction),
    so the set is an interval; it is located by bisecting outward from the
    sample mean.  An empty interval is a legal, flagged return.
    """
    if p_minus < 0 or p_plus < 0 or abs(p_minus + p_plus - 1.0) > 1e-12:
        raise DomainError("p weights must be >= 0 and sum to 1")
    if minus.direction != FamilyDirection.DECREASING or plus.direction != FamilyDirection.INCREASING:
        raise DomainError("need a (decreasing, increasing) family pair")
    if minus.n != plus.n:
        raise DomainError("families must have consumed the same stream")
    lo_edge = 0.0
    hi_edge = plus.tau
    if minus.n == 0:
        return IntervalResult(lo_edge, hi_edge)

    thresh = math.log(1.0 / alpha)

    def log_mix(mu: float) -> float:
        terms = []
        if p_minus > 0:
            terms.append(math.log(p_minus) + minus.log_wealth_at(mu))
        if p_plus > 0:
            terms.append(math.log(p_plus) + plus.log_wealth_at(mu))
        m = max(terms)
        if m == float("-inf"):
            return m
        return m + math.log(sum(math.exp(t - m) for t in terms))

    center = min(max(minus.sample_mean(), lo_edge + 1e-12), hi_edge - 1e-12)
    if log_mix(center) >= thresh:
        return IntervalResult(center, center, empty=True)

    # left endpoint
    lo = lo_edge
    hi = center
    if log_mix(lo_edge + (center - lo_edge) * 1e-12) < thresh:
        left = lo_edge
    else:
        lo = lo_edge + (center - lo_edge) * 1e-12
        while hi - lo > _MU_TOL:
            mid = 0.5 * (lo + hi)
            if log_mix(mid) >= thresh:
                lo = mid
            else:
                hi = mid
        left = hi
    # right endpoint
    lo = center
    hi = hi_edge
    if log_mix(hi_edge - (hi_edge - center) * 1e-12) < thresh:
        right = hi_edge
    else:
        hi = hi_edge - (hi_edge - center) * 1e-12
        while hi - lo > _MU_TOL:
            mid = 0.5 * (lo + hi)
            if log_mix(mid) >= thresh:
                hi = mid
            else:
                lo = mid
        right = lo
    return IntervalResult(left, right)


@dataclass
class ConfidenceState:
    """Running (monotone) confidence bounds and interval intersection."""

    alpha_minus: float
    alpha_plus: float
    b_l_running: float = float("-inf")
    b_u_running: float = float("inf")
    last_b_l: float = float("-inf")
    last_b_u: float = float("inf")
    interval_running: Optional[IntervalResult] = None
    last_nonempty: Optional[IntervalResult] = None

    def update_bounds(self, b_l: float, b_u: float) -> None:
        self.last_b_l = b_l
        self.last_b_u = b_u
        new_l = max(self.b_l_running, b_l)
        new_u = min(self.b_u_running, b_u)
        assert new_l >= self.b_l_running and new_u <= self.b_u_running
        self.b_l_running = new_l
        self.b_u_running = new_u

    def update_interval(self, r: IntervalResult) -> None:
        if self.interval_running is None:
            self.interval_running = r
        else:
            lo = max(self.interval_running.lo, r.lo)
            hi = min(self.interval_running.hi, r.hi)
            self.interval_running = IntervalResult(
                lo, hi, empty=self.interval_running.empty or r.empty or lo >= hi
            )
        if not self.interval_running.empty:
            self.last_nonempty = self.interval_running

    def to_json(self) -> dict:
        return {
            "B_l_running": self.b_l_running,
            "B_u_running": self.b_u_running,
            "last_B_l": self.last_b_l,
            "last_B_u": self.last_b_u,
            "alpha_minus": self.alpha_minus,
            "alpha_plus": self.alpha_plus,
        }


def switch_from_test(mu0: float, test_state: WealthState, fam_template: FamilyGrid) -> FamilyGrid:
    """Reuse a running test's sample as a confidence-bound family.

    Safe only when the test's bet sizes never depended on mu0; the family is
    rebuilt from the test's logged observations and bet history, and its
    mu = mu0 slice reproduces the test wealth bit for bit.
    """
    pol = fam_template.policy
    if isinstance(pol, Schedule) and pol.depends_on_mu:
        raise SwitchUnsafeError("test policy depends on mu; reuse would break the guarantee")
    fam = FamilyGrid(
        direction=fam_template.direction,
        mu_grid=fam_template.mu_grid.copy(),
        policy=pol,
        tau=fam_template.tau,
    )
    for x, c in zip(test_state.observations, test_state.c_history):
        family_update(fam, x, c_override=None if isinstance(pol, IntegratedGrid) else c)
    return fam
