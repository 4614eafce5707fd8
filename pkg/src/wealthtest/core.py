"""Sequential wealth-process state machine.

A test is run by multiplying a unit starting wealth by a nonnegative factor
per observation; under the null the wealth is a supermartingale, so crossing
1/alpha at any time rejects at level alpha.  All arithmetic is in the log
domain; mixtures over a grid of bet sizes use log-sum-exp.
"""

from __future__ import annotations

import enum
import math
from dataclasses import dataclass, field, replace
from typing import Callable, Optional, Sequence, Union

import numpy as np

__all__ = [
    "Direction",
    "Decision",
    "HypothesisSpec",
    "Fixed",
    "Schedule",
    "IntegratedGrid",
    "ParamPolicy",
    "WealthState",
    "TwoSidedProcess",
    "factor_upper",
    "factor_lower",
    "update",
    "effective_c",
    "combine_two_sided",
    "decision",
    "DomainError",
]

NEG_INF = float("-inf")


class DomainError(ValueError):
    """An argument is outside the declared domain of an operation."""


class Direction(enum.Enum):
    UPPER_NULL = "upper"   # H0: E(X) <= mu
    LOWER_NULL = "lower"   # H0: E(X) >= mu, needs an a.s. upper bound tau
    POINT_NULL = "point"   # H0: E(X) = mu, two-sided combination


class Decision(enum.Enum):
    CONTINUE = "continue"
    REJECT = "reject"


@dataclass(frozen=True)
class HypothesisSpec:
    direction: Direction
    mu: float
    alpha: float
    tau: Optional[float] = None

    def __post_init__(self):
        if not self.mu > 0:
            raise DomainError(f"mu must be > 0, got {self.mu}")
        if not 0.0 < self.alpha < 1.0:
            raise DomainError(f"alpha must be in (0, 1), got {self.alpha}")
        if self.direction in (Direction.LOWER_NULL, Direction.POINT_NULL):
            if self.tau is None:
                raise DomainError(f"{self.direction.value} null requires tau")
        if self.tau is not None and not self.mu < self.tau:
            raise DomainError(f"need mu < tau, got mu={self.mu}, tau={self.tau}")

    def check_support(self, x: float) -> None:
        if self.direction is Direction.UPPER_NULL:
            if x < 0:
                raise DomainError(f"observation {x} < 0 violates X >= 0")
        else:
            if x > self.tau:
                raise DomainError(f"observation {x} exceeds declared bound tau={self.tau}")
            if self.direction is Direction.POINT_NULL and x < 0:
                raise DomainError(f"observation {x} < 0 violates X >= 0")

    def factor(self, x: float, c: float) -> float:
        if self.direction is Direction.UPPER_NULL:
            return factor_upper(x, c, self.mu)
        if self.direction is Direction.LOWER_NULL:
            return factor_lower(x, c, self.mu, self.tau)
        raise DomainError("point null has no single factor; combine two one-sided states")


def factor_upper(x: float, c: float, mu: float) -> float:
    """Betting factor (1-c) + c*x/mu for H0: E(X) <= mu."""
    if x < 0:
        raise DomainError(f"x must be >= 0, got {x}")
    if not 0.0 <= c <= 1.0:
        raise DomainError(f"c must be in [0, 1], got {c}")
    if mu <= 0:
        raise DomainError(f"mu must be > 0, got {mu}")
    return (1.0 - c) + c * x / mu


def factor_lower(x: float, c: float, mu: float, tau: float) -> float:
    """Betting factor (1-c) + c*(tau-x)/(tau-mu) for H0: E(X) >= mu."""
    if not 0.0 <= c <= 1.0:
        raise DomainError(f"c must be in [0, 1], got {c}")
    if not mu < tau:
        raise DomainError(f"need mu < tau, got mu={mu}, tau={tau}")
    if x > tau:
        raise DomainError(f"x={x} exceeds declared support bound tau={tau}")
    return (1.0 - c) + c * (tau - x) / (tau - mu)


@dataclass(frozen=True)
class Fixed:
    c: float

    def __post_init__(self):
        if not 0.0 <= self.c <= 1.0:
            raise DomainError(f"c must be in [0, 1], got {self.c}")


@dataclass(frozen=True)
class Schedule:
    """Predictable bet-size rule: c_k is computed from observations 1..k-1 only."""

    fn: Callable[[Sequence[float]], float]
    depends_on_mu: bool = False

    def c_for(self, history: Sequence[float]) -> float:
        c = float(self.fn(history))
        if not 0.0 <= c <= 1.0:
            raise DomainError(f"schedule produced c={c} outside [0, 1]")
        return c


@dataclass(frozen=True)
class IntegratedGrid:
    """Discrete mixture over bet sizes b_1..b_r with weights summing to 1."""

    points: tuple
    weights: tuple

    def __post_init__(self):
        pts = np.asarray(self.points, dtype=float)
        wts = np.asarray(self.weights, dtype=float)
        if pts.ndim != 1 or pts.shape != wts.shape or len(pts) == 0:
            raise DomainError("points and weights must be equal-length 1-d sequences")
        if np.any(pts < 0) or np.any(pts > 1):
            raise DomainError("grid points must lie in [0, 1]")
        if np.any(wts < 0):
            raise DomainError("grid weights must be >= 0")
        if abs(wts.sum() - 1.0) > 1e-12:
            raise DomainError(f"grid weights must sum to 1, got {wts.sum()!r}")
        object.__setattr__(self, "points", tuple(float(p) for p in pts))
        object.__setattr__(self, "weights", tuple(float(w) for w in wts))

    @classmethod
    def uniform(cls, lo: float = 0.0, hi: float = 1.0, n: int = 64) -> "IntegratedGrid":
        pts = np.linspace(lo, hi, n)
        return cls(tuple(pts), tuple(np.full(n, 1.0 / n)))

    def as_arrays(self):
        return np.asarray(self.points), np.asarray(self.weights)


ParamPolicy = Union[Fixed, Schedule, IntegratedGrid]


def _logsumexp(log_terms: np.ndarray) -> float:
    m = np.max(log_terms)
    if m == NEG_INF:
        return NEG_INF
    return float(m + math.log(np.sum(np.exp(log_terms - m))))


@dataclass(frozen=True)
class WealthState:
    log_wealth: float = 0.0
    log_running_max: float = 0.0
    n: int = 0
    absorbed: bool = False
    rejected_at: Optional[int] = None
    # per-grid-point log wealths for an IntegratedGrid policy
    grid_log_wealth: Optional[tuple] = None
    # logged history enabling exact replay and switching to a family
    observations: tuple = ()
    c_history: tuple = ()
    c1_warning: bool = False

    def wealth(self) -> float:
        return math.exp(self.log_wealth) if self.log_wealth > NEG_INF else 0.0

    def to_json(self) -> dict:
        return {
            "log_wealth": self.log_wealth,
            "log_running_max": self.log_running_max,
            "n": self.n,
            "absorbed": self.absorbed,
            "rejected_at": self.rejected_at,
            "grid": list(self.grid_log_wealth) if self.grid_log_wealth is not None else None,
        }


def update(state: WealthState, x: float, policy: ParamPolicy, hyp: HypothesisSpec) -> WealthState:
    """Consume one observation and return the successor state.

    Updating an absorbed state is legal (wealth stays 0); an out-of-support
    observation raises and leaves the state unchanged.
    """
    hyp.check_support(x)
    n = state.n + 1
    warn_c1 = state.c1_warning

    if isinstance(policy, IntegratedGrid):
        pts, wts = policy.as_arrays()
        if state.grid_log_wealth is None:
            grid_lw = np.zeros(len(pts))
        else:
            grid_lw = np.asarray(state.grid_log_wealth, dtype=float)
        factors = np.array([hyp.factor(x, c) for c in pts])
        with np.errstate(divide="ignore"):
            grid_lw = grid_lw + np.log(factors)
        log_w = _logsumexp(np.log(wts, where=wts > 0, out=np.full_like(wts, NEG_INF)) + grid_lw)
        absorbed = state.absorbed
        new_grid = tuple(grid_lw)
        c_used = effective_c(state, policy)
    else:
        if isinstance(policy, Fixed):
            c_used = policy.c
        else:
            c_used = policy.c_for(state.observations)
        if c_used == 1.0:
            warn_c1 = True
        f = hyp.factor(x, c_used)
        if state.absorbed or f == 0.0:
            absorbed = True
            log_w = NEG_INF
        else:
            absorbed = False
            log_w = state.log_wealth + math.log(f)
        new_grid = None

    log_max = max(state.log_running_max, log_w)
    rejected_at = state.rejected_at
    if rejected_at is None and log_max >= math.log(1.0 / hyp.alpha):
        rejected_at = n
    return WealthState(
        log_wealth=log_w,
        log_running_max=log_max,
        n=n,
        absorbed=absorbed,
        rejected_at=rejected_at,
        grid_log_wealth=new_grid,
        observations=state.observations + (float(x),),
        c_history=state.c_history + (float(c_used),),
        c1_warning=warn_c1,
    )


def effective_c(state: WealthState, policy: IntegratedGrid) -> float:
    """Wealth-weighted mean bet size of the mixture; this is the factor the
    mixture wealth is effectively multiplied by at the next step."""
    if not isinstance(policy, IntegratedGrid):
        raise DomainError("effective_c is defined for IntegratedGrid policies only")
    pts, wts = policy.as_arrays()
    if state.grid_log_wealth is None:
        lw = np.zeros(len(pts))
    else:
        lw = np.asarray(state.grid_log_wealth, dtype=float)
    with np.errstate(divide="ignore"):
        logw = np.log(wts, where=wts > 0, out=np.full_like(wts, NEG_INF)) + lw
    m = np.max(logw)
    w = np.exp(logw - m)
    return float(np.dot(pts, w) / np.sum(w))


def combine_two_sided(
    minus: WealthState, plus: WealthState, rho_minus: float, rho_plus: float
) -> WealthState:
    """Snapshot combination rho- * M- + rho+ * M+ testing H0: E(X) = mu.

    The running max of the combined process over time is maintained by
    TwoSidedProcess; here it is seeded from the combined wealth itself.
    """
    if rho_minus < 0 or rho_plus < 0 or abs(rho_minus + rho_plus - 1.0) > 1e-12:
        raise DomainError("rho weights must be >= 0 and sum to 1")
    if minus.n != plus.n:
        raise DomainError(f"mismatched observation counts: {minus.n} vs {plus.n}")
    terms = []
    if rho_minus > 0:
        terms.append(math.log(rho_minus) + minus.log_wealth)
    if rho_plus > 0:
        terms.append(math.log(rho_plus) + plus.log_wealth)
    log_w = _logsumexp(np.array(terms)) if terms else NEG_INF
    return WealthState(
        log_wealth=log_w,
        log_running_max=max(log_w, 0.0),
        n=minus.n,
        absorbed=minus.absorbed and plus.absorbed,
        rejected_at=None,
        observations=minus.observations,
        c_history=minus.c_history,
    )


def decision(state: WealthState, alpha: float) -> Decision:
    """Latched rejection rule: reject iff the running max ever reached 1/alpha."""
    if state.log_running_max >= math.log(1.0 / alpha):
        return Decision.REJECT
    return Decision.CONTINUE


class TwoSidedProcess:
    """Maintains both one-sided states and the running max of their mixture."""

    def __init__(self, hyp: HypothesisSpec, policy: ParamPolicy,
                 rho_minus: float = 0.5, rho_plus: float = 0.5):
        if hyp.direction is not Direction.POINT_NULL:
            raise DomainError("TwoSidedProcess requires a point null")
        self.hyp = hyp
        self.policy = policy
        self.rho_minus = rho_minus
        self.rho_plus = rho_plus
        self.hyp_minus = HypothesisSpec(Direction.UPPER_NULL, hyp.mu, hyp.alpha, hyp.tau)
        self.hyp_plus = HypothesisSpec(Direction.LOWER_NULL, hyp.mu, hyp.alpha, hyp.tau)
        self.minus = WealthState()
        self.plus = WealthState()
        self.combined = combine_two_sided(self.minus, self.plus, rho_minus, rho_plus)
        self._log_max = 0.0
        self._rejected_at: Optional[int] = None

    def observe(self, x: float) -> WealthState:
        self.minus = update(self.minus, x, self.policy, self.hyp_minus)
        self.plus = update(self.plus, x, self.policy, self.hyp_plus)
        snap = combine_two_sided(self.minus, self.plus, self.rho_minus, self.rho_plus)
        self._log_max = max(self._log_max, snap.log_wealth)
        if self._rejected_at is None and self._log_max >= math.log(1.0 / self.hyp.alpha):
            self._rejected_at = snap.n
        self.combined = replace(
            snap, log_running_max=self._log_max, rejected_at=self._rejected_at
        )
        return self.combined
