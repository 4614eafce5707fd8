"""Financial-audit sampling workflows.

Items are drawn with probability proportional to book value (monetary unit
sampling), so the expected taint equals total misstatement over total book
value.  Provides PPS draws with and without replacement, the
without-replacement wealth process driven by the residual null mean, a
stratified test, two-boundary acceptance-sampling plans, and the AICPA
monetary-unit-sampling reference sample size.
"""

from __future__ import annotations

import csv
import io
import math
import warnings
from dataclasses import dataclass, field
from typing import Dict, List, Optional, Sequence, Set, Tuple

import numpy as np

from .core import DomainError, WealthState
from .special import gamma_quantile

__all__ = [
    "AuditItem",
    "AuditPopulation",
    "WithoutReplacementState",
    "StratifiedTest",
    "AcceptancePlan",
    "NullSatisfiedWarning",
    "NotYetDecidable",
    "pps_draw",
    "residual_mean",
    "wr_update",
    "acceptance_plan",
    "aicpa_sample_size",
]


class NullSatisfiedWarning(UserWarning):
    """The sampled misstatement already exceeds the tolerable amount: the
    null E(T) >= mu holds with certainty and sampling can stop."""


class NotYetDecidable(Exception):
    """Some stratum has no positive bet yet; the worst-case wealth has no
    finite minimum and no decision can be made."""


@dataclass(frozen=True)
class AuditItem:
    id: str
    book_value: float
    audited_value: Optional[float] = None

    def __post_init__(self):
        if self.book_value <= 0:
            raise DomainError(f"book value must be > 0, got {self.book_value} for {self.id!r}")
        if self.audited_value is not None:
            if not 0.0 <= self.audited_value <= self.book_value:
                raise DomainError(
                    f"audited value {self.audited_value} outside [0, book] for {self.id!r}"
                )

    @property
    def taint(self) -> float:
        if self.audited_value is None:
            raise DomainError(f"item {self.id!r} not audited yet")
        return (self.book_value - self.audited_value) / self.book_value


class AuditPopulation:
    """Immutable sampling frame: items with book values, audited values
    revealed lazily."""

    def __init__(self, items: Sequence[AuditItem]):
        if not items:
            raise DomainError("population must not be empty")
        ids = [it.id for it in items]
        if len(set(ids)) != len(ids):
            raise DomainError("duplicate item ids")
        self.items: Tuple[AuditItem, ...] = tuple(items)
        self._by_id: Dict[str, AuditItem] = {it.id: it for it in items}
        book = np.array([it.book_value for it in items])
        self.b_tot = float(book.sum())
        self._cum_prob = np.cumsum(book) / self.b_tot
        self._cum_prob[-1] = 1.0

    def __len__(self) -> int:
        return len(self.items)

    def get(self, item_id: str) -> AuditItem:
        return self._by_id[item_id]

    @classmethod
    def from_csv(cls, text: str) -> "AuditPopulation":
        """Parse `id,book_value[,audited_value]` rows (UTF-8, header)."""
        reader = csv.DictReader(io.StringIO(text))
        if reader.fieldnames is None or "id" not in reader.fieldnames or "book_value" not in reader.fieldnames:
            raise DomainError("CSV must have header id,book_value[,audited_value]")
        items = []
        for row in reader:
            raw_book = (row.get("book_value") or "").strip()
            if not raw_book:
                raise DomainError(f"missing book value for item {row.get('id')!r}")
            audited = row.get("audited_value")
            audited_f = float(audited) if audited not in (None, "") else None
            items.append(AuditItem(id=row["id"], book_value=float(raw_book), audited_value=audited_f))
        return cls(items)


def pps_draw(pop: AuditPopulation, u: float) -> AuditItem:
    """Deterministic PPS draw: the item whose cumulative book-value bin
    contains u in (0, 1]."""
    if not 0.0 < u <= 1.0:
        raise DomainError(f"u must be in (0, 1], got {u}")
    idx = int(np.searchsorted(pop._cum_prob, u, side="left"))
    return pop.items[idx]


@dataclass
class WithoutReplacementState:
    spent_book: float = 0.0
    spent_taintbook: float = 0.0
    drawn_ids: Set[str] = field(default_factory=set)
    wealth: WealthState = field(default_factory=WealthState)


def residual_mean(state: WithoutReplacementState, pop: AuditPopulation, mu: float) -> float:
    """Residual null mean m_k = (mu*B_tot - sum T*B) / (B_tot - sum B).

    A negative value means the misstatement found so far already proves
    E(T) >= mu; a NullSatisfiedWarning is emitted and sampling can stop.
    """
    remaining = pop.b_tot - state.spent_book
    if remaining <= 0:
        raise DomainError("population exhausted")
    m_k = (mu * pop.b_tot - state.spent_taintbook) / remaining
    if m_k < 0:
        warnings.warn(
            "residual null mean < 0: the null is certainly satisfied; sampling can stop",
            NullSatisfiedWarning,
        )
    return m_k


def wr_update(
    state: WithoutReplacementState,
    item: AuditItem,
    taint: float,
    c_k: float,
    pop: AuditPopulation,
    mu: float,
    alpha: float,
) -> WithoutReplacementState:
    """One without-replacement step: multiply the wealth by
    (1 - c_k) + c_k (1 - taint)/(1 - m_k), with m_k computed from the state
    as it was before this draw.  c_k must have been fixed before the draw.
    """
    if item.id in state.drawn_ids:
        raise DomainError(f"item {item.id!r} already drawn")
    if not 0.0 <= c_k <= 1.0:
        raise DomainError(f"c must be in [0, 1], got {c_k}")
    if not 0.0 <= taint <= 1.0:
        raise DomainError(f"taint must be in [0, 1], got {taint}")
    with warnings.catch_warnings():
        warnings.simplefilter("ignore", NullSatisfiedWarning)
        m_k = residual_mean(state, pop, mu)
    if m_k >= 1.0:
        raise DomainError(f"residual mean m_k={m_k} >= 1; null cannot be bet against")
    factor = (1.0 - c_k) + c_k * (1.0 - taint) / (1.0 - m_k)
    w = state.wealth
    if w.absorbed or factor == 0.0:
        log_w, absorbed = float("-inf"), True
    else:
        log_w, absorbed = w.log_wealth + math.log(factor), False
    log_max = max(w.log_running_max, log_w)
    rejected_at = w.rejected_at
    if rejected_at is None and log_max >= math.log(1.0 / alpha):
        rejected_at = w.n + 1
    new_wealth = WealthState(
        log_wealth=log_w,
        log_running_max=log_max,
        n=w.n + 1,
        absorbed=absorbed,
        rejected_at=rejected_at,
        observations=w.observations + (taint,),
        c_history=w.c_history + (c_k,),
    )
    return WithoutReplacementState(
        spent_book=state.spent_book + item.book_value,
        spent_taintbook=state.spent_taintbook + taint * item.book_value,
        drawn_ids=state.drawn_ids | {item.id},
        wealth=new_wealth,
    )


class StratifiedTest:
    """Stratified test of H0: E(X) <= mu with known stratum probabilities.

    Wealth is kept symbolically as a function of the per-stratum means m(i):
    per stratum a list of (c, x, count) groups.  The decision minimizes the
    log wealth over {m > 0 : sum m(i) p_i <= mu}; the minimum lies on the
    hyperplane sum m(i) p_i = mu and is found by solving the stationarity
    condition in the Lagrange multiplier.
    """

    def __init__(self, probs: Sequence[float], mu: float):
        probs = np.asarray(probs, dtype=float)
        if np.any(probs <= 0) or abs(probs.sum() - 1.0) > 1e-12:
            raise DomainError("stratum probabilities must be positive and sum to 1")
        if mu <= 0:
            raise DomainError(f"mu must be > 0, got {mu}")
        self.probs = probs
        self.mu = mu
        # per stratum: {(c, x): count}
        self.groups: List[Dict[Tuple[float, float], int]] = [dict() for _ in probs]
        self.n = 0

    def update(self, j_k: int, x: float, c_k: float) -> None:
        if not 0 <= j_k < len(self.probs):
            raise DomainError(f"stratum index {j_k} out of range")
        if not 0.0 <= c_k < 1.0:
            raise DomainError(f"c must be in [0, 1), got {c_k}")
        if x < 0:
            raise DomainError(f"x must be >= 0, got {x}")
        key = (float(c_k), float(x))
        self.groups[j_k][key] = self.groups[j_k].get(key, 0) + 1
        self.n += 1

    def log_wealth(self, m: Sequence[float]) -> float:
        m = np.asarray(m, dtype=float)
        total = 0.0
        for i, grp in enumerate(self.groups):
            for (c, x), cnt in grp.items():
                total += cnt * math.log((1.0 - c) + c * x / m[i])
        return total

    def _stratum_has_bet(self, i: int) -> bool:
        return any(c * x > 0 for (c, x) in self.groups[i])

    def _neg_dldm(self, i: int, m_i: float) -> float:
        # -d/dm_i of log wealth; positive, decreasing in m_i
        total = 0.0
        for (c, x), cnt in self.groups[i].items():
            if c * x > 0:
                total += cnt * (c * x / m_i**2) / ((1.0 - c) + c * x / m_i)
        return total

    def _solve_m(self, i: int, target: float) -> float:
        # solve _neg_dldm(i, m) = target by bisection on m > 0
        lo, hi = 1e-12, 1.0
        while self._neg_dldm(i, hi) > target:
            hi *= 2.0
        while self._neg_dldm(i, lo) < target:
            lo /= 2.0
            if lo < 1e-300:
                break
        for _ in range(200):
            mid = math.sqrt(lo * hi)
            if self._neg_dldm(i, mid) > target:
                lo = mid
            else:
                hi = mid
            if hi - lo < 1e-12 * hi:
                break
        return math.sqrt(lo * hi)

    def worst_case_log_wealth(self) -> Tuple[float, np.ndarray]:
        """Minimum of the log wealth over the null region, and its argmin."""
        r = len(self.probs)
        for i in range(r):
            if not self._stratum_has_bet(i):
                raise NotYetDecidable(f"stratum {i} has no positive bet yet")

        def m_of_s(s: float) -> np.ndarray:
            return np.array([self._solve_m(i, s * self.probs[i]) for i in range(r)])

        def budget(s: float) -> float:
            return float(np.dot(self.probs, m_of_s(s)))

        # sum p_i m_i(s) is decreasing in s; bracket the multiplier
        s_lo, s_hi = 1e-12, 1.0
        while budget(s_hi) > self.mu:
            s_hi *= 2.0
        while budget(s_lo) < self.mu:
            s_lo /= 2.0
            if s_lo < 1e-300:
                break
        for _ in range(200):
            s_mid = math.sqrt(s_lo * s_hi)
            if budget(s_mid) > self.mu:
                s_lo = s_mid
            else:
                s_hi = s_mid
            if s_hi - s_lo < 1e-12 * s_hi:
                break
        m_star = m_of_s(math.sqrt(s_lo * s_hi))
        return self.log_wealth(m_star), m_star

    def rejects(self, alpha: float) -> bool:
        """True when the wealth exceeds 1/alpha for every feasible m."""
        worst, _ = self.worst_case_log_wealth()
        return worst >= math.log(1.0 / alpha)


@dataclass(frozen=True)
class AcceptancePlan:
    """Two-boundary sequential plan: accept the lot when the wealth for
    H0: E(T) >= mu reaches A, reject it when the wealth falls to B (the
    reciprocal wealth is then a test of H1: E(T) <= theta)."""

    mu: float
    theta: float
    alpha: float
    beta: float
    c: float
    a_accept: float          # overshoot-ignoring refined boundaries
    b_reject: float
    a_safe: float            # always-valid boundaries
    b_safe: float

    def factor(self, t: float) -> float:
        return (1.0 - self.c) + self.c * (1.0 - t) / (1.0 - self.mu)

    def decide(self, wealth: float, refined: bool = True) -> str:
        a = self.a_accept if refined else self.a_safe
        b = self.b_reject if refined else self.b_safe
        if wealth >= a:
            return "accept_lot"
        if wealth <= b:
            return "reject_lot"
        return "continue"

    def to_json(self) -> dict:
        return {
            "mu": self.mu, "theta": self.theta, "alpha": self.alpha, "beta": self.beta,
            "c": self.c, "A": self.a_accept, "B": self.b_reject,
            "A_safe": self.a_safe, "B_safe": self.b_safe,
        }


def acceptance_plan(mu: float, theta: float, alpha: float, beta: float) -> AcceptancePlan:
    """Plan with bet size c = (mu - theta)/mu, so the reciprocal wealth
    tests H1: E(T) <= theta with theta = (1 - c) mu."""
    if not 0.0 < theta < mu < 1.0:
        raise DomainError(f"need 0 < theta < mu < 1, got theta={theta}, mu={mu}")
    if not (0.0 < alpha < 1.0 and 0.0 < beta < 1.0):
        raise DomainError("alpha and beta must be in (0, 1)")
    return AcceptancePlan(
        mu=mu, theta=theta, alpha=alpha, beta=beta,
        c=(mu - theta) / mu,
        a_accept=(1.0 - beta) / alpha,
        b_reject=beta / (1.0 - alpha),
        a_safe=1.0 / alpha,
        b_safe=beta,
    )


def aicpa_sample_size(mu: float, nu: float, alpha: float, cap: int = 10**6) -> Tuple[int, float]:
    """Monetary-unit-sampling reference size: the smallest n whose fixed-n
    plan tolerates an expected taint sum of n*nu, i.e.
    n*mu >= Q(1 - alpha, 1 + n*nu) with Q the Gamma(shape, 1) quantile.

    Returns (n, critical) with critical = n*nu: the auditor accepts when the
    sampled taints sum to at most the critical value.
    """
    if not 0.0 < nu < mu:
        raise DomainError(f"need 0 < nu < mu, got nu={nu}, mu={mu}")
    if not 0.0 < alpha < 1.0:
        raise DomainError(f"alpha must be in (0, 1), got {alpha}")

    def satisfied(n: int) -> bool:
        return n * mu >= gamma_quantile(1.0 - alpha, 1.0 + n * nu)

    n_hi = 1
    while not satisfied(n_hi):
        n_hi *= 2
        if n_hi > cap:
            raise DomainError(f"no solution below cap {cap}")
    # walk back to the minimal solution (the predicate is monotone once the
    # linear slack n(mu - nu) dominates the quantile's sqrt(n) correction)
    lo, hi = n_hi // 2, n_hi
    while lo + 1 < hi:
        mid = (lo + hi) // 2
        if satisfied(mid):
            hi = mid
        else:
            lo = mid
    return hi, hi * nu
