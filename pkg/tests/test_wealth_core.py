import math

import numpy as np
import pytest

from wealthtest.core import (
    Decision,
    Direction,
    DomainError,
    Fixed,
    HypothesisSpec,
    IntegratedGrid,
    Schedule,
    TwoSidedProcess,
    WealthState,
    combine_two_sided,
    decision,
    effective_c,
    factor_lower,
    factor_upper,
    update,
)

UPPER = HypothesisSpec(Direction.UPPER_NULL, mu=0.05, alpha=0.05)
LOWER = HypothesisSpec(Direction.LOWER_NULL, mu=0.05, alpha=0.05, tau=1.0)


def run(hyp, policy, xs, state=None):
    state = state or WealthState()
    for x in xs:
        state = update(state, x, policy, hyp)
    return state


class TestFactors:
    def test_exact_unit_mean_two_point_upper(self):
        # E[(1-c) + cX/mu] = 1 when E(X) = mu, for any two-point X
        rng = np.random.default_rng(3)
        for _ in range(50):
            x, y = sorted(rng.uniform(0.0, 2.0, size=2))
            if y - x < 3e-3:
                continue
            mu = rng.uniform(x + 1e-3, y - 1e-3)
            p_y = (mu - x) / (y - x)
            c = rng.uniform(0.0, 1.0)
            mean_factor = (1 - p_y) * factor_upper(x, c, mu) + p_y * factor_upper(y, c, mu)
            assert abs(mean_factor - 1.0) < 1e-10

    def test_exact_unit_mean_two_point_lower(self):
        rng = np.random.default_rng(4)
        for _ in range(50):
            x, y = sorted(rng.uniform(0.0, 1.0, size=2))
            if y - x < 3e-3:
                continue
            mu = rng.uniform(x + 1e-3, y - 1e-3)
            p_y = (mu - x) / (y - x)
            c = rng.uniform(0.0, 1.0)
            mean_factor = (1 - p_y) * factor_lower(x, c, mu, 1.0) + p_y * factor_lower(
                y, c, mu, 1.0
            )
            assert abs(mean_factor - 1.0) < 1e-10

    def test_upper_factor_value(self):
        assert factor_upper(0.05, 0.6, 0.05) == pytest.approx(1.0)
        assert factor_upper(0.0, 0.6, 0.05) == pytest.approx(0.4)

    def test_lower_factor_zero_observation(self):
        # zero taint with mu=0.05, tau=1, c=0.6 grows by 0.4 + 0.6/0.95
        assert factor_lower(0.0, 0.6, 0.05, 1.0) == pytest.approx(0.4 + 0.6 / 0.95, abs=1e-12)

    def test_domain_errors(self):
        with pytest.raises(DomainError):
            factor_upper(-0.1, 0.5, 0.05)
        with pytest.raises(DomainError):
            factor_upper(0.1, 1.5, 0.05)
        with pytest.raises(DomainError):
            factor_lower(1.2, 0.5, 0.05, 1.0)


class TestHypothesisSpec:
    def test_lower_null_requires_tau(self):
        with pytest.raises(DomainError):
            HypothesisSpec(Direction.LOWER_NULL, mu=0.05, alpha=0.05)

    def test_alpha_bounds(self):
        with pytest.raises(DomainError):
            HypothesisSpec(Direction.UPPER_NULL, mu=0.05, alpha=0.0)

    def test_mu_below_tau(self):
        with pytest.raises(DomainError):
            HypothesisSpec(Direction.LOWER_NULL, mu=1.0, alpha=0.05, tau=1.0)


class TestUpdate:
    def test_wealth_unchanged_at_mu(self):
        s = run(UPPER, Fixed(0.7), [0.05, 0.05, 0.05])
        assert s.wealth() == pytest.approx(1.0, abs=1e-12)

    def test_rejection_latched_at_97_zeros(self):
        s = run(LOWER, Fixed(0.6), [0.0] * 200)
        assert s.rejected_at == 97
        assert decision(s, 0.05) is Decision.REJECT
        # posting more observations keeps the latch
        s = update(s, 1.0, Fixed(0.6), LOWER)
        assert s.rejected_at == 97
        assert decision(s, 0.05) is Decision.REJECT

    def test_absorption_at_zero_factor(self):
        s = run(UPPER, Fixed(1.0), [0.2, 0.0, 0.3])
        assert s.absorbed
        assert s.wealth() == 0.0
        assert s.c1_warning

    def test_out_of_support_raises_and_preserves_state(self):
        s = run(LOWER, Fixed(0.5), [0.1, 0.2])
        with pytest.raises(DomainError):
            update(s, 1.5, Fixed(0.5), LOWER)
        assert s.n == 2

    def test_schedule_is_predictable(self):
        seen = []

        def rule(history):
            seen.append(tuple(history))
            return 0.5

        run(UPPER, Schedule(rule), [0.1, 0.2, 0.3])
        assert seen == [(), (0.1,), (0.1, 0.2)]

    def test_history_recorded(self):
        s = run(UPPER, Fixed(0.3), [0.1, 0.07])
        assert s.observations == (0.1, 0.07)
        assert s.c_history == (0.3, 0.3)


class TestIntegratedGrid:
    def test_weights_must_sum_to_one(self):
        with pytest.raises(DomainError):
            IntegratedGrid((0.1, 0.9), (0.5, 0.6))

    def test_mixture_equals_independent_recomputation(self):
        grid = IntegratedGrid.uniform(0.0, 1.0, 16)
        rng = np.random.default_rng(11)
        xs = rng.uniform(0.0, 0.3, size=40)
        s = run(UPPER, grid, xs)
        direct = sum(
            w * np.prod([(1 - b) + b * x / UPPER.mu for x in xs])
            for b, w in zip(grid.points, grid.weights)
        )
        assert s.wealth() == pytest.approx(direct, rel=1e-10)

    def test_two_point_grid_with_zero_component(self):
        # mixture over {0, c} with equal weights: wealth = (1 + M(c))/2
        c = 0.45
        grid = IntegratedGrid((0.0, c), (0.5, 0.5))
        xs = [0.02, 0.11, 0.03]
        s = run(UPPER, grid, xs)
        m_c = np.prod([(1 - c) + c * x / UPPER.mu for x in xs])
        assert s.wealth() == pytest.approx((1 + m_c) / 2, rel=1e-12)

    def test_log_concavity_of_realized_wealth_in_c(self):
        rng = np.random.default_rng(7)
        xs = rng.uniform(0.0, 0.4, size=60)
        cs = np.linspace(0.01, 0.99, 99)
        logm = np.array(
            [np.sum(np.log((1 - c) + c * xs / UPPER.mu)) for c in cs]
        )
        second = np.diff(logm, 2)
        assert np.all(second <= 1e-8)

    def test_effective_c_bounds_and_initial_mean(self):
        grid = IntegratedGrid.uniform(0.2, 0.8, 8)
        s = WealthState()
        assert effective_c(s, grid) == pytest.approx(np.mean(grid.points))
        s = run(UPPER, grid, [0.2, 0.3, 0.1])
        ec = effective_c(s, grid)
        assert min(grid.points) <= ec <= max(grid.points)


class TestTwoSided:
    def test_combine_weights_validated(self):
        a, b = WealthState(), WealthState()
        with pytest.raises(DomainError):
            combine_two_sided(a, b, 0.7, 0.7)

    def test_snapshot_mixture_value(self):
        hyp = HypothesisSpec(Direction.POINT_NULL, mu=0.3, alpha=0.05, tau=1.0)
        proc = TwoSidedProcess(hyp, Fixed(0.5))
        for x in [0.9, 0.8, 1.0, 0.95]:
            proc.observe(x)
        manual = 0.5 * proc.minus.wealth() + 0.5 * proc.plus.wealth()
        assert proc.combined.wealth() == pytest.approx(manual, rel=1e-12)

    def test_point_null_rejects_on_high_stream(self):
        hyp = HypothesisSpec(Direction.POINT_NULL, mu=0.1, alpha=0.05, tau=1.0)
        proc = TwoSidedProcess(hyp, Fixed(0.8))
        n = 0
        while proc.combined.rejected_at is None and n < 500:
            proc.observe(1.0)
            n += 1
        assert proc.combined.rejected_at is not None

    def test_running_max_is_monotone(self):
        hyp = HypothesisSpec(Direction.POINT_NULL, mu=0.5, alpha=0.05, tau=1.0)
        proc = TwoSidedProcess(hyp, Fixed(0.4))
        rng = np.random.default_rng(5)
        prev = proc.combined.log_running_max
        for x in rng.uniform(0, 1, size=100):
            proc.observe(float(x))
            assert proc.combined.log_running_max >= prev
            prev = proc.combined.log_running_max
