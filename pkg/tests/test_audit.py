import itertools
import math
import warnings

import numpy as np
import pytest

from wealthtest.audit import (
    AuditItem,
    AuditPopulation,
    NotYetDecidable,
    NullSatisfiedWarning,
    StratifiedTest,
    WithoutReplacementState,
    acceptance_plan,
    aicpa_sample_size,
    pps_draw,
    residual_mean,
    wr_update,
)
from wealthtest.core import DomainError


def simple_population():
    return AuditPopulation(
        [AuditItem("a", 30.0, 30.0), AuditItem("b", 70.0, 63.0)]
    )


class TestPopulation:
    def test_csv_round_trip(self):
        text = "id,book_value,audited_value\nx1,100,95\nx2,50,\nx3,25,25\n"
        pop = AuditPopulation.from_csv(text)
        assert len(pop) == 3
        assert pop.get("x1").taint == pytest.approx(0.05)
        assert pop.get("x2").audited_value is None

    def test_duplicate_ids_rejected(self):
        with pytest.raises(DomainError):
            AuditPopulation([AuditItem("a", 1.0), AuditItem("a", 2.0)])

    def test_taint_range_enforced(self):
        with pytest.raises(DomainError):
            AuditItem("a", 10.0, 12.0)

    def test_pps_bin_boundaries(self):
        pop = simple_population()
        assert pps_draw(pop, 0.3).id == "a"       # boundary belongs to the left bin
        assert pps_draw(pop, 0.30001).id == "b"
        assert pps_draw(pop, 1.0).id == "b"
        with pytest.raises(DomainError):
            pps_draw(pop, 0.0)


class TestWithoutReplacement:
    def test_residual_mean_oracle(self):
        pop = AuditPopulation([AuditItem(str(i), 10.0) for i in range(10)])
        st = WithoutReplacementState()
        st = wr_update(st, pop.items[0], 0.2, 0.5, pop, 0.05, 0.05)
        with warnings.catch_warnings():
            warnings.simplefilter("ignore")
            m = residual_mean(st, pop, 0.05)
        assert m == pytest.approx((0.05 * 100 - 2.0) / 90.0)

    def test_null_satisfied_warning(self):
        pop = AuditPopulation([AuditItem(str(i), 10.0) for i in range(10)])
        st = WithoutReplacementState()
        st = wr_update(st, pop.items[0], 1.0, 0.5, pop, 0.05, 0.05)
        with pytest.warns(NullSatisfiedWarning):
            m = residual_mean(st, pop, 0.05)
        assert m < 0

    def test_duplicate_draw_rejected(self):
        pop = simple_population()
        st = WithoutReplacementState()
        st = wr_update(st, pop.get("a"), 0.0, 0.5, pop, 0.05, 0.05)
        with pytest.raises(DomainError):
            wr_update(st, pop.get("a"), 0.0, 0.5, pop, 0.05, 0.05)

    def test_supermartingale_exhaustive_six_items(self):
        # a 6-item population whose PPS-expected taint equals mu exactly; the
        # conditional expected factor at every reachable history is exactly 1,
        # so E[M_k] = 1 for every k: verified by exhaustive enumeration over
        # all ordered prefixes of draws.
        mu, alpha, c = 0.25, 0.05, 0.5
        taints = [0.0, 0.1, 0.2, 0.3, 0.4, 0.5]   # equal books: mean = 0.25 = mu
        items = [AuditItem(f"i{j}", 10.0, 10.0 * (1 - t)) for j, t in enumerate(taints)]
        pop = AuditPopulation(items)

        for k in range(1, 6):
            total = 0.0
            count = 0
            for perm in itertools.permutations(range(6), k):
                st = WithoutReplacementState()
                for j in perm:
                    st = wr_update(st, items[j], taints[j], c, pop, mu, alpha)
                total += math.exp(st.wealth.log_wealth)
                count += 1
            assert total / count == pytest.approx(1.0, abs=1e-12)


class TestStratified:
    @staticmethod
    def populated_test():
        t = StratifiedTest([0.4, 0.6], mu=0.1)
        rng = np.random.default_rng(51)
        for _ in range(15):
            t.update(0, float(rng.uniform(0.05, 0.6)), 0.5)
        for _ in range(25):
            t.update(1, float(rng.uniform(0.0, 0.4)) + 0.01, 0.4)
        return t

    def test_not_yet_decidable(self):
        t = StratifiedTest([0.5, 0.5], mu=0.1)
        t.update(0, 0.3, 0.5)   # stratum 1 has no positive bet yet
        with pytest.raises(NotYetDecidable):
            t.worst_case_log_wealth()

    def test_constrained_minimum_vs_grid_search(self):
        t = self.populated_test()
        worst, m_star = t.worst_case_log_wealth()
        # dense search over the hyperplane p0*m0 + p1*m1 = mu
        p0, p1 = t.probs
        best = math.inf
        for m0 in np.linspace(1e-4, (t.mu - 1e-5) / p0, 60001):
            m1 = (t.mu - p0 * m0) / p1
            if m1 <= 0:
                continue
            best = min(best, t.log_wealth([m0, m1]))
        assert worst == pytest.approx(best, abs=1e-6)
        assert np.dot(t.probs, m_star) == pytest.approx(t.mu, rel=1e-9)

    def test_rejection_threshold(self):
        t = self.populated_test()
        worst, _ = t.worst_case_log_wealth()
        assert t.rejects(0.05) == (worst >= math.log(20.0))


class TestAcceptancePlan:
    def test_bet_size_and_boundaries(self):
        plan = acceptance_plan(mu=0.05, theta=0.02, alpha=0.05, beta=0.1)
        assert plan.c == pytest.approx(0.6)
        assert plan.a_accept == pytest.approx(0.9 / 0.05)
        assert plan.b_reject == pytest.approx(0.1 / 0.95)
        assert plan.a_safe == pytest.approx(20.0)
        assert plan.b_safe == pytest.approx(0.1)

    def test_reciprocal_wealth_targets_theta(self):
        # the plan's factor at E(T) = theta has expectation 1 in reciprocal:
        # theta = (1 - c) mu links the two one-sided tests
        plan = acceptance_plan(mu=0.05, theta=0.02, alpha=0.05, beta=0.1)
        assert (1 - plan.c) * plan.mu == pytest.approx(plan.theta)

    def test_decisions(self):
        plan = acceptance_plan(mu=0.05, theta=0.02, alpha=0.05, beta=0.1)
        assert plan.decide(25.0) == "accept_lot"
        assert plan.decide(0.05) == "reject_lot"
        assert plan.decide(1.0) == "continue"
        assert plan.decide(19.0, refined=False) == "continue"

    def test_invalid_order_rejected(self):
        with pytest.raises(DomainError):
            acceptance_plan(mu=0.02, theta=0.05, alpha=0.05, beta=0.1)


class TestAicpa:
    def test_reference_value(self):
        assert aicpa_sample_size(0.05, 0.02, 0.05) == (162, pytest.approx(3.24))

    def test_zero_expected_taint_limit(self):
        # nu -> 0 recovers the attribute-sampling size ceil(log(1/alpha)/mu-ish)
        n, crit = aicpa_sample_size(0.05, 1e-12, 0.05)
        assert n == math.ceil(-math.log(0.05) / 0.05)
        assert crit == pytest.approx(0.0, abs=1e-9)

    def test_monotone_in_mu_and_nu(self):
        base, _ = aicpa_sample_size(0.05, 0.02, 0.05)
        tighter, _ = aicpa_sample_size(0.04, 0.02, 0.05)
        looser, _ = aicpa_sample_size(0.06, 0.02, 0.05)
        assert tighter >= base >= looser
        more_taint, _ = aicpa_sample_size(0.05, 0.03, 0.05)
        less_taint, _ = aicpa_sample_size(0.05, 0.01, 0.05)
        assert more_taint >= base >= less_taint

    def test_invalid_args(self):
        with pytest.raises(DomainError):
            aicpa_sample_size(0.02, 0.05, 0.05)
