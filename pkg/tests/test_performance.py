import math
import warnings

import numpy as np
import pytest

from wealthtest.performance import (
    Bernoulli,
    BetaDist,
    BoundaryOptimumWarning,
    Empirical,
    NoGrowthError,
    PointMass,
    ScaledBernoulli,
    TwoPoint,
    c_max,
    c_opt,
    lambda_derivatives,
    lambda_of_c,
    log_factor_moments,
    sample_size_report,
    type1_band,
    worst_case,
)

MU = 0.05


def random_instance(rng):
    kind = rng.integers(0, 3)
    if kind == 0:
        nu = float(rng.uniform(MU + 0.01, 0.9))
        return Bernoulli(nu)
    if kind == 1:
        y = float(rng.uniform(0.3, 1.0))
        p = float(rng.uniform(0.2, 0.9))
        return TwoPoint(0.0, y, p) if y * p > MU + 0.01 else Bernoulli(0.5)
    vals = rng.uniform(0.0, 1.0, size=int(rng.integers(3, 12)))
    if vals.mean() <= MU + 0.01:
        vals = vals + MU
    return Empirical(tuple(vals))


class TestLambda:
    def test_zero_at_c_zero(self):
        assert lambda_of_c(Bernoulli(0.3), 0.0, MU) == 0.0

    def test_minus_inf_at_c_one_with_zero_atom(self):
        assert lambda_of_c(Bernoulli(0.3), 1.0, MU) == float("-inf")

    def test_concavity_on_grid(self):
        cs = np.linspace(0.01, 0.95, 80)
        for dist in (Bernoulli(0.3), TwoPoint(0.0, 0.8, 0.4), BetaDist(2, 98)):
            lam = np.array([lambda_of_c(dist, c, MU) for c in cs])
            assert np.all(np.diff(lam, 2) <= 1e-8)

    def test_derivative_vs_central_differences(self):
        eps = 1e-6
        for dist in (Bernoulli(0.3), TwoPoint(0.1, 0.9, 0.5), Empirical((0.1, 0.4, 0.7))):
            for c in (0.1, 0.4, 0.7):
                d1, d2 = lambda_derivatives(dist, c, MU)
                num1 = (lambda_of_c(dist, c + eps, MU) - lambda_of_c(dist, c - eps, MU)) / (
                    2 * eps
                )
                assert d1 == pytest.approx(num1, abs=1e-6)
                eps2 = 1e-4   # cancellation dominates a second difference at 1e-6
                num2 = (
                    lambda_of_c(dist, c + eps2, MU)
                    - 2 * lambda_of_c(dist, c, MU)
                    + lambda_of_c(dist, c - eps2, MU)
                ) / eps2**2
                assert d2 == pytest.approx(num2, rel=1e-4)

    def test_beta_quadrature_against_monte_carlo(self):
        dist = BetaDist(2, 98)
        rng = np.random.default_rng(9)
        xs = rng.beta(2, 98, size=400_000)
        c = 0.8
        mc = np.mean(np.log((1 - c) + c * xs / MU))
        assert lambda_of_c(dist, c, MU) == pytest.approx(mc, abs=3e-3)


class TestOptimalBets:
    def test_c_opt_is_stationary(self):
        for dist in (Bernoulli(0.3), TwoPoint(0.05, 0.7, 0.3), BetaDist(2, 8)):
            co = c_opt(dist, MU)
            if co < 1.0 - 1e-9:
                d1, _ = lambda_derivatives(dist, co, MU)
                assert abs(d1) < 1e-5

    def test_c_opt_at_least_worst_case_c0(self):
        # against any distribution with mean theta and variance sigma^2, the
        # optimal bet is no smaller than the worst-case two-point bet c0
        rng = np.random.default_rng(31)
        checked = 0
        while checked < 100:
            dist = random_instance(rng)
            from wealthtest.performance import dist_mean

            theta = dist_mean(dist)
            if theta <= MU + 1e-6:
                continue
            if isinstance(dist, BetaDist):
                continue
            from wealthtest.performance import atoms

            vals, probs = atoms(dist)
            sigma2 = float(np.dot(probs, (vals - theta) ** 2))
            if sigma2 <= 1e-12:
                continue
            wc = worst_case(theta, sigma2, MU)
            with warnings.catch_warnings():
                warnings.simplefilter("ignore", BoundaryOptimumWarning)
                co = c_opt(dist, MU)
            assert co >= wc.c0 - 1e-6
            checked += 1

    def test_no_growth_raises(self):
        with pytest.raises(NoGrowthError):
            c_opt(Bernoulli(0.04), MU)

    def test_c_max_is_a_root_beyond_c_opt(self):
        dist = TwoPoint(0.02, 0.9, 0.2)
        co = c_opt(dist, MU)
        with warnings.catch_warnings():
            warnings.simplefilter("ignore", BoundaryOptimumWarning)
            cm = c_max(dist, MU)
        if cm < 1.0:
            assert cm > co
            assert abs(lambda_of_c(dist, cm, MU)) < 1e-6

    def test_point_mass_optimum_is_all_in(self):
        # a constant stream above mu never loses: bet everything
        assert c_opt(PointMass(0.5), MU) == 1.0


class TestWorstCase:
    def test_structure(self):
        wc = worst_case(0.98, 0.98 * 0.02, 0.95)
        assert wc.tau == pytest.approx(1.0)
        assert wc.c0 == pytest.approx(0.6)

    def test_kl_matches_fine_grid_scan(self):
        theta, sigma2, mu = 0.4, 0.05, 0.2
        wc = worst_case(theta, sigma2, mu)
        dist = TwoPoint(0.0, wc.tau, theta / wc.tau)
        cs = np.linspace(1e-4, 1 - 1e-4, 20001)
        lam = np.array([lambda_of_c(dist, c, mu) for c in cs])
        assert lam.max() == pytest.approx(wc.kl_value, abs=1e-6)
        assert cs[lam.argmax()] == pytest.approx(wc.c0, abs=1e-3)

    def test_scaled_bernoulli_matches_two_point(self):
        sb = ScaledBernoulli(0.2, 0.1)
        tp = TwoPoint(0.0, 0.2, 0.1)
        for c in (0.1, 0.5, 0.9):
            assert lambda_of_c(sb, c, 0.01) == pytest.approx(
                lambda_of_c(tp, c, 0.01), abs=1e-14
            )


class TestSampleSize:
    def test_omega_benchmarks_to_4dp(self):
        # growth rates for the x = 1 - t scale with mu = 0.95, theta = 0.98
        omega_1 = lambda_of_c(PointMass(0.98), 1.0, 0.95)
        omega_theta = lambda_of_c(PointMass(0.98), 0.6, 0.95)
        omega_m = worst_case(0.98, 0.98 * 0.02, 0.95).kl_value
        assert round(omega_m, 5) == pytest.approx(0.01214, abs=5e-6)
        assert round(omega_theta, 5) == pytest.approx(0.01877, abs=5e-6)
        assert round(omega_1, 5) == pytest.approx(0.03109, abs=5e-6)

    def test_expected_n(self):
        omega = lambda_of_c(PointMass(0.98), 1.0, 0.95)
        rep = sample_size_report(omega, 0.0, 0.05)
        assert rep.expected_n == pytest.approx(math.log(20) / omega)
        assert rep.lorden_upper >= rep.expected_n

    def test_renewal_numbers(self):
        omega, rho2 = log_factor_moments(Bernoulli(0.3), 0.5, MU)
        rep = sample_size_report(omega, rho2, 0.05)
        assert rep.var_n == pytest.approx(math.log(20) * rho2 / omega**3)

    def test_nonpositive_growth_rejected(self):
        with pytest.raises(NoGrowthError):
            sample_size_report(0.0, 0.1, 0.05)


class TestType1Band:
    def test_band_endpoints(self):
        lo, hi = type1_band(0.05, 0.6, 0.05)
        assert hi == 0.05
        assert lo == pytest.approx(0.05 / (0.4 + 0.6 / 0.95), rel=1e-12)

    def test_band_collapses_as_c_to_zero(self):
        lo, hi = type1_band(0.05, 1e-9, 0.05)
        assert hi - lo < 1e-9
