import math

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from clusterboot import (ClusterDataset, ClusterSummary, TruthParams,
                         summarize, grand_means,
                         design_constants, variance_components,
                         variance_estimates, estimate_report,
                         studentized_stats, decomposed_stats,
                         theoretical_variances)
from clusterboot.errors import (DegenerateK, NonPositiveVariance,
                                SingletonPopulation)
from clusterboot.model import generate_arrays
from clusterboot.rng import substream


class TestSummarize:
    def test_d0_hand_values(self, d0):
        s = summarize(d0)
        assert np.allclose(s.mu_hat, [2.0, 4.0])
        assert np.allclose(s.v_hat, [2.0, 8.0])

    def test_constant_population(self):
        s = summarize(ClusterDataset.from_values([[7.0, 7.0, 7.0], [1.0, 2.0]]))
        assert s.mu_hat[0] == 7.0 and s.v_hat[0] == 0.0

    def test_two_point_population(self):
        s = summarize(ClusterDataset.from_values([[0.0, 2.0], [5.0, 5.0]]))
        assert s.mu_hat[0] == 1.0 and s.v_hat[0] == 2.0

    def test_singleton_flagged(self):
        data = ClusterDataset.from_values([[1.0], [2.0, 3.0]])
        with pytest.raises(SingletonPopulation):
            summarize(data)
        s = summarize(data, allow_singletons=True)
        assert s.mu_hat[0] == 1.0 and math.isnan(s.v_hat[0])


class TestGrandMeans:
    def test_d0_balanced(self, d0):
        assert grand_means(summarize(d0)) == (3.0, 3.0)

    def test_weighted_vs_unweighted(self):
        s = ClusterSummary(sizes=np.array([1, 3]), mu_hat=np.array([0.0, 4.0]),
                           v_hat=np.array([np.nan, 1.0]))
        mu_N, mu_K = grand_means(s)
        assert mu_N == 3.0 and mu_K == 2.0

    def test_single_population(self):
        s = summarize(ClusterDataset.from_values([[1.0, 2.0, 3.0]]))
        mu_N, mu_K = grand_means(s)
        assert mu_N == mu_K == 2.0


class TestDesignConstants:
    def test_balanced_pair(self):
        n_star, n_tilde = design_constants([2, 2])
        assert n_star == 0.5 and n_tilde == 2.0

    def test_unbalanced(self):
        n_star, n_tilde = design_constants([1, 3])
        assert n_star == 10.0 / 16.0
        assert n_tilde == pytest.approx(1.5)

    def test_single_population(self):
        n_star, n_tilde = design_constants([7])
        assert n_star == 1.0 and n_tilde == 7.0

    def test_nstar_below_max_over_N(self):
        rng = np.random.default_rng(1)
        for _ in range(50):
            n = rng.integers(1, 20, rng.integers(2, 8))
            n_star, _ = design_constants(n)
            assert n_star < n.max() / n.sum() + 1e-15


class TestVarianceComponents:
    def test_d0_hand_values(self, d0):
        sigma2, gamma, v = variance_components(summarize(d0))
        assert sigma2 == 5.0
        assert gamma == pytest.approx(-0.5, abs=1e-15)  # negative is legal
        assert v == pytest.approx(4.5, abs=1e-15)

    def test_constant_data_all_zero(self):
        data = ClusterDataset.from_values([[3.0, 3.0], [3.0, 3.0, 3.0]])
        sigma2, gamma, v = variance_components(summarize(data))
        assert sigma2 == 0.0 and gamma == 0.0 and v == 0.0

    def test_truncation_option(self, d0):
        _, gamma, v = variance_components(summarize(d0), truncate_nonneg=True)
        assert gamma == 0.0 and v == 5.0

    def test_printed_variant_differs(self, d0):
        s = summarize(d0)
        _, gamma_default, _ = variance_components(s)
        _, gamma_printed, _ = variance_components(s, compat_printed=True)
        # printed form: 2/1 * 2 - (2+8)/2 = -1.0
        assert gamma_printed == pytest.approx(-1.0)
        assert gamma_printed != gamma_default

    def test_degenerate_k(self):
        with pytest.raises(DegenerateK):
            variance_components(summarize(ClusterDataset.from_values([[1.0, 2.0]])))

    @pytest.mark.slow
    def test_unbiased_by_monte_carlo(self):
        # moment-matched form: E gamma_hat = gamma even unbalanced
        truth = TruthParams(mu=0.0, gamma=1.0, sigma2=1.0)
        sizes = np.array([2, 3, 4, 2, 5, 3, 2, 4, 3, 2])
        starts = np.concatenate(([0], np.cumsum(sizes[:-1])))
        gammas, sigmas = [], []
        for r in range(4000):
            rng = substream(2024, 0, r)
            vals, _ = generate_arrays(truth, sizes, rng)
            s = summarize(ClusterDataset.from_values(
                np.split(vals, starts[1:])))
            sg, gm, _ = variance_components(s)
            gammas.append(gm)
            sigmas.append(sg)
        gammas = np.array(gammas)
        sigmas = np.array(sigmas)
        assert abs(gammas.mean() - 1.0) < 3 * gammas.std(ddof=1) / 63.2
        assert abs(sigmas.mean() - 1.0) < 3 * sigmas.std(ddof=1) / 63.2


class TestVarianceEstimates:
    def test_d0_hand_values(self, d0):
        s = summarize(d0)
        v = variance_estimates(s)
        assert v["var_hat_mu_prime_K"] == 2.0
        assert v["var_hat_mu_N"] == pytest.approx(1.0, abs=1e-15)
        assert v["var_intra_mu_N"] == 1.25
        assert v["var_intra_mu_prime_K"] == 1.25
        assert v["var_inter_mu_N"] == pytest.approx(-0.25, abs=1e-15)

    def test_constant_data_zero(self):
        data = ClusterDataset.from_values([[1.0, 1.0], [1.0, 1.0]])
        v = variance_estimates(summarize(data))
        assert all(x == 0.0 for x in v.values())

    def test_printed_variant_hand_value(self, d0):
        s = summarize(d0)
        default = variance_estimates(s)["var_hat_mu_N"]
        printed = variance_estimates(s, compat_printed=True)["var_hat_mu_N"]
        # printed gamma = -1.0 and the within term becomes sigma2/N²:
        # 0.5*(-1) + 5/16 = -0.1875, vs the default 0.5*(-0.5) + 5/4 = 1.0
        assert default == pytest.approx(1.0)
        assert printed == pytest.approx(-0.1875)

    def test_balanced_intra_terms_agree(self):
        rng = np.random.default_rng(5)
        data = ClusterDataset.from_values(rng.normal(0, 1, (6, 4)))
        v = variance_estimates(summarize(data))
        assert v["var_intra_mu_N"] == pytest.approx(v["var_intra_mu_prime_K"],
                                                    rel=1e-12)


class TestReportAndStats:
    def test_report_additivity_exact(self, tiny_unbalanced):
        rep = estimate_report(tiny_unbalanced)
        assert rep.v_hat == rep.gamma_hat + rep.sigma2_hat
        # decomposition reassembles both variance estimates
        assert rep.var_hat_mu_N == pytest.approx(
            rep.var_inter_mu_N + rep.var_intra_mu_N, rel=1e-12)
        K = tiny_unbalanced.K
        assert rep.var_hat_mu_prime_K / K == pytest.approx(
            rep.var_inter_mu_prime_K + rep.var_intra_mu_prime_K, rel=1e-12)

    def test_report_json_field_names(self, d0):
        rep = estimate_report(d0)
        d = rep.to_dict()
        assert set(d) == {
            "mu_hat_N", "mu_hat_prime_K", "sigma2_hat", "gamma_hat", "v_hat",
            "n_star", "n_tilde", "var_hat_mu_prime_K", "var_hat_mu_N",
            "var_inter_mu_N", "var_intra_mu_N", "var_inter_mu_prime_K",
            "var_intra_mu_prime_K"}

    def test_studentized_zero_and_unit(self, d0):
        rep = estimate_report(d0)
        t_N, t_K = studentized_stats(rep, truth_mu=rep.mu_hat_N)
        assert t_N == 0.0 and t_K == 0.0
        shifted = rep.mu_hat_N - math.sqrt(rep.var_hat_mu_N)
        t_N, _ = studentized_stats(rep, truth_mu=shifted)
        assert t_N == pytest.approx(1.0)

    def test_studentized_nonpositive_variance(self):
        data = ClusterDataset.from_values([[1.0, 1.0], [1.0, 1.0]])
        with pytest.raises(NonPositiveVariance):
            studentized_stats(estimate_report(data), truth_mu=0.0)

    def test_decomposed_noise_free_flagged(self):
        data = ClusterDataset.from_values([[2.0, 2.0], [5.0, 5.0]])
        with pytest.raises(NonPositiveVariance):
            decomposed_stats(summarize(data), cluster_means=[2.0, 5.0], mu=3.5)

    def test_decomposed_gamma_zero_numerator(self):
        rng = np.random.default_rng(8)
        data = ClusterDataset.from_values(rng.normal(0, 1, (5, 6)) + 2.0)
        s = summarize(data)
        # cluster means all equal mu: t_inter numerator is exactly 0
        try:
            _, t_inter = decomposed_stats(s, cluster_means=[2.0] * 5, mu=2.0)
            assert t_inter == 0.0
        except NonPositiveVariance:
            pass  # legal when the between-variance estimate is negative


class TestTheoreticalVariances:
    def test_formulas(self):
        truth = TruthParams(mu=0.0, gamma=1.0, sigma2=1.0)
        tv = theoretical_variances(truth, [2, 2])
        # sigma2/N + gamma*n* and (gamma + sigma2/ntilde)/K
        assert tv.s2_N == pytest.approx(1.0 / 4 + 0.5)
        assert tv.s2_prime_K == pytest.approx((1.0 + 0.5) / 2)


@st.composite
def balanced_groups(draw):
    K = draw(st.integers(2, 5))
    n = draw(st.integers(2, 4))
    vals = draw(st.lists(
        st.lists(st.floats(-100, 100), min_size=n, max_size=n),
        min_size=K, max_size=K))
    return vals


@given(balanced_groups())
@settings(max_examples=60, deadline=None)
def test_balanced_identity(groups):
    """Equal sizes make the two grand means coincide (to round-off)."""
    data = ClusterDataset.from_values(groups)
    mu_N, mu_K = grand_means(summarize(data))
    scale = max(1.0, abs(mu_N), abs(mu_K))
    assert abs(mu_N - mu_K) <= 1e-12 * scale


@given(st.lists(st.lists(st.floats(-1e3, 1e3), min_size=2, max_size=5),
                min_size=2, max_size=5))
@settings(max_examples=60, deadline=None)
def test_additivity_property(groups):
    data = ClusterDataset.from_values(groups)
    sigma2, gamma, v = variance_components(summarize(data))
    assert v == gamma + sigma2  # defined identity
    assert sigma2 >= 0.0
