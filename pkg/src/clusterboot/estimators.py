"""Point and variance estimators for two-stage cluster samples.

Two grand means coexist: the observation-weighted mean (weights n_k/N) and
the unweighted mean of population means. The between-population variance
estimator is the method-of-moments form

    gamma_hat = (K-1)^{-1} Σ (mu_k - mu'_K)² - K^{-1} Σ vhat_k / n_k,

which is exactly unbiased for any design (the two terms have expectations
gamma + sigma²/ñ and sigma²/ñ). A published variant with a K/(K-1) leading
factor and no 1/n_k inside the correction is available behind
``compat_printed`` for comparison; it is biased and not the default.

All reductions here use error-free summation (math.fsum); the Monte Carlo
engine uses the compensated kernels in :mod:`clusterboot.kernels` instead.
"""

import json
import math
from dataclasses import dataclass, asdict

import numpy as np

from .errors import (DegenerateK, EmptyPopulation, NonPositiveVariance,
                     SingletonPopulation)

__all__ = [
    "ClusterSummary", "EstimateReport", "TruthVariances", "summarize",
    "grand_means", "design_constants", "variance_components",
    "variance_estimates", "estimate_report", "studentized_stats",
    "decomposed_stats", "theoretical_variances",
]

_fsum = math.fsum


@dataclass
class ClusterSummary:
    """Per-population sizes, sample means, and unbiased sample variances."""

    sizes: np.ndarray
    mu_hat: np.ndarray
    v_hat: np.ndarray

    @property
    def K(self):
        return int(self.sizes.size)

    @property
    def N(self):
        return int(self.sizes.sum())


@dataclass
class EstimateReport:
    """Every point/variance estimate, plus the inter/intra decomposition.

    ``var_hat_mu_prime_K`` stores the between sum-of-squares over (K-1);
    the variance estimate actually used to studentize the unweighted mean
    is this value divided by K.
    """

    mu_hat_N: float
    mu_hat_prime_K: float
    sigma2_hat: float
    gamma_hat: float
    v_hat: float
    n_star: float
    n_tilde: float
    var_hat_mu_prime_K: float
    var_hat_mu_N: float
    var_inter_mu_N: float
    var_intra_mu_N: float
    var_inter_mu_prime_K: float
    var_intra_mu_prime_K: float

    def to_dict(self):
        return asdict(self)

    def to_json(self, indent=2):
        return json.dumps(self.to_dict(), sort_keys=True, indent=indent)


@dataclass
class TruthVariances:
    """Exact sampling variances of the two grand means under known truth."""

    s2_N: float
    s2_prime_K: float


def summarize(data, allow_singletons=False):
    """Exact per-population means and unbiased variances.

    Raises SingletonPopulation when any n_k == 1, unless
    ``allow_singletons`` is set, in which case the variance is NaN there.
    """
    sizes = data.sizes
    if np.any(sizes < 1):
        raise EmptyPopulation("every population needs at least one value")
    if not allow_singletons and np.any(sizes < 2):
        k = int(np.argmax(sizes < 2))
        raise SingletonPopulation(
            f"population {data.populations[k].id!r} has a single observation; "
            "its variance is undefined")
    mu = np.empty(data.K)
    vh = np.empty(data.K)
    for k, p in enumerate(data.populations):
        vals = p.values
        n = vals.size
        m = _fsum(vals) / n
        mu[k] = m
        vh[k] = _fsum((v - m) ** 2 for v in vals) / (n - 1) if n > 1 else np.nan
    return ClusterSummary(sizes=sizes.copy(), mu_hat=mu, v_hat=vh)


def grand_means(summary):
    """(weighted grand mean, unweighted mean of population means)."""
    n = summary.sizes
    N = summary.N
    mu_N = _fsum(nk * mk for nk, mk in zip(n, summary.mu_hat)) / N
    mu_K = _fsum(summary.mu_hat) / summary.K
    return mu_N, mu_K


def design_constants(sizes):
    """(n_star, n_tilde): squared-weight sum and harmonic mean of sizes."""
    n = np.asarray(sizes, dtype=float)
    N = _fsum(n)
    n_star = _fsum(nk * nk for nk in n) / N ** 2
    n_tilde = n.size / _fsum(1.0 / nk for nk in n)
    return n_star, n_tilde


def variance_components(summary, compat_printed=False, truncate_nonneg=False):
    """(sigma2_hat, gamma_hat, v_hat). gamma_hat may be negative.

    ``truncate_nonneg`` clips gamma_hat at 0 (and v_hat accordingly);
    the default preserves unbiasedness.
    """
    K = summary.K
    if K < 2:
        raise DegenerateK("variance components need at least two populations")
    if np.any(summary.sizes < 2) or np.any(np.isnan(summary.v_hat)):
        raise SingletonPopulation("variance components need every n_k >= 2")
    n = summary.sizes
    N = summary.N
    sigma2 = _fsum(nk * vk for nk, vk in zip(n, summary.v_hat)) / N
    _, mu_K = grand_means(summary)
    ss_between = _fsum((mk - mu_K) ** 2 for mk in summary.mu_hat)
    if compat_printed:
        gamma = (K / (K - 1)) * ss_between - _fsum(summary.v_hat) / K
    else:
        gamma = ss_between / (K - 1) - _fsum(
            vk / nk for vk, nk in zip(summary.v_hat, n)) / K
    if truncate_nonneg and gamma < 0:
        gamma = 0.0
    return sigma2, gamma, gamma + sigma2


def variance_estimates(summary, components=None, compat_printed=False,
                       truncate_nonneg=False):
    """Variance estimates of both grand means plus the decomposition.

    Returns a dict with keys var_hat_mu_prime_K (between SS/(K-1)),
    var_hat_mu_N, var_inter_mu_N, var_intra_mu_N, var_inter_mu_prime_K,
    var_intra_mu_prime_K. ``compat_printed`` divides the within term of
    var_hat_mu_N by N² instead of N (published variant, inconsistent with
    the target variance; off by default).
    """
    K = summary.K
    if K < 2:
        raise DegenerateK("variance estimates need at least two populations")
    if components is None:
        components = variance_components(summary, compat_printed=compat_printed,
                                         truncate_nonneg=truncate_nonneg)
    sigma2, gamma, _ = components
    n = summary.sizes
    N = summary.N
    _, mu_K = grand_means(summary)
    between_var = _fsum((mk - mu_K) ** 2 for mk in summary.mu_hat) / (K - 1)
    n_star, _ = design_constants(n)
    within = sigma2 / N ** 2 if compat_printed else sigma2 / N
    return {
        "var_hat_mu_prime_K": between_var,
        "var_hat_mu_N": n_star * gamma + within,
        "var_inter_mu_N": n_star * gamma,
        "var_intra_mu_N": _fsum(nk * vk for nk, vk in zip(n, summary.v_hat)) / N ** 2,
        "var_inter_mu_prime_K": gamma / K,
        "var_intra_mu_prime_K": _fsum(
            vk / nk for vk, nk in zip(summary.v_hat, n)) / K ** 2,
    }


def estimate_report(data, compat_printed=False, truncate_nonneg=False):
    """Full EstimateReport for a dataset (needs K >= 2, all n_k >= 2)."""
    summary = data if isinstance(data, ClusterSummary) else summarize(data)
    if summary.K < 2:
        raise DegenerateK("a full report needs at least two populations")
    mu_N, mu_K = grand_means(summary)
    comps = variance_components(summary, compat_printed=compat_printed,
                                truncate_nonneg=truncate_nonneg)
    var = variance_estimates(summary, comps, compat_printed=compat_printed)
    n_star, n_tilde = design_constants(summary.sizes)
    sigma2, gamma, v = comps
    return EstimateReport(
        mu_hat_N=mu_N, mu_hat_prime_K=mu_K, sigma2_hat=sigma2,
        gamma_hat=gamma, v_hat=v, n_star=n_star, n_tilde=n_tilde, **var)


def studentized_stats(report, truth_mu):
    """Both grand means centered at the truth over their estimated scales.

    The scale for the unweighted mean is the between sum-of-squares over
    K(K-1), recovered exactly as the sum of its inter and intra variance
    components.
    """
    var_N = report.var_hat_mu_N
    var_K = report.var_inter_mu_prime_K + report.var_intra_mu_prime_K
    if var_N <= 0:
        raise NonPositiveVariance(f"var_hat_mu_N = {var_N} is not positive")
    if var_K <= 0:
        raise NonPositiveVariance(
            f"variance estimate {var_K} for the unweighted mean is not positive")
    t_N = (report.mu_hat_N - truth_mu) / math.sqrt(var_N)
    t_K = (report.mu_hat_prime_K - truth_mu) / math.sqrt(var_K)
    return t_N, t_K


def decomposed_stats(summary, cluster_means, mu):
    """Within/between studentized statistics against known cluster means.

    t_intra contrasts the unweighted mean with the average of the true
    population means; t_inter contrasts that average with the global mean,
    scaled by the between-variance estimate.
    """
    K = summary.K
    if K < 2:
        raise DegenerateK("decomposed statistics need at least two populations")
    mu_bar = _fsum(cluster_means) / K
    _, mu_K = grand_means(summary)
    intra = _fsum(vk / nk for vk, nk in zip(summary.v_hat, summary.sizes)) / K
    if intra <= 0:
        raise NonPositiveVariance("within-population variance estimate is zero")
    _, gamma, _ = variance_components(summary)
    if gamma <= 0:
        raise NonPositiveVariance(
            f"between-variance estimate {gamma} is not positive")
    t_intra = math.sqrt(K) * (mu_K - mu_bar) / math.sqrt(intra)
    t_inter = math.sqrt(K) * (mu_bar - mu) / math.sqrt(gamma)
    return t_intra, t_inter


def theoretical_variances(truth, sizes):
    """Exact variances of both grand means from truth and realized sizes."""
    n = np.asarray(sizes, dtype=float)
    N = _fsum(n)
    K = n.size
    n_star, n_tilde = design_constants(n)
    s2_N = truth.sigma2 / N + truth.gamma * n_star
    s2_K = (truth.gamma + truth.sigma2 / n_tilde) / K
    return TruthVariances(s2_N=s2_N, s2_prime_K=s2_K)
