import numpy as np
import pytest

from clusterboot import ClusterDataset, DesignParams, TruthParams


@pytest.fixture
def d0():
    """Two populations, [1,3] and [2,6]: every estimator is hand-evaluable.

    mu_hat = (2, 4), vhat = (2, 8), N = 4, K = 2, mu_hat_N = mu'_K = 3,
    sigma2_hat = (2*2 + 2*8)/4 = 5, gamma_hat = 2 - (1 + 4)/2 = -0.5,
    n* = 1/2, ntilde = 2, between-SS/(K-1) = 2, var_hat(mu_N) = 1.0.
    """
    return ClusterDataset.from_values([[1.0, 3.0], [2.0, 6.0]])


@pytest.fixture
def tiny_unbalanced():
    """K=2 with n=(2,3): discriminates slot weights from naive recomputation."""
    return ClusterDataset.from_values([[1.0, 3.0], [2.0, 6.0, 7.0]])


@pytest.fixture
def gaussian_truth():
    return TruthParams(mu=1.0, gamma=1.0, sigma2=1.0)


def random_tiny_dataset(rng, max_k=3, max_n=3):
    """Random dataset with K <= 3, n_k <= 3 (enumeration stays tiny)."""
    K = int(rng.integers(2, max_k + 1))
    groups = [rng.normal(0, 1, int(rng.integers(2, max_n + 1)))
              for _ in range(K)]
    return ClusterDataset.from_values([np.round(g, 3) for g in groups])


def balanced_design(K, n, alpha=0.4):
    return DesignParams.balanced(K, n, alpha=alpha)
