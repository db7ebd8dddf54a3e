"""Pure-numpy kernel implementations (fallback backend).

Same contracts as :mod:`clusterboot.kernels.jit`; selected via the
``CLUSTERBOOT_BACKEND=numpy`` environment flag or when numba is absent.
All kernels take uniforms in [0, 1) rather than a generator, so a given
draw block produces the same resamples on either backend.
"""

import numpy as np

BACKEND = "numpy"


def population_summaries(values, starts, sizes):
    """Per-population sample means and unbiased variances.

    values : float64[N] observations, populations contiguous
    starts : int64[K] offset of each population in ``values``
    sizes  : int64[K] population sizes (>= 1)

    Returns (mu[K], vhat[K]); vhat is NaN where the population is a singleton.
    """
    # extended-precision accumulation stands in for the jit path's Kahan
    # compensation (reduceat's summation order can cancel catastrophically)
    ext = values.astype(np.longdouble)
    sums = np.add.reduceat(ext, starts)
    mu = (sums / sizes).astype(np.float64)
    dev = (ext - np.repeat(mu, sizes)) ** 2
    ss = np.add.reduceat(dev, starts)
    vhat = np.where(sizes > 1,
                    (ss / np.maximum(sizes - 1, 1)).astype(np.float64), np.nan)
    return mu, vhat


def estimator_scalars(mu, vhat, sizes):
    """All point/variance estimator scalars from per-population summaries.

    Returns float64[12]:
      0 mu_hat_N        weighted grand mean
      1 mu_hat_prime_K  unweighted mean of population means
      2 sigma2_hat      within-variance estimate
      3 gamma_hat       between-variance estimate (moment-matched, untruncated)
      4 between_var     sample variance of the population means
      5 var_mu_N        n*·gamma_hat + sigma2_hat/N
      6 intra_mu_N      N^{-2} Σ n_k vhat_k
      7 intra_mu_K      K^{-2} Σ vhat_k/n_k
      8 n_star
      9 n_tilde
     10 spread_w        N^{-1} Σ n_k (mu_k - mu_N)²
     11 sstar_orig      n*/(1-n*)·spread_w (weighted-scheme scale functional)
    """
    n = sizes.astype(np.float64)
    K = n.shape[0]
    N = n.sum()
    w = n / N
    mu_N = float(w @ mu)
    mu_K = float(mu.mean())
    nv = float((n * vhat).sum())
    sigma2 = nv / N
    dev = mu - mu_K
    between_var = float(dev @ dev) / (K - 1) if K > 1 else np.nan
    vn = float((vhat / n).sum())
    intra_K = vn / K ** 2
    gamma = between_var - vn / K
    nstar = float(n @ n) / N ** 2
    ntilde = K / float((1.0 / n).sum())
    var_N = nstar * gamma + sigma2 / N
    intra_N = nv / N ** 2
    dN = mu - mu_N
    spread_w = float(w @ (dN * dN))
    sstar = nstar / (1.0 - nstar) * spread_w if nstar < 1.0 else np.nan
    return np.array([mu_N, mu_K, sigma2, gamma, between_var, var_N,
                     intra_N, intra_K, nstar, ntilde, spread_w, sstar])


def b1_replicates(mu, w, cumw, u):
    """Population-resampling replicate statistics (uniform or weighted draws).

    mu   : float64[K] observed population means
    w    : float64[K] original slot weights n_k/N
    cumw : float64[K] cumulative draw probabilities (last entry 1.0);
           uniform scheme passes k/K, weighted passes cumsum(n)/N
    u    : float64[B, K] uniforms

    Returns (mu_star_N[B], mu_star_K[B], varN_est[B], varK_est[B]) where
    varN_est is the weighted-scheme variance estimator and varK_est estimates
    the variance of mu_star_K (between sum-of-squares / (K(K-1))).
    """
    B, K = u.shape
    idx = np.searchsorted(cumw, u, side="right")
    np.clip(idx, 0, K - 1, out=idx)
    m = mu[idx]
    muN = m @ w
    muK = m.mean(axis=1)
    dN = m - muN[:, None]
    spread = (dN * dN) @ w
    nstar = float(w @ w)
    varN = nstar / (1.0 - nstar) * spread if nstar < 1.0 else np.full(B, np.nan)
    dK = m - muK[:, None]
    varK = (dK * dK).sum(axis=1) / ((K - 1) * K) if K > 1 else np.zeros(B)
    return muN, muK, varN, varK


def b2_replicates(values, starts, sizes, u):
    """Within-population resampling replicate statistics.

    u : float64[B, N] uniforms, one column per original observation slot.

    Returns (mu_star_N[B], mu_star_K[B], var_intra_est[B]) with
    var_intra_est = N^{-2} Σ_k (n_k-1)·vstar_k, the replicate's unbiased
    estimate of the resampling variance of mu_star_N.
    """
    K = sizes.shape[0]
    B = u.shape[0]
    N = int(sizes.sum())
    tot = np.zeros(B)
    muK = np.zeros(B)
    vint = np.zeros(B)
    for k in range(K):
        m = int(sizes[k])
        lo = int(starts[k])
        idx = (u[:, lo:lo + m] * m).astype(np.int64)
        np.clip(idx, 0, m - 1, out=idx)
        draws = values[lo + idx]
        s = draws.sum(axis=1)
        mk = s / m
        d = draws - mk[:, None]
        ss = (d * d).sum(axis=1)
        tot += s
        muK += mk
        if m > 1:
            vint += m / (m - 1) * ss   # (m-1)·vstar_k with vstar_k = m/(m-1)²·ss
    return tot / N, muK / K, vint / N ** 2


def b3_replicates(values, starts, sizes, w, uslot, uwithin):
    """Two-stage resampling replicate statistics.

    uslot   : float64[B, K] uniforms choosing source populations
    uwithin : float64[B, K, maxm-1] uniforms for the within draws; slot k uses
              the first n_l - 1 entries when it lands on population l.

    Returns (mu_star_N[B], mu_star_K[B], varK_est[B]) with
    varK_est = (K(K-1))^{-1} Σ (mu_star_k - mu_star_K)².
    """
    B, K = uslot.shape
    l = (uslot * K).astype(np.int64)
    np.clip(l, 0, K - 1, out=l)
    m_l = sizes[l]
    cnt = (m_l - 1).astype(np.float64)
    idx = (uwithin * m_l[:, :, None]).astype(np.int64)
    np.clip(idx, 0, (m_l - 1)[:, :, None], out=idx)
    v = values[starts[l][:, :, None] + idx]
    mask = np.arange(uwithin.shape[2])[None, None, :] < (m_l - 1)[:, :, None]
    slot_mean = (v * mask).sum(axis=2) / cnt
    muN = slot_mean @ w
    muK = slot_mean.mean(axis=1)
    dK = slot_mean - muK[:, None]
    varK = (dK * dK).sum(axis=1) / ((K - 1) * K) if K > 1 else np.zeros(B)
    return muN, muK, varK
