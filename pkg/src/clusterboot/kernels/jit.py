"""Numba kernel implementations (default backend).

Hot inner loops of the Monte Carlo and bootstrap engines. Contracts match
:mod:`clusterboot.kernels.plain`; see there for argument documentation.
Population/estimator reductions use Kahan compensation so large-N sums of
near-cancelling terms stay accurate.
"""

import numpy as np
from numba import njit

BACKEND = "numba"

_OPTS = dict(cache=True, fastmath=False)


@njit(**_OPTS)
def population_summaries(values, starts, sizes):
    K = starts.shape[0]
    mu = np.empty(K)
    vhat = np.empty(K)
    for k in range(K):
        lo = starts[k]
        m = sizes[k]
        s = 0.0
        c = 0.0
        for i in range(lo, lo + m):
            y = values[i] - c
            t = s + y
            c = (t - s) - y
            s = t
        mk = s / m
        mu[k] = mk
        if m > 1:
            s = 0.0
            c = 0.0
            for i in range(lo, lo + m):
                d = values[i] - mk
                y = d * d - c
                t = s + y
                c = (t - s) - y
                s = t
            vhat[k] = s / (m - 1)
        else:
            vhat[k] = np.nan
    return mu, vhat


@njit(**_OPTS)
def _ksum(x):
    s = 0.0
    c = 0.0
    for i in range(x.shape[0]):
        y = x[i] - c
        t = s + y
        c = (t - s) - y
        s = t
    return s


@njit(**_OPTS)
def estimator_scalars(mu, vhat, sizes):
    K = mu.shape[0]
    n = sizes.astype(np.float64)
    N = _ksum(n)
    mu_N = _ksum(n * mu) / N
    mu_K = _ksum(mu) / K
    nv = _ksum(n * vhat)
    sigma2 = nv / N
    dev = mu - mu_K
    between_var = _ksum(dev * dev) / (K - 1) if K > 1 else np.nan
    vn = _ksum(vhat / n)
    intra_K = vn / (K * K)
    gamma = between_var - vn / K
    nstar = _ksum(n * n) / (N * N)
    ntilde = K / _ksum(1.0 / n)
    var_N = nstar * gamma + sigma2 / N
    intra_N = nv / (N * N)
    dN = mu - mu_N
    spread_w = _ksum(n * dN * dN) / N
    sstar = nstar / (1.0 - nstar) * spread_w if nstar < 1.0 else np.nan
    out = np.empty(12)
    out[0] = mu_N
    out[1] = mu_K
    out[2] = sigma2
    out[3] = gamma
    out[4] = between_var
    out[5] = var_N
    out[6] = intra_N
    out[7] = intra_K
    out[8] = nstar
    out[9] = ntilde
    out[10] = spread_w
    out[11] = sstar
    return out


@njit(**_OPTS)
def _bisect_right(cumw, x):
    lo = 0
    hi = cumw.shape[0]
    while lo < hi:
        mid = (lo + hi) // 2
        if x < cumw[mid]:
            hi = mid
        else:
            lo = mid + 1
    return lo


@njit(**_OPTS)
def b1_replicates(mu, w, cumw, u):
    B, K = u.shape
    nstar = 0.0
    for k in range(K):
        nstar += w[k] * w[k]
    muN = np.empty(B)
    muK = np.empty(B)
    varN = np.empty(B)
    varK = np.empty(B)
    m = np.empty(K)
    for b in range(B):
        sN = 0.0
        sK = 0.0
        for k in range(K):
            j = _bisect_right(cumw, u[b, k])
            if j > K - 1:
                j = K - 1
            m[k] = mu[j]
            sN += w[k] * m[k]
            sK += m[k]
        sK /= K
        spread = 0.0
        ssK = 0.0
        for k in range(K):
            dN = m[k] - sN
            spread += w[k] * dN * dN
            dK = m[k] - sK
            ssK += dK * dK
        muN[b] = sN
        muK[b] = sK
        varN[b] = nstar / (1.0 - nstar) * spread if nstar < 1.0 else np.nan
        varK[b] = ssK / ((K - 1) * K) if K > 1 else 0.0
    return muN, muK, varN, varK


@njit(**_OPTS)
def b2_replicates(values, starts, sizes, u):
    K = sizes.shape[0]
    B = u.shape[0]
    N = 0
    maxm = 0
    for k in range(K):
        N += sizes[k]
        if sizes[k] > maxm:
            maxm = sizes[k]
    buf = np.empty(maxm)
    muN = np.empty(B)
    muK = np.empty(B)
    vint = np.empty(B)
    for b in range(B):
        tot = 0.0
        sK = 0.0
        vi = 0.0
        for k in range(K):
            m = sizes[k]
            lo = starts[k]
            s = 0.0
            for i in range(m):
                j = int(u[b, lo + i] * m)
                if j > m - 1:
                    j = m - 1
                x = values[lo + j]
                buf[i] = x
                s += x
            mk = s / m
            tot += s
            sK += mk
            if m > 1:
                ss = 0.0
                for i in range(m):
                    d = buf[i] - mk
                    ss += d * d
                vi += m / (m - 1.0) * ss
        muN[b] = tot / N
        muK[b] = sK / K
        vint[b] = vi / (float(N) * float(N))
    return muN, muK, vint


@njit(**_OPTS)
def b3_replicates(values, starts, sizes, w, uslot, uwithin):
    B, K = uslot.shape
    muN = np.empty(B)
    muK = np.empty(B)
    varK = np.empty(B)
    m = np.empty(K)
    for b in range(B):
        sN = 0.0
        sK = 0.0
        for k in range(K):
            l = int(uslot[b, k] * K)
            if l > K - 1:
                l = K - 1
            ml = sizes[l]
            lo = starts[l]
            s = 0.0
            for i in range(ml - 1):
                j = int(uwithin[b, k, i] * ml)
                if j > ml - 1:
                    j = ml - 1
                s += values[lo + j]
            m[k] = s / (ml - 1)
            sN += w[k] * m[k]
            sK += m[k]
        sK /= K
        ssK = 0.0
        for k in range(K):
            d = m[k] - sK
            ssK += d * d
        muN[b] = sN
        muK[b] = sK
        varK[b] = ssK / ((K - 1) * K) if K > 1 else 0.0
    return muN, muK, varK
