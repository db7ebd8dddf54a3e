"""Four resampling schemes with exact bootstrap moments and intervals.

Schemes
-------
B2_INDIVIDUALS  keep the K populations, resample n_k values within each
B1_UNIFORM      resample K populations uniformly, values carried verbatim
B1_WEIGHTED     resample K populations with probabilities n_k/N
B3_CLUSTER      resample populations uniformly, then n_l - 1 values within

Replicate statistics keep the original design weights per slot:
mu_star_N = Σ_k (n_k/N)·mu_star_k and mu_star_prime_K = K^{-1} Σ mu_star_k,
where mu_star_k is the mean of whatever slot k received. Under this
convention every closed-form bootstrap mean/variance below is exact, which
:func:`enumerate_bootstrap` verifies outcome-by-outcome on tiny data.

Each replicate also records a studentizing scale, the square root of the
scheme's own variance estimator evaluated on the resample:

==============  ============================================================
B2_INDIVIDUALS  N^{-2} Σ (n_k-1)·vstar_k,  vstar_k = n_k/(n_k-1)² Σ(X*-m*)²
B1_UNIFORM      (K(K-1))^{-1} Σ (m*_k - m*')²          (variance of m*')
B1_WEIGHTED     n*/(1-n*) · N^{-1} Σ n_k (m*_k - m*_N)²
B3_CLUSTER      (K(K-1))^{-1} Σ (m*_k - m*')²
==============  ============================================================

The B1_WEIGHTED factor n*/(1-n*) makes the estimator exactly unbiased for
the resampling variance of mu_star_N under any design (it reduces to
K/(K-1)·n* when sizes are constant).
"""

import csv
import enum
import itertools
import json
import math
from dataclasses import dataclass

import numpy as np
from scipy.special import ndtri

from . import kernels
from .errors import (DegenerateK, InsufficientReplicates, NonPositiveVariance,
                     SingletonPopulation, TooLarge)
from .estimators import summarize, grand_means, design_constants
from .model import ClusterDataset, Population
from .rng import NS_BOOTSTRAP, substream

__all__ = [
    "SchemeTag", "BootstrapMoments", "BootstrapRun", "IntervalEstimate",
    "resample_b2", "resample_b1_uniform", "resample_b1_weighted",
    "resample_b3", "bootstrap_moments", "bootstrap_variance_estimators",
    "run_bootstrap", "confidence_interval", "enumerate_bootstrap",
    "quantile_type7",
]

_fsum = math.fsum

MAX_ENUM_OUTCOMES = 1_000_000


class SchemeTag(enum.Enum):
    B2_INDIVIDUALS = "b2"
    B1_UNIFORM = "b1u"
    B1_WEIGHTED = "b1w"
    B3_CLUSTER = "b3"

    @classmethod
    def parse(cls, text):
        if isinstance(text, cls):
            return text
        t = str(text).strip().lower()
        for tag in cls:
            if t in (tag.value, tag.name.lower()):
                return tag
        raise ValueError(f"unknown scheme {text!r}; expected one of "
                         f"{[t.value for t in cls]}")


# target statistic of each scheme, and whether inference on the weighted
# grand mean is supported (B3's resampling variance for it is inflated and
# the scheme is diagnostic-only there; B1_UNIFORM centers it on the
# unweighted mean instead).
SCHEME_TARGET = {
    SchemeTag.B2_INDIVIDUALS: "mu_N",
    SchemeTag.B1_UNIFORM: "mu_prime_K",
    SchemeTag.B1_WEIGHTED: "mu_N",
    SchemeTag.B3_CLUSTER: "mu_prime_K",
}
SCHEME_SUPPORTS_MU_N = {
    SchemeTag.B2_INDIVIDUALS: True,
    SchemeTag.B1_UNIFORM: False,
    SchemeTag.B1_WEIGHTED: True,
    SchemeTag.B3_CLUSTER: False,
}


# ---------------------------------------------------------------------------
# object-level resamplers

def resample_b2(data, rng):
    """Resample values with replacement within each population."""
    pops = []
    for p in data.populations:
        idx = rng.integers(0, p.values.size, p.values.size)
        pops.append(Population(p.id, p.values[idx]))
    return ClusterDataset(pops)


def resample_b1_uniform(data, rng):
    """Resample K populations uniformly; values carried verbatim."""
    K = data.K
    idx = rng.integers(0, K, K)
    return ClusterDataset([Population(data.populations[l].id,
                                      data.populations[l].values.copy())
                           for l in idx])


def resample_b1_weighted(data, rng):
    """Resample K populations with probabilities n_l/N; values verbatim."""
    cumw = np.cumsum(data.sizes) / data.N
    cumw[-1] = 1.0
    idx = np.searchsorted(cumw, rng.random(data.K), side="right")
    np.clip(idx, 0, data.K - 1, out=idx)
    return ClusterDataset([Population(data.populations[l].id,
                                      data.populations[l].values.copy())
                           for l in idx])


def resample_b3(data, rng):
    """Resample populations uniformly, then n_l - 1 values within each."""
    if np.any(data.sizes < 2):
        raise SingletonPopulation("two-stage resampling needs every n_k >= 2")
    K = data.K
    pops = []
    for _ in range(K):
        l = int(rng.integers(0, K))
        src = data.populations[l]
        m = src.values.size
        idx = rng.integers(0, m, m - 1)
        pops.append(Population(src.id, src.values[idx]))
    return ClusterDataset(pops)


# ---------------------------------------------------------------------------
# closed-form bootstrap moments

@dataclass
class BootstrapMoments:
    """Exact mean/variance of the two replicate statistics under a scheme."""

    scheme: SchemeTag
    e_mu_star_N: float
    var_mu_star_N: float
    e_mu_star_prime_K: float
    var_mu_star_prime_K: float
    supports_mu_N: bool

    def to_dict(self):
        return {"scheme": self.scheme.value,
                "e_mu_star_N": self.e_mu_star_N,
                "var_mu_star_N": self.var_mu_star_N,
                "e_mu_star_prime_K": self.e_mu_star_prime_K,
                "var_mu_star_prime_K": self.var_mu_star_prime_K,
                "supports_mu_N": self.supports_mu_N}


def bootstrap_moments(summary, scheme):
    """Closed-form bootstrap moments from the observed summary."""
    scheme = SchemeTag.parse(scheme)
    n = summary.sizes.astype(float)
    K = summary.K
    N = summary.N
    mu = summary.mu_hat
    vh = summary.v_hat
    mu_N, mu_K = grand_means(summary)
    n_star, _ = design_constants(n)
    if scheme is SchemeTag.B2_INDIVIDUALS:
        eN, eK = mu_N, mu_K
        vN = _fsum((nk - 1) * vk for nk, vk in zip(n, vh)) / N ** 2
        vK = _fsum((nk - 1) / nk ** 2 * vk for nk, vk in zip(n, vh)) / K ** 2
    elif scheme is SchemeTag.B1_UNIFORM:
        ss = _fsum((m - mu_K) ** 2 for m in mu)
        eN = eK = mu_K
        vN = n_star * ss / K
        vK = ss / K ** 2
    elif scheme is SchemeTag.B1_WEIGHTED:
        slot = _fsum(nk * (m - mu_N) ** 2 for nk, m in zip(n, mu)) / N
        eN = eK = mu_N
        vN = n_star * slot
        vK = slot / K
    else:  # B3_CLUSTER
        slot = _fsum((m - mu_K) ** 2 + vk / nk
                     for m, vk, nk in zip(mu, vh, n)) / K
        eN = eK = mu_K
        vN = n_star * slot
        vK = slot / K
    return BootstrapMoments(scheme=scheme, e_mu_star_N=eN, var_mu_star_N=vN,
                            e_mu_star_prime_K=eK, var_mu_star_prime_K=vK,
                            supports_mu_N=SCHEME_SUPPORTS_MU_N[scheme])


def bootstrap_variance_estimators(resample, scheme, original,
                                  compat_printed=False):
    """The scheme's variance estimator evaluated on one resampled dataset.

    ``original`` is the observed-data ClusterSummary supplying the design
    constants (slot weights, n*). Returns the B2 per-population vstar array
    for B2_INDIVIDUALS and a scalar for the other schemes (see module
    docstring for the formulas). ``compat_printed`` switches the weighted
    scheme to the uncorrected textbook normalization
    n*/(n*-1)·Σ n_k(m*_k - m*_N)², which is negative whenever the spread is
    positive (n* < 1); it exists for comparison only.
    """
    scheme = SchemeTag.parse(scheme)
    rs = summarize(resample, allow_singletons=True)
    K = original.K
    n = original.sizes.astype(float)
    N = original.N
    w = n / N
    if scheme is SchemeTag.B2_INDIVIDUALS:
        out = np.empty(K)
        for k, p in enumerate(resample.populations):
            m = p.values.size
            if m < 2:
                raise SingletonPopulation(
                    "vstar needs at least two values per population")
            mk = rs.mu_hat[k]
            out[k] = m / (m - 1) ** 2 * _fsum((x - mk) ** 2 for x in p.values)
        return out
    slot_means = rs.mu_hat
    if K < 2:
        raise DegenerateK("population-scheme estimators need K >= 2")
    if scheme in (SchemeTag.B1_UNIFORM, SchemeTag.B3_CLUSTER):
        mK = _fsum(slot_means) / K
        ss = _fsum((m - mK) ** 2 for m in slot_means)
        if scheme is SchemeTag.B1_UNIFORM:
            return ss / (K - 1)          # variance of the slot means
        return ss / (K * (K - 1))        # variance estimate of m*'
    n_star = float(w @ w)
    mN = _fsum(wk * m for wk, m in zip(w, slot_means))
    if compat_printed:
        ss = _fsum(nk * (m - mN) ** 2 for nk, m in zip(n, slot_means))
        return n_star / (n_star - 1.0) * ss
    spread = _fsum(wk * (m - mN) ** 2 for wk, m in zip(w, slot_means))
    return n_star / (1.0 - n_star) * spread


# ---------------------------------------------------------------------------
# Monte Carlo runner

@dataclass
class BootstrapRun:
    """Replicate statistics plus analytic moments for one scheme run."""

    scheme: SchemeTag
    B: int
    seed: int
    mu_star_N: np.ndarray
    mu_star_prime_K: np.ndarray
    scale: np.ndarray
    center_mu_N: float
    center_mu_prime_K: float
    moments: BootstrapMoments

    @property
    def target(self):
        return SCHEME_TARGET[self.scheme]

    def target_stats(self):
        return self.mu_star_N if self.target == "mu_N" else self.mu_star_prime_K

    def target_center(self):
        return self.center_mu_N if self.target == "mu_N" else self.center_mu_prime_K

    def bootstrap_se(self):
        return float(np.std(self.target_stats(), ddof=1))

    def t_values(self):
        """Per-replicate studentized statistics (inf where a scale is 0)."""
        ts = self.target_stats() - self.target_center()
        with np.errstate(divide="ignore", invalid="ignore"):
            out = ts / self.scale
        return np.where(np.isnan(out), 0.0, out)

    def to_dict(self):
        return {
            "scheme": self.scheme.value, "B": self.B, "seed": self.seed,
            "target": self.target,
            "center_mu_N": self.center_mu_N,
            "center_mu_prime_K": self.center_mu_prime_K,
            "analytic_moments": self.moments.to_dict(),
            "mc_moments": {
                "e_mu_star_N": float(np.mean(self.mu_star_N)),
                "var_mu_star_N": float(np.var(self.mu_star_N, ddof=1))
                if self.B > 1 else 0.0,
                "e_mu_star_prime_K": float(np.mean(self.mu_star_prime_K)),
                "var_mu_star_prime_K": float(np.var(self.mu_star_prime_K, ddof=1))
                if self.B > 1 else 0.0,
            },
        }

    def to_json(self, indent=2):
        return json.dumps(self.to_dict(), sort_keys=True, indent=indent)

    def replicates_to_csv(self, path):
        with open(path, "w", newline="") as fh:
            w = csv.writer(fh)
            w.writerow(["replicate", "mu_star_N", "mu_star_prime_K", "scale"])
            for b in range(self.B):
                w.writerow([b, format(self.mu_star_N[b], ".17g"),
                            format(self.mu_star_prime_K[b], ".17g"),
                            format(self.scale[b], ".17g")])


def _chunk_rows(row_len, budget=4_000_000):
    return max(1, int(budget // max(row_len, 1)))


def replicate_stats(values, starts, sizes, scheme, B, rng):
    """Replicate statistic arrays for B resamples drawn from ``rng``.

    Replicate b consumes the b-th row of the uniform block, a fixed counter
    range of the stream, so results are independent of chunking. Returns
    (mu_star_N, mu_star_prime_K, scale).
    """
    scheme = SchemeTag.parse(scheme)
    sizes = np.asarray(sizes, dtype=np.int64)
    starts = np.asarray(starts, dtype=np.int64)
    K = sizes.size
    N = int(sizes.sum())
    w = sizes / N
    if scheme is SchemeTag.B1_UNIFORM:
        cumw = np.arange(1, K + 1) / K
        row_len = K
    elif scheme is SchemeTag.B1_WEIGHTED:
        cumw = np.cumsum(sizes) / N
        cumw[-1] = 1.0
        row_len = K
    elif scheme is SchemeTag.B2_INDIVIDUALS:
        row_len = N
    else:
        if np.any(sizes < 2):
            raise SingletonPopulation(
                "two-stage resampling needs every n_k >= 2")
        maxm = int(sizes.max())
        row_len = K * (1 + (maxm - 1))
    if scheme in (SchemeTag.B1_UNIFORM, SchemeTag.B1_WEIGHTED):
        mu, _ = kernels.population_summaries(values, starts, sizes)
    outN = np.empty(B)
    outK = np.empty(B)
    outS = np.empty(B)
    done = 0
    chunk = _chunk_rows(row_len)
    while done < B:
        nb = min(chunk, B - done)
        u = rng.random((nb, row_len))
        if scheme in (SchemeTag.B1_UNIFORM, SchemeTag.B1_WEIGHTED):
            muN, muK, varN, varK = kernels.b1_replicates(mu, w, cumw, u)
            var = varN if scheme is SchemeTag.B1_WEIGHTED else varK
        elif scheme is SchemeTag.B2_INDIVIDUALS:
            muN, muK, var = kernels.b2_replicates(values, starts, sizes, u)
        else:
            maxm = int(sizes.max())
            uslot = u[:, :K]
            uwin = u[:, K:].reshape(nb, K, maxm - 1)
            muN, muK, var = kernels.b3_replicates(values, starts, sizes, w,
                                                  uslot, uwin)
        sl = slice(done, done + nb)
        outN[sl] = muN
        outK[sl] = muK
        outS[sl] = np.sqrt(np.maximum(var, 0.0))
        done += nb
    return outN, outK, outS


def run_bootstrap(data, scheme, B, seed):
    """Run B resampling replicates; reproducible given (data, scheme, B, seed)."""
    if B < 1:
        raise InsufficientReplicates(f"B must be >= 1, got {B}")
    scheme = SchemeTag.parse(scheme)
    summary = summarize(data, allow_singletons=True)
    mu_N, mu_K = grand_means(summary)
    rng = substream(seed, NS_BOOTSTRAP)
    muN, muK, scale = replicate_stats(data.values, data.starts, data.sizes,
                                      scheme, B, rng)
    return BootstrapRun(scheme=scheme, B=B, seed=int(seed),
                        mu_star_N=muN, mu_star_prime_K=muK, scale=scale,
                        center_mu_N=mu_N, center_mu_prime_K=mu_K,
                        moments=bootstrap_moments(summary, scheme))


# ---------------------------------------------------------------------------
# intervals

@dataclass
class IntervalEstimate:
    method: str
    level: float
    lower: float
    upper: float

    def to_dict(self):
        return {"method": self.method, "level": self.level,
                "lower": self.lower, "upper": self.upper}


def quantile_type7(x, p):
    """Linear-interpolation quantile between order statistics.

    Tolerates infinite entries (degenerate studentized replicates): when the
    two bracketing order statistics coincide, that value is returned without
    interpolating, so an interior quantile stays finite and an extreme one
    honestly reports the infinite atom.
    """
    xs = np.sort(np.asarray(x, dtype=float))
    n = xs.size
    if n == 1:
        return float(xs[0])
    h = (n - 1) * float(p)
    lo = int(math.floor(h))
    lo = min(max(lo, 0), n - 1)
    hi = min(lo + 1, n - 1)
    a, b = xs[lo], xs[hi]
    f = h - lo
    if f <= 0.0 or a == b:
        return float(a)
    if not math.isfinite(a) or not math.isfinite(b):
        # interpolating toward an infinite order statistic degenerates to it
        if math.isfinite(b):
            return float(a)
        if math.isfinite(a):
            return float(b)
        return math.nan
    return float(a + f * (b - a))


def confidence_interval(run, point=None, scale=None, method="percentile",
                        level=0.95, edgeworth=None):
    """Confidence interval from a bootstrap run.

    point defaults to the run's target center; scale defaults to the
    bootstrap SE of the replicate statistics. ``edgeworth`` supplies the
    EdgeworthInputs for the corrected-normal method.
    """
    if not 0.0 < level < 1.0:
        raise ValueError(f"level must be in (0, 1), got {level}")
    alpha = 1.0 - level
    if run.B < 20.0 / min(alpha, 1.0 - alpha):
        raise InsufficientReplicates(
            f"B={run.B} replicates cannot resolve level {level}; "
            f"need at least {math.ceil(20.0 / min(alpha, 1.0 - alpha))}")
    if point is None:
        point = run.target_center()
    if scale is None:
        scale = run.bootstrap_se()
    ts = run.target_stats()
    if method == "percentile":
        lo = quantile_type7(ts, alpha / 2)
        hi = quantile_type7(ts, 1 - alpha / 2)
    elif method == "normal":
        z = float(ndtri(1 - alpha / 2))
        lo, hi = point - z * scale, point + z * scale
    elif method == "bootstrap_t":
        t = run.t_values()
        if not np.all(np.isfinite(run.scale)) or np.any(run.scale <= 0):
            bad = int(np.sum(~(run.scale > 0)))
            if bad == run.B:
                raise NonPositiveVariance("no positive replicate scales")
        lo = point - quantile_type7(t, 1 - alpha / 2) * scale
        hi = point - quantile_type7(t, alpha / 2) * scale
    elif method == "edgeworth_corrected":
        from .asymptotics import corrected_quantile
        if edgeworth is None:
            raise ValueError("edgeworth_corrected needs EdgeworthInputs")
        z = float(ndtri(1 - alpha / 2))
        lo = point - corrected_quantile(z, edgeworth) * scale
        hi = point - corrected_quantile(-z, edgeworth) * scale
    else:
        raise ValueError(f"unknown interval method {method!r}")
    if lo > hi:
        lo, hi = hi, lo
    return IntervalEstimate(method=method, level=level, lower=float(lo),
                            upper=float(hi))


# ---------------------------------------------------------------------------
# exhaustive enumeration oracle

@dataclass
class ExactBootstrapDistribution:
    """Every resampling outcome with its probability and statistics.

    ``estimator`` holds the scheme's variance-estimator value per outcome
    (the squared studentizing scale of :func:`replicate_stats`), so its
    bootstrap expectation can be checked exactly too.
    """

    scheme: SchemeTag
    probs: np.ndarray
    mu_star_N: np.ndarray
    mu_star_prime_K: np.ndarray
    estimator: np.ndarray

    @property
    def n_outcomes(self):
        return self.probs.size

    def _moments(self, x):
        e = _fsum(p * v for p, v in zip(self.probs, x))
        v = _fsum(p * (v_ - e) ** 2 for p, v_ in zip(self.probs, x))
        return e, v

    def e_var_mu_star_N(self):
        return self._moments(self.mu_star_N)

    def e_var_mu_star_prime_K(self):
        return self._moments(self.mu_star_prime_K)

    def e_estimator(self):
        return _fsum(p * v for p, v in zip(self.probs, self.estimator))

    def total_probability(self):
        return _fsum(self.probs)


def _b2_outcome_count(sizes):
    total = 1
    for m in sizes:
        total *= int(m) ** int(m)
        if total > MAX_ENUM_OUTCOMES:
            return total
    return total


def _b3_outcome_count(sizes):
    per_slot = sum(int(m) ** (int(m) - 1) for m in sizes)
    total = 1
    for _ in range(len(sizes)):
        total *= per_slot
        if total > MAX_ENUM_OUTCOMES:
            return total
    return total


def enumerate_bootstrap(data, scheme):
    """Exact bootstrap distribution of (mu_star_N, mu_star_prime_K).

    Only feasible for tiny datasets; raises TooLarge beyond 10^6 outcomes.
    """
    scheme = SchemeTag.parse(scheme)
    sizes = data.sizes
    K = data.K
    N = data.N
    w = sizes / N
    n_star = float(w @ w)
    summary = summarize(data, allow_singletons=True)
    mu = summary.mu_hat

    if scheme in (SchemeTag.B1_UNIFORM, SchemeTag.B1_WEIGHTED):
        count = K ** K
        if count > MAX_ENUM_OUTCOMES:
            raise TooLarge(f"{count} outcomes exceed {MAX_ENUM_OUTCOMES}")
        draw_p = np.full(K, 1.0 / K) if scheme is SchemeTag.B1_UNIFORM else w
        slot_options = [[(float(draw_p[l]), float(mu[l])) for l in range(K)]] * K
    elif scheme is SchemeTag.B2_INDIVIDUALS:
        count = _b2_outcome_count(sizes)
        if count > MAX_ENUM_OUTCOMES:
            raise TooLarge(f"{count} outcomes exceed {MAX_ENUM_OUTCOMES}")
        slot_options = []
        for p in data.populations:
            m = p.values.size
            opts = []
            prob = m ** (-float(m))
            for tup in itertools.product(range(m), repeat=m):
                vals = p.values[list(tup)]
                opts.append((prob, float(vals.mean()), vals))
            slot_options.append(opts)
    else:
        if np.any(sizes < 2):
            raise SingletonPopulation(
                "two-stage resampling needs every n_k >= 2")
        count = _b3_outcome_count(sizes)
        if count > MAX_ENUM_OUTCOMES:
            raise TooLarge(f"{count} outcomes exceed {MAX_ENUM_OUTCOMES}")
        marg = []
        for l, p in enumerate(data.populations):
            m = p.values.size
            prob = (1.0 / K) * m ** (-float(m - 1))
            for tup in itertools.product(range(m), repeat=m - 1):
                marg.append((prob, float(p.values[list(tup)].mean())))
        slot_options = [marg] * K

    probs, muNs, muKs, est = [], [], [], []
    for combo in itertools.product(*slot_options):
        prob = math.prod(c[0] for c in combo)
        means = [c[1] for c in combo]
        mN = _fsum(w[k] * means[k] for k in range(K))
        mK = _fsum(means) / K
        if scheme is SchemeTag.B2_INDIVIDUALS:
            vint = 0.0
            for k, c in enumerate(combo):
                vals = c[2]
                m = vals.size
                if m > 1:
                    vint += m / (m - 1) * _fsum((x - c[1]) ** 2 for x in vals)
            e = vint / N ** 2
        elif scheme is SchemeTag.B1_WEIGHTED:
            spread = _fsum(w[k] * (means[k] - mN) ** 2 for k in range(K))
            e = n_star / (1 - n_star) * spread if n_star < 1 else np.nan
        else:
            e = (_fsum((m - mK) ** 2 for m in means) / (K * (K - 1))
                 if K > 1 else 0.0)
        probs.append(prob)
        muNs.append(mN)
        muKs.append(mK)
        est.append(e)
    return ExactBootstrapDistribution(
        scheme=scheme, probs=np.array(probs), mu_star_N=np.array(muNs),
        mu_star_prime_K=np.array(muKs), estimator=np.array(est))
