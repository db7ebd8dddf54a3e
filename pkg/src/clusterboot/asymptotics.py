"""Distributional approximations: normal, one-term Edgeworth, Berry-Esseen.

The one-term Edgeworth refinement of a centered statistic with scale s and
signed weighted third-moment sum t (Σ_k (n_k/N)³ · third central moment of
the k-th population mean) is, with λ = t/(6s³),

    true-scale (normalized) statistic:   Φ(x) + λ(1-x²)φ(x)
    estimated-scale (studentized):       Φ(x) + λ(2x²+1)φ(x)

and the matching quantile inversions subtract λ(1-x²) and λ(1+2x²)
respectively, so evaluating the expansion at the corrected quantile
returns Φ(x) up to O(λ²).
"""

import enum
import math
from dataclasses import dataclass

import numpy as np
from scipy import integrate
from scipy.special import ndtr

from .errors import EmptyInput, InvalidTruth, NonPositiveScale, ZeroGamma
from .model import Normal

__all__ = [
    "normal_cdf", "normal_pdf", "EdgeworthKind", "EdgeworthInputs",
    "edgeworth_cdf", "corrected_quantile", "abs_third_moment",
    "BerryEsseenBound", "berry_esseen_bound", "sup_distance",
    "third_moment_sum_from_truth", "edgeworth_inputs_from_truth",
    "third_moment_sum_plugin",
]

_SQRT2PI = math.sqrt(2.0 * math.pi)


def normal_cdf(x):
    """Standard normal CDF (vectorized, absolute error < 1e-12)."""
    out = ndtr(x)
    return float(out) if np.isscalar(x) else out


def normal_pdf(x):
    """Standard normal density (vectorized)."""
    x = np.asarray(x, dtype=float) if not np.isscalar(x) else x
    out = np.exp(-0.5 * np.square(x)) / _SQRT2PI
    return float(out) if np.isscalar(x) else out


class EdgeworthKind(enum.Enum):
    NORMALIZED = "normalized"
    STUDENTIZED = "studentized"


@dataclass
class EdgeworthInputs:
    """Scale, signed weighted third-moment sum, and statistic kind."""

    s: float
    third_moment_sum: float
    kind: EdgeworthKind = EdgeworthKind.NORMALIZED

    def __post_init__(self):
        if not self.s > 0:
            raise NonPositiveScale(f"scale must be positive, got {self.s}")
        self.kind = EdgeworthKind(self.kind)

    @property
    def lam(self):
        return self.third_moment_sum / (6.0 * self.s ** 3)


def edgeworth_cdf(x, inputs):
    """One-term Edgeworth CDF approximation, clamped to [0, 1]."""
    lam = inputs.lam
    xs = np.asarray(x, dtype=float)
    if inputs.kind is EdgeworthKind.NORMALIZED:
        poly = 1.0 - xs ** 2
    else:
        poly = 2.0 * xs ** 2 + 1.0
    out = ndtr(xs) + lam * poly * np.exp(-0.5 * xs ** 2) / _SQRT2PI
    out = np.clip(out, 0.0, 1.0)
    return float(out) if np.isscalar(x) else out


def corrected_quantile(x, inputs):
    """Quantile point whose expansion value returns Φ(x), to first order."""
    lam = inputs.lam
    xs = np.asarray(x, dtype=float)
    if inputs.kind is EdgeworthKind.NORMALIZED:
        out = xs - lam * (1.0 - xs ** 2)
    else:
        out = xs - lam * (1.0 + 2.0 * xs ** 2)
    return float(out) if np.isscalar(x) else out


# ---------------------------------------------------------------------------
# absolute third moments

_QUAD_OPTS = dict(epsabs=1e-12, epsrel=1e-9, limit=200)


def _abs_third_standard(fam):
    """E|Z|³ for a standardized family, closed form or quadrature."""
    if fam.abs_third is not None:
        return fam.abs_third
    lo, hi = fam.support

    def f(x):
        return abs(x) ** 3 * float(fam.pdf(x))

    total = 0.0
    for a, b in ((lo, 0.0), (0.0, hi)):
        if a < b:
            total += integrate.quad(f, a, b, **_QUAD_OPTS)[0]
    return total


def abs_third_moment(truth):
    """E|X - mu|³ for X = sqrt(gamma)·A + sigma·U under constant V_k.

    Gaussian/Gaussian uses the closed form 2 v^{3/2} sqrt(2/pi); degenerate
    components collapse to a single family; otherwise the convolution is
    integrated numerically to relative tolerance 1e-9.
    """
    if truth.vk_dist is not None:
        raise InvalidTruth("absolute third moment needs constant V_k "
                           "(vk_dist must be None)")
    g = truth.gamma
    s2 = truth.sigma2
    if g == 0 and s2 == 0:
        return 0.0
    if isinstance(truth.effect_dist, Normal) and isinstance(truth.noise_dist, Normal):
        v = g + s2
        return 2.0 * v ** 1.5 * math.sqrt(2.0 / math.pi)
    if g == 0:
        return s2 ** 1.5 * _abs_third_standard(truth.noise_dist)
    if s2 == 0:
        return g ** 1.5 * _abs_third_standard(truth.effect_dist)

    sg = math.sqrt(g)
    ss = math.sqrt(s2)
    famA, famU = truth.effect_dist, truth.noise_dist
    loU, hiU = famU.support

    def inner(a):
        # E|sg·a + ss·U|³ with the kink split out of the integrand
        kink = -sg * a / ss

        def f(u):
            return abs(sg * a + ss * u) ** 3 * float(famU.pdf(u))

        pieces = []
        if loU < kink < hiU:
            pieces = [(loU, kink), (kink, hiU)]
        else:
            pieces = [(loU, hiU)]
        return sum(integrate.quad(f, p0, p1, **_QUAD_OPTS)[0]
                   for p0, p1 in pieces)

    loA, hiA = famA.support
    val = integrate.quad(lambda a: float(famA.pdf(a)) * inner(a),
                         loA, hiA, limit=200, epsabs=1e-10, epsrel=1e-8)[0]
    return val


@dataclass
class BerryEsseenBound:
    """Bound on the scaled sup-distance between sampling and bootstrap laws."""

    C: float
    abs_third_moment: float
    gamma: float
    scaled: float     # bound on K^{1/2+2a}·sup-distance
    unscaled: float   # bound on the sup-distance itself at this design's K

    def to_dict(self):
        return {"C": self.C, "abs_third_moment": self.abs_third_moment,
                "gamma": self.gamma, "scaled": self.scaled,
                "unscaled": self.unscaled}


def berry_esseen_bound(truth, design, C=0.56):
    """4C·E|X-mu|³/gamma^{3/2}, plus its per-K value for this design."""
    if truth.gamma <= 0:
        raise ZeroGamma("the bound divides by gamma^{3/2}; gamma must be > 0")
    m3 = abs_third_moment(truth)
    scaled = 4.0 * C * m3 / truth.gamma ** 1.5
    rate = design.K ** (0.5 + 2.0 * design.alpha)
    return BerryEsseenBound(C=C, abs_third_moment=m3, gamma=truth.gamma,
                            scaled=scaled, unscaled=scaled / rate)


# ---------------------------------------------------------------------------
# Kolmogorov-Smirnov style sup distance

def sup_distance(samples, ref):
    """Exact sup |ECDF(samples) - ref| over the jump points.

    ``ref`` is either a callable CDF or a second sample array (two-sample
    form). Inputs need not be pre-sorted.
    """
    a = np.sort(np.asarray(samples, dtype=float))
    n = a.size
    if n == 0:
        raise EmptyInput("sup_distance needs a non-empty sample")
    if callable(ref):
        f = np.asarray(ref(a), dtype=float)
        hi = np.arange(1, n + 1) / n
        lo = np.arange(0, n) / n
        return float(max(np.max(np.abs(hi - f)), np.max(np.abs(f - lo))))
    b = np.sort(np.asarray(ref, dtype=float))
    m = b.size
    if m == 0:
        raise EmptyInput("sup_distance needs a non-empty reference sample")
    allx = np.concatenate([a, b])
    fa = np.searchsorted(a, allx, side="right") / n
    fb = np.searchsorted(b, allx, side="right") / m
    return float(np.max(np.abs(fa - fb)))


# ---------------------------------------------------------------------------
# third-moment-sum builders

def _m3_cluster_mean(truth, n_k):
    """Signed third central moment of a population mean under the truth."""
    m3a = truth.effect_dist.third_central * truth.gamma ** 1.5
    m3u = truth.noise_dist.third_central * truth.sigma2 ** 1.5
    return m3a + m3u / n_k ** 2


def third_moment_sum_from_truth(truth, sizes):
    """Σ_k (n_k/N)³ · (signed third central moment of the k-th mean)."""
    if truth.vk_dist is not None:
        raise InvalidTruth("third moments need constant V_k")
    n = np.asarray(sizes, dtype=float)
    w = n / n.sum()
    return float(sum(w_k ** 3 * _m3_cluster_mean(truth, n_k)
                     for w_k, n_k in zip(w, n)))


def edgeworth_inputs_from_truth(truth, sizes, kind, s=None):
    """EdgeworthInputs with the exact moment sum; s defaults to the true scale."""
    from .estimators import theoretical_variances
    tms = third_moment_sum_from_truth(truth, sizes)
    if s is None:
        s = math.sqrt(theoretical_variances(truth, sizes).s2_N)
    return EdgeworthInputs(s=s, third_moment_sum=tms, kind=kind)


def third_moment_sum_plugin(summary, mu, use_absolute=False):
    """Plug-in Σ_k (n_k/N)³(mu_k_hat - mu)³ from one dataset.

    ``use_absolute`` swaps in |mu_k_hat - mu|³ (published variant; a valid
    expansion needs the signed form, which is the default).
    """
    n = summary.sizes.astype(float)
    w = n / n.sum()
    d = summary.mu_hat - mu
    if use_absolute:
        return float(np.sum((w * np.abs(d)) ** 3))
    return float(np.sum(w ** 3 * d ** 3))
