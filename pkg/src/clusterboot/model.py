"""Two-stage cluster data: domain types, generative model, CSV round-trip.

The generative model is a nested random-effects structure: population k has
a random level shift a_k (mean 0, variance ``gamma``) and its observations
add i.i.d. noise u_ki (mean 0, variance V_k, with E V_k = ``sigma2``), so
the marginal variance of an observation is gamma + sigma2 and observations
within a population have covariance gamma.
"""

import csv
import math
from dataclasses import dataclass, field

import numpy as np

from .errors import (EmptyPopulation, InvalidDesign, InvalidTruth,
                     MalformedInput)
from .rng import NS_POPULATION, substream

__all__ = [
    "Normal", "ShiftedExponential", "ShiftedLognormal", "GammaUnitMean",
    "family_from_spec", "TruthParams", "DesignParams", "Population",
    "ClusterDataset", "subsample_sizes", "generate_dataset",
]


# ---------------------------------------------------------------------------
# distribution families (standardized: mean 0, variance 1)

class Normal:
    name = "normal"
    support = (-math.inf, math.inf)
    third_central = 0.0
    abs_third = 2.0 * math.sqrt(2.0 / math.pi)

    def sample(self, rng, size):
        return rng.standard_normal(size)

    def pdf(self, x):
        return np.exp(-0.5 * np.asarray(x) ** 2) / math.sqrt(2.0 * math.pi)

    def to_spec(self):
        return {"name": self.name}


class ShiftedExponential:
    """Exponential shifted to mean 0: E - 1 with E ~ Exp(1). Skewness 2."""

    name = "shifted_exponential"
    support = (-1.0, math.inf)
    third_central = 2.0
    abs_third = 12.0 / math.e - 2.0

    def sample(self, rng, size):
        return rng.exponential(1.0, size) - 1.0

    def pdf(self, x):
        x = np.asarray(x, dtype=float)
        out = np.where(x >= -1.0, np.exp(-(x + 1.0)), 0.0)
        return out

    def to_spec(self):
        return {"name": self.name}


class ShiftedLognormal:
    """Lognormal recentered/rescaled to mean 0, variance 1.

    ``sigma`` is the log-scale shape; skewness is (e^{s²}+2)·sqrt(e^{s²}-1)
    (≈ 2.26 at the default 0.6).
    """

    name = "shifted_lognormal"

    def __init__(self, sigma=0.6):
        if sigma <= 0:
            raise InvalidTruth(f"lognormal sigma must be > 0, got {sigma}")
        self.sigma = float(sigma)
        s2 = self.sigma ** 2
        self._mean = math.exp(s2 / 2.0)
        self._sd = math.sqrt((math.exp(s2) - 1.0) * math.exp(s2))
        self.support = (-self._mean / self._sd, math.inf)
        self.third_central = (math.exp(s2) + 2.0) * math.sqrt(math.exp(s2) - 1.0)
        self.abs_third = None  # no closed form; quadrature in asymptotics

    def sample(self, rng, size):
        return (rng.lognormal(0.0, self.sigma, size) - self._mean) / self._sd

    def pdf(self, x):
        x = np.asarray(x, dtype=float)
        w = self._sd * x + self._mean
        out = np.zeros_like(w)
        pos = w > 0
        wp = w[pos]
        out[pos] = (self._sd / (wp * self.sigma * math.sqrt(2 * math.pi))
                    * np.exp(-np.log(wp) ** 2 / (2 * self.sigma ** 2)))
        return out

    def to_spec(self):
        return {"name": self.name, "sigma": self.sigma}


class GammaUnitMean:
    """Nonnegative unit-mean gamma multiplier, the hook for random V_k."""

    name = "gamma_unit_mean"

    def __init__(self, shape=4.0):
        if shape <= 0:
            raise InvalidTruth(f"gamma shape must be > 0, got {shape}")
        self.shape = float(shape)

    def sample(self, rng, size):
        return rng.gamma(self.shape, 1.0 / self.shape, size)

    def to_spec(self):
        return {"name": self.name, "shape": self.shape}


def family_from_spec(spec):
    """Build a family from a name or {'name': ..., extra params} mapping."""
    if spec is None:
        return None
    if isinstance(spec, str):
        spec = {"name": spec}
    if not isinstance(spec, dict) or "name" not in spec:
        raise MalformedInput(f"bad distribution spec: {spec!r}")
    name = spec["name"]
    kw = {k: v for k, v in spec.items() if k != "name"}
    table = {
        "normal": Normal,
        "shifted_exponential": ShiftedExponential,
        "shifted_lognormal": ShiftedLognormal,
        "gamma_unit_mean": GammaUnitMean,
    }
    if name not in table:
        raise MalformedInput(f"unknown distribution family {name!r}")
    return table[name](**kw)


# ---------------------------------------------------------------------------
# parameter types

@dataclass
class TruthParams:
    """Generative parameters: global mean, between/within variances, families.

    ``vk_dist`` optionally draws per-population variance multipliers
    (nonnegative, unit mean) so V_k = sigma2 * W_k; default is the constant
    V_k = sigma2.
    """

    mu: float
    gamma: float
    sigma2: float
    effect_dist: object = field(default_factory=Normal)
    noise_dist: object = field(default_factory=Normal)
    vk_dist: object = None

    def __post_init__(self):
        if self.gamma < 0:
            raise InvalidTruth(f"gamma must be >= 0, got {self.gamma}")
        if self.sigma2 < 0:
            raise InvalidTruth(f"sigma2 must be >= 0, got {self.sigma2}")

    @property
    def marginal_variance(self):
        return self.gamma + self.sigma2

    def to_dict(self):
        d = {"mu": self.mu, "gamma": self.gamma, "sigma2": self.sigma2,
             "effect_dist": self.effect_dist.to_spec(),
             "noise_dist": self.noise_dist.to_spec()}
        if self.vk_dist is not None:
            d["vk_dist"] = self.vk_dist.to_spec()
        return d

    @classmethod
    def from_dict(cls, d):
        return cls(mu=float(d["mu"]), gamma=float(d["gamma"]),
                   sigma2=float(d["sigma2"]),
                   effect_dist=family_from_spec(d.get("effect_dist", "normal")),
                   noise_dist=family_from_spec(d.get("noise_dist", "normal")),
                   vk_dist=family_from_spec(d.get("vk_dist")))


@dataclass
class DesignParams:
    """Number of populations, growth exponent, and per-population constants.

    Subsample sizes follow n_k = max(2, round(c_k * K**alpha)) with
    0 < alpha < 1/2; rounding is half-up.
    """

    K: int
    alpha: float
    c: object = 1.0  # scalar or length-K sequence

    def __post_init__(self):
        if int(self.K) != self.K or self.K < 1:
            raise InvalidDesign(f"K must be a positive integer, got {self.K}")
        self.K = int(self.K)
        if not (0.0 < self.alpha < 0.5):
            raise InvalidDesign(
                f"alpha must lie strictly in (0, 1/2), got {self.alpha}")
        c = np.atleast_1d(np.asarray(self.c, dtype=float))
        if c.size == 1:
            c = np.full(self.K, c[0])
        if c.size != self.K:
            raise InvalidDesign(f"c has length {c.size}, expected K={self.K}")
        if not np.all(np.isfinite(c)) or np.any(c <= 0):
            raise InvalidDesign("every c_k must be positive and finite")
        self.c = c

    def sizes(self):
        raw = self.c * self.K ** self.alpha
        n = np.floor(raw + 0.5).astype(np.int64)  # half-up, not banker's
        return np.maximum(n, 2)

    @classmethod
    def balanced(cls, K, n, alpha=0.4):
        """Design whose size rule yields exactly n observations everywhere."""
        if n < 2:
            raise InvalidDesign(f"balanced design needs n >= 2, got {n}")
        return cls(K=K, alpha=alpha, c=float(n) / K ** alpha)

    def to_dict(self):
        c = self.c
        c_out = float(c[0]) if np.all(c == c[0]) else [float(x) for x in c]
        return {"K": self.K, "alpha": self.alpha, "c": c_out}

    @classmethod
    def from_dict(cls, d):
        return cls(K=int(d["K"]), alpha=float(d["alpha"]), c=d.get("c", 1.0))


def subsample_sizes(design):
    """Per-population subsample sizes n_k for a design."""
    return design.sizes()


# ---------------------------------------------------------------------------
# datasets

@dataclass
class Population:
    id: str
    values: np.ndarray

    def __post_init__(self):
        v = np.asarray(self.values, dtype=float)
        if v.ndim != 1 or v.size == 0:
            raise EmptyPopulation(f"population {self.id!r} has no values")
        if not np.all(np.isfinite(v)):
            raise MalformedInput(f"population {self.id!r} has non-finite values")
        self.values = v


class ClusterDataset:
    """An ordered collection of populations with their observed values."""

    def __init__(self, populations):
        populations = list(populations)
        if not populations:
            raise EmptyPopulation("dataset has no populations")
        self.populations = populations
        self.sizes = np.array([p.values.size for p in populations],
                              dtype=np.int64)
        self.starts = np.concatenate(([0], np.cumsum(self.sizes[:-1])))
        self.values = np.concatenate([p.values for p in populations])

    @property
    def K(self):
        return len(self.populations)

    @property
    def N(self):
        return int(self.sizes.sum())

    def ids(self):
        return [p.id for p in self.populations]

    @classmethod
    def from_values(cls, groups, ids=None):
        """Build from a sequence of value lists."""
        if ids is None:
            ids = [f"p{k + 1}" for k in range(len(list(groups)))]
        return cls([Population(i, np.asarray(g, dtype=float))
                    for i, g in zip(ids, groups)])

    def __eq__(self, other):
        if not isinstance(other, ClusterDataset):
            return NotImplemented
        return (self.ids() == other.ids()
                and all(np.array_equal(a.values, b.values)
                        for a, b in zip(self.populations, other.populations)))

    # -- CSV interface: header population_id,value; populations contiguous --

    def to_csv(self, path):
        with open(path, "w", newline="") as fh:
            w = csv.writer(fh)
            w.writerow(["population_id", "value"])
            for p in self.populations:
                for v in p.values:
                    w.writerow([p.id, format(v, ".17g")])

    @classmethod
    def from_csv(cls, path):
        groups = []
        seen = {}
        with open(path, newline="") as fh:
            r = csv.reader(fh)
            header = next(r, None)
            if header is None or [h.strip() for h in header] != ["population_id", "value"]:
                raise MalformedInput(
                    f"{path}: line 1: expected header 'population_id,value'")
            for lineno, row in enumerate(r, start=2):
                if not row or (len(row) == 1 and not row[0].strip()):
                    continue
                if len(row) != 2:
                    raise MalformedInput(f"{path}: line {lineno}: expected 2 fields")
                pid = row[0]
                try:
                    v = float(row[1])
                except ValueError:
                    raise MalformedInput(
                        f"{path}: line {lineno}: not a number: {row[1]!r}") from None
                if not math.isfinite(v):
                    raise MalformedInput(f"{path}: line {lineno}: non-finite value")
                if groups and groups[-1][0] == pid:
                    groups[-1][1].append(v)
                else:
                    if pid in seen:
                        raise MalformedInput(
                            f"{path}: line {lineno}: population {pid!r} is not "
                            "contiguous")
                    seen[pid] = True
                    groups.append((pid, [v]))
        if not groups:
            raise MalformedInput(f"{path}: no data rows")
        return cls([Population(pid, np.asarray(vs)) for pid, vs in groups])


# ---------------------------------------------------------------------------
# generation

def _draw_population(truth, rng, n):
    """One population: level shift, variance multiplier, noise (that order)."""
    a = math.sqrt(truth.gamma) * float(truth.effect_dist.sample(rng, 1)[0]) \
        if truth.gamma > 0 else 0.0
    vk = truth.sigma2
    if truth.vk_dist is not None:
        vk = truth.sigma2 * float(truth.vk_dist.sample(rng, 1)[0])
    u = truth.noise_dist.sample(rng, n) if truth.sigma2 > 0 else np.zeros(n)
    return truth.mu + a + math.sqrt(vk) * u, truth.mu + a


def generate_dataset(truth, design, seed):
    """Generate a dataset; deterministic given (truth, design, seed).

    Population k draws from the (seed, k) substream, so populations can be
    generated in any order or in parallel with identical results.
    """
    if not isinstance(truth, TruthParams):
        raise InvalidTruth("truth must be a TruthParams")
    if not isinstance(design, DesignParams):
        raise InvalidDesign("design must be a DesignParams")
    sizes = design.sizes()
    pops = []
    for k, n in enumerate(sizes):
        rng = substream(seed, NS_POPULATION, k)
        vals, _ = _draw_population(truth, rng, int(n))
        pops.append(Population(f"p{k + 1}", vals))
    return ClusterDataset(pops)


def generate_arrays(truth, sizes, rng):
    """Fast vectorized generation from a single stream (Monte Carlo path).

    Draw order: all effects, then V_k multipliers when configured, then the
    flat noise vector. Returns (values, cluster_means) where cluster_means[k]
    is the population's true conditional mean mu + a_k.
    """
    sizes = np.asarray(sizes, dtype=np.int64)
    K = sizes.size
    N = int(sizes.sum())
    if truth.gamma > 0:
        a = math.sqrt(truth.gamma) * truth.effect_dist.sample(rng, K)
    else:
        a = np.zeros(K)
    if truth.vk_dist is not None:
        vk = truth.sigma2 * truth.vk_dist.sample(rng, K)
    else:
        vk = np.full(K, truth.sigma2)
    if truth.sigma2 > 0:
        u = truth.noise_dist.sample(rng, N)
    else:
        u = np.zeros(N)
    values = truth.mu + np.repeat(a, sizes) + np.repeat(np.sqrt(vk), sizes) * u
    return values, truth.mu + a
