"""Replication engine: empirical evidence for every distributional claim.

run_experiment aggregates estimator bias/variance, studentized-statistic
normality, and per-scheme interval coverage over R generated datasets.
rate_table measures the sup-distance between the sampling law of the
studentized weighted mean and its weighted-population-bootstrap law,
scaled by K^{1/2+2a}, against the Berry-Esseen-style bound.
scheme_comparison puts the four schemes side by side (exact enumeration
identities on tiny data, coverage and variance ratios by Monte Carlo).

Streams: replicate r at grid point g draws its dataset from substream
(master_seed, NS_MC_DATA, g, r) and its scheme-s bootstrap block from
(master_seed, NS_MC_BOOT, g, r, s), so any replicate subset can run on any
worker with identical results; blocks merge in replicate order.

Coverage scales are scheme-appropriate: the within-variance estimate for
B2 (conditional target), the weighted spread functional for B1_WEIGHTED,
the between-SS/(K(K-1)) estimate for B1_UNIFORM, and - deliberately - the
bootstrap SE for B3_CLUSTER, which is the only scale that scheme offers
and is exactly the inflated one (its over-coverage is the point).
"""

import json
import math
import time
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field

import numpy as np
from scipy.special import ndtri

from . import kernels
from .asymptotics import (berry_esseen_bound, normal_cdf, sup_distance)
from .bootstrap import (SchemeTag, bootstrap_moments, quantile_type7,
                        replicate_stats)
from .errors import GridTooSmall, InvalidDesign, ZeroGamma
from .estimators import ClusterSummary, theoretical_variances
from .model import DesignParams, TruthParams, generate_arrays
from .rng import NS_MC_BOOT, NS_MC_DATA, substream

__all__ = ["ExperimentConfig", "ExperimentReport", "run_experiment",
           "rate_table", "scheme_comparison", "conditional_normality_ks"]

_X_CHECK = (-1.645, 1.645)  # quantile-correction checkpoints


@dataclass
class ExperimentConfig:
    truth: TruthParams
    grid: list
    R: int
    B: int = 0
    schemes: list = field(default_factory=list)
    level: float = 0.95
    master_seed: int = 0
    threads: int = 1
    conditional_B: int = 0

    def __post_init__(self):
        if self.R < 1:
            raise InvalidDesign(f"R must be >= 1, got {self.R}")
        if not self.grid:
            raise InvalidDesign("grid must contain at least one design")
        if self.B < 0 or (self.schemes and self.B < 1):
            raise InvalidDesign("B must be >= 1 when schemes are requested")
        if not 0.0 < self.level < 1.0:
            raise InvalidDesign(f"level must be in (0,1), got {self.level}")
        self.schemes = [SchemeTag.parse(s) for s in self.schemes]

    def to_dict(self):
        return {
            "truth": self.truth.to_dict(),
            "grid": [d.to_dict() for d in self.grid],
            "R": self.R, "B": self.B,
            "schemes": [s.value for s in self.schemes],
            "level": self.level, "master_seed": self.master_seed,
            "conditional_B": self.conditional_B,
        }

    @classmethod
    def from_dict(cls, d):
        return cls(
            truth=TruthParams.from_dict(d["truth"]),
            grid=[DesignParams.from_dict(g) for g in d["grid"]],
            R=int(d["R"]), B=int(d.get("B", 0)),
            schemes=list(d.get("schemes", [])),
            level=float(d.get("level", 0.95)),
            master_seed=int(d.get("master_seed", 0)),
            threads=int(d.get("threads", 1)),
            conditional_B=int(d.get("conditional_B", 0)),
        )


@dataclass
class ExperimentReport:
    config: dict
    grid: list
    timing: dict = field(default_factory=dict)

    def to_dict(self, include_timing=False):
        d = {"config": self.config, "grid": self.grid}
        if include_timing:
            d["timing"] = self.timing
        return d

    def to_json(self, indent=2, include_timing=False):
        # timing stays out of the canonical form so identical configs
        # produce byte-identical report files
        return json.dumps(self.to_dict(include_timing), sort_keys=True,
                          indent=indent)


# ---------------------------------------------------------------------------
# per-block replicate computation

_EST_COLS = ["mu_N", "mu_K", "sigma2", "gamma", "between_var", "var_N",
             "intra_N", "intra_K", "nstar", "ntilde", "spread_w", "sstar"]


def _scheme_targets_and_scales(tag, sc, cmeans, truth, w):
    """(target value, interval point, outer scale) for coverage checks."""
    if tag is SchemeTag.B2_INDIVIDUALS:
        return float(w @ cmeans), sc[0], math.sqrt(max(sc[6], 0.0))
    if tag is SchemeTag.B1_WEIGHTED:
        return truth.mu, sc[0], math.sqrt(max(sc[11], 0.0))
    if tag is SchemeTag.B1_UNIFORM:
        K = w.size
        return truth.mu, sc[1], math.sqrt(max(sc[4] / K, 0.0))
    return truth.mu, sc[1], None  # B3: bootstrap SE, filled per replicate


def _run_block(cfg_dict, g, r0, r1, keep_inner):
    """Replicates [r0, r1) of grid point g. Returns plain arrays only."""
    cfg = ExperimentConfig.from_dict(cfg_dict)
    truth = cfg.truth
    design = cfg.grid[g]
    sizes = design.sizes()
    starts = np.concatenate(([0], np.cumsum(sizes[:-1])))
    sizes_f = sizes.astype(float)
    K = design.K
    N = float(sizes.sum())
    w = sizes_f / N
    nrep = r1 - r0
    alpha = 1.0 - cfg.level

    est = np.empty((nrep, len(_EST_COLS)))
    tstats = np.full((nrep, 4), np.nan)  # t_N, t_K, t_intra, t_inter
    tms_plugin = np.empty(nrep)
    ntags = len(cfg.schemes)
    cover_t = np.zeros((nrep, ntags), dtype=bool)
    cover_p = np.zeros((nrep, ntags), dtype=bool)
    width_t = np.zeros((nrep, ntags))
    width_p = np.zeros((nrep, ntags))
    bootvar_muK = np.zeros((nrep, ntags))
    inner_t = (np.empty((nrep, cfg.B)) if keep_inner and ntags else None)

    for i in range(nrep):
        r = r0 + i
        rng = substream(cfg.master_seed, NS_MC_DATA, g, r)
        values, cmeans = generate_arrays(truth, sizes, rng)
        mu, vhat = kernels.population_summaries(values, starts, sizes)
        sc = kernels.estimator_scalars(mu, vhat, sizes_f)
        est[i] = sc
        if sc[5] > 0:
            tstats[i, 0] = (sc[0] - truth.mu) / math.sqrt(sc[5])
        var_k = sc[4] / K
        if var_k > 0:
            tstats[i, 1] = (sc[1] - truth.mu) / math.sqrt(var_k)
        cbar = float(cmeans.mean())
        if sc[7] > 0:
            tstats[i, 2] = (sc[1] - cbar) / math.sqrt(sc[7])
        if sc[3] > 0:
            tstats[i, 3] = math.sqrt(K) * (cbar - truth.mu) / math.sqrt(sc[3])
        tms_plugin[i] = float(np.sum(w ** 3 * (mu - truth.mu) ** 3))

        for s_idx, tag in enumerate(cfg.schemes):
            rng_b = substream(cfg.master_seed, NS_MC_BOOT, g, r, s_idx)
            muN_s, muK_s, scale_s = replicate_stats(values, starts, sizes,
                                                    tag, cfg.B, rng_b)
            stat = muN_s if tag in (SchemeTag.B2_INDIVIDUALS,
                                    SchemeTag.B1_WEIGHTED) else muK_s
            center = sc[0] if tag in (SchemeTag.B2_INDIVIDUALS,
                                      SchemeTag.B1_WEIGHTED) else sc[1]
            target, point, outer = _scheme_targets_and_scales(
                tag, sc, cmeans, truth, w)
            if outer is None:
                outer = float(np.std(muK_s, ddof=1)) if cfg.B > 1 else 0.0
            bootvar_muK[i, s_idx] = (float(np.var(muK_s, ddof=1))
                                     if cfg.B > 1 else 0.0)
            with np.errstate(divide="ignore", invalid="ignore"):
                t = (stat - center) / scale_s
            t = np.where(np.isnan(t), 0.0, t)
            lo_t = point - quantile_type7(t, 1 - alpha / 2) * outer
            hi_t = point - quantile_type7(t, alpha / 2) * outer
            cover_t[i, s_idx] = lo_t <= target <= hi_t
            width_t[i, s_idx] = hi_t - lo_t
            lo_p = quantile_type7(stat, alpha / 2)
            hi_p = quantile_type7(stat, 1 - alpha / 2)
            cover_p[i, s_idx] = lo_p <= target <= hi_p
            width_p[i, s_idx] = hi_p - lo_p
            if inner_t is not None and s_idx == 0:
                inner_t[i] = t
    out = {"est": est, "tstats": tstats, "tms_plugin": tms_plugin,
           "cover_t": cover_t, "cover_p": cover_p,
           "width_t": width_t, "width_p": width_p,
           "bootvar_muK": bootvar_muK}
    if inner_t is not None:
        out["inner_t"] = inner_t
    return out


def _collect_blocks(cfg, g, keep_inner=False):
    """Run all replicates of a grid point, possibly on a process pool."""
    R = cfg.R
    cfg_dict = cfg.to_dict()
    if cfg.threads <= 1 or R < 4 * cfg.threads:
        return _run_block(cfg_dict, g, 0, R, keep_inner)
    nblocks = min(4 * cfg.threads, R)
    bounds = np.linspace(0, R, nblocks + 1).astype(int)
    with ProcessPoolExecutor(max_workers=cfg.threads) as pool:
        futures = [pool.submit(_run_block, cfg_dict, g, int(a), int(b),
                               keep_inner)
                   for a, b in zip(bounds[:-1], bounds[1:]) if b > a]
        parts = [f.result() for f in futures]
    return {k: np.concatenate([p[k] for p in parts], axis=0)
            for k in parts[0]}


# ---------------------------------------------------------------------------
# aggregation

def _ks_to_normal(t):
    t = t[np.isfinite(t)]
    if t.size == 0:
        return float("nan"), 0
    return sup_distance(t, normal_cdf), int(t.size)


def _grid_point_report(cfg, g, blocks):
    truth = cfg.truth
    design = cfg.grid[g]
    sizes = design.sizes()
    K = design.K
    est = blocks["est"]
    tstats = blocks["tstats"]
    tv = theoretical_variances(truth, sizes)
    cols = {name: est[:, j] for j, name in enumerate(_EST_COLS)}
    mc_var_mu_N = float(np.var(cols["mu_N"], ddof=1)) if cfg.R > 1 else 0.0
    mc_var_mu_K = float(np.var(cols["mu_K"], ddof=1)) if cfg.R > 1 else 0.0

    def _mstats(x):
        m = float(np.mean(x))
        se = float(np.std(x, ddof=1) / math.sqrt(x.size)) if x.size > 1 else 0.0
        return m, se

    estimators = {}
    for name, target in [("mu_hat_N", truth.mu), ("mu_hat_prime_K", truth.mu),
                         ("sigma2_hat", truth.sigma2), ("gamma_hat", truth.gamma)]:
        col = {"mu_hat_N": "mu_N", "mu_hat_prime_K": "mu_K",
               "sigma2_hat": "sigma2", "gamma_hat": "gamma"}[name]
        m, se = _mstats(cols[col])
        estimators[name] = {"mean": m, "se": se, "bias": m - target}
    estimators["mc_var_mu_N"] = mc_var_mu_N
    estimators["mc_var_mu_K"] = mc_var_mu_K
    estimators["s2_N"] = tv.s2_N
    estimators["s2_prime_K"] = tv.s2_prime_K
    estimators["var_ratio_mu_N"] = mc_var_mu_N / tv.s2_N if tv.s2_N > 0 else float("nan")
    estimators["var_ratio_mu_K"] = mc_var_mu_K / tv.s2_prime_K \
        if tv.s2_prime_K > 0 else float("nan")
    estimators["mean_var_hat_mu_N"] = float(np.mean(cols["var_N"]))
    estimators["mean_var_hat_mu_K"] = float(np.mean(cols["between_var"])) / K
    estimators["consistency_ratio_mu_N"] = (
        estimators["mean_var_hat_mu_N"] / tv.s2_N if tv.s2_N > 0 else float("nan"))
    estimators["consistency_ratio_mu_K"] = (
        estimators["mean_var_hat_mu_K"] / tv.s2_prime_K
        if tv.s2_prime_K > 0 else float("nan"))

    # normal-method CI coverage straight from the variance estimates
    z = float(ndtri(1 - (1 - cfg.level) / 2))
    ok_N = cols["var_N"] > 0
    half = z * np.sqrt(cols["var_N"][ok_N])
    estimators["normal_ci_coverage_mu_N"] = float(np.mean(
        np.abs(cols["mu_N"][ok_N] - truth.mu) <= half)) if ok_N.any() else float("nan")
    ok_K = cols["between_var"] > 0
    half = z * np.sqrt(cols["between_var"][ok_K] / K)
    estimators["normal_ci_coverage_mu_K"] = float(np.mean(
        np.abs(cols["mu_K"][ok_K] - truth.mu) <= half)) if ok_K.any() else float("nan")

    ks = {}
    for j, name in enumerate(["t_N", "t_prime_K", "t_intra", "t_inter"]):
        d, used = _ks_to_normal(tstats[:, j])
        ks[name] = {"ks": d, "used": used, "dropped": cfg.R - used}

    schemes = {}
    for s_idx, tag in enumerate(cfg.schemes):
        blk = {
            "coverage_bootstrap_t": float(np.mean(blocks["cover_t"][:, s_idx])),
            "mean_width_bootstrap_t": float(np.mean(blocks["width_t"][:, s_idx])),
            "coverage_percentile": float(np.mean(blocks["cover_p"][:, s_idx])),
            "mean_width_percentile": float(np.mean(blocks["width_p"][:, s_idx])),
            "mean_bootstrap_var_mu_prime_K":
                float(np.mean(blocks["bootvar_muK"][:, s_idx])),
            "mean_target_var_mu_prime_K":
                float(np.mean(est[:, 4])) * (K - 1) / K ** 2,
            "mean_intra_mu_prime_K": float(np.mean(est[:, 7])),
        }
        if cfg.conditional_B > 0:
            blk["conditional_ks"] = conditional_normality_ks(
                cfg, g, tag, cfg.conditional_B)
        schemes[tag.value] = blk

    return {"design": design.to_dict(),
            "sizes": {"min": int(sizes.min()), "max": int(sizes.max()),
                      "N": int(sizes.sum())},
            "estimators": estimators, "ks": ks, "schemes": schemes}


def run_experiment(config):
    """Full replication experiment; deterministic given master_seed."""
    t0 = time.perf_counter()
    grid_reports = []
    timing = {}
    for g in range(len(config.grid)):
        tg = time.perf_counter()
        blocks = _collect_blocks(config, g)
        grid_reports.append(_grid_point_report(config, g, blocks))
        timing[f"grid_{g}_seconds"] = time.perf_counter() - tg
    timing["total_seconds"] = time.perf_counter() - t0
    return ExperimentReport(config=config.to_dict(), grid=grid_reports,
                            timing=timing)


# ---------------------------------------------------------------------------
# conditional (single-dataset) normality of bootstrap statistics

def conditional_normality_ks(config, g, scheme, B):
    """KS-to-normal of the scheme's studentized statistic on one dataset.

    Uses replicate 0's dataset at grid point g and a dedicated bootstrap
    substream. The B3 statistic is normalized by its own closed-form
    resampling SD (the inflated one); the others studentize per replicate.
    """
    scheme = SchemeTag.parse(scheme)
    design = config.grid[g]
    sizes = design.sizes()
    starts = np.concatenate(([0], np.cumsum(sizes[:-1])))
    rng = substream(config.master_seed, NS_MC_DATA, g, 0)
    values, _ = generate_arrays(config.truth, sizes, rng)
    mu, vhat = kernels.population_summaries(values, starts, sizes)
    sc = kernels.estimator_scalars(mu, vhat, sizes.astype(float))
    rng_b = substream(config.master_seed, NS_MC_BOOT, g, config.R,
                      list(SchemeTag).index(scheme))
    muN_s, muK_s, scale_s = replicate_stats(values, starts, sizes, scheme,
                                            B, rng_b)
    if scheme is SchemeTag.B3_CLUSTER:
        summ = ClusterSummary(sizes=sizes, mu_hat=mu, v_hat=vhat)
        sd = math.sqrt(bootstrap_moments(summ, scheme).var_mu_star_prime_K)
        t = (muK_s - sc[1]) / sd
    elif scheme is SchemeTag.B1_UNIFORM:
        t = (muK_s - sc[1]) / scale_s
    else:
        t = (muN_s - sc[0]) / scale_s
    t = t[np.isfinite(t)]
    return sup_distance(t, normal_cdf)


# ---------------------------------------------------------------------------
# rate experiment

def rate_table(config, C=0.56):
    """Scaled bootstrap-vs-sampling sup-distances across the K grid.

    Outer law: the studentized weighted grand mean over R datasets. Inner
    law: per dataset, B weighted-population-bootstrap studentized
    replicates; the R inner laws are averaged (pooled) before the sup.
    Each row carries the per-dataset mean/max variants, the Berry-Esseen
    bound, and before/after errors of the corrected quantile at x=±1.645
    (pooled plug-in coefficient and per-replicate variant).
    """
    if len(config.grid) < 3:
        raise GridTooSmall("rate experiments need at least three K values")
    alphas = {d.alpha for d in config.grid}
    if len(alphas) != 1:
        raise InvalidDesign("rate grid must share a single alpha")
    c0 = config.grid[0].c
    for d in config.grid:
        if not (np.all(d.c == d.c[0]) and d.c[0] == c0[0]):
            raise InvalidDesign("rate grid must share a single constant c")
    if config.truth.gamma <= 0:
        raise ZeroGamma("rate experiment requires gamma > 0")
    if config.B < 2:
        raise InvalidDesign("rate experiment needs B >= 2")

    cfg = ExperimentConfig(truth=config.truth, grid=config.grid, R=config.R,
                           B=config.B, schemes=[SchemeTag.B1_WEIGHTED],
                           level=config.level,
                           master_seed=config.master_seed,
                           threads=config.threads)
    rows = []
    for g, design in enumerate(cfg.grid):
        blocks = _collect_blocks(cfg, g, keep_inner=True)
        est = blocks["est"]
        var_N = est[:, 5]
        ok = var_N > 0
        t_outer = (est[ok, 0] - cfg.truth.mu) / np.sqrt(var_N[ok])
        inner = blocks["inner_t"][ok]
        pooled = np.sort(inner.reshape(-1))
        d_pooled = sup_distance(t_outer, pooled)
        outer_sorted = np.sort(t_outer)

        def _one(row_t, _a=outer_sorted):
            return sup_distance(row_t, _a)

        per_ds = np.array([_one(inner[i]) for i in range(inner.shape[0])])
        rate = design.K ** (0.5 + 2.0 * design.alpha)
        bound = berry_esseen_bound(cfg.truth, design, C=C)

        # quantile-correction diagnostics (studentized kind)
        tms = blocks["tms_plugin"][ok]
        lam_pool = float(np.mean(tms)) / (6.0 * float(np.mean(var_N[ok])) ** 1.5)
        lam_rep = tms / (6.0 * var_N[ok] ** 1.5)
        corr = {}
        for x in _X_CHECK:
            phi_x = normal_cdf(x)
            before = abs(float(np.mean(t_outer <= x)) - phi_x)
            q_pool = x - lam_pool * (1.0 + 2.0 * x * x)
            after_pool = abs(float(np.mean(t_outer <= q_pool)) - phi_x)
            q_rep = x - lam_rep * (1.0 + 2.0 * x * x)
            after_rep = abs(float(np.mean(t_outer <= q_rep)) - phi_x)
            corr[f"x={x:+.3f}"] = {"uncorrected": before,
                                   "corrected_pooled": after_pool,
                                   "corrected_per_replicate": after_rep}
        rows.append({
            "K": design.K, "alpha": design.alpha,
            "sup_distance": d_pooled,
            "scaled_sup_distance": rate * d_pooled,
            "per_dataset_mean": float(per_ds.mean()),
            "per_dataset_max": float(per_ds.max()),
            "bound_scaled": bound.scaled,
            "bound_unscaled": bound.unscaled,
            "lambda_pooled": lam_pool,
            "dropped": int(cfg.R - ok.sum()),
            "quantile_correction": corr,
        })
    return rows


def rate_table_to_csv(rows, path):
    """K,alpha,scheme,metric,value rows for plotting."""
    import csv as _csv
    with open(path, "w", newline="") as fh:
        w = _csv.writer(fh)
        w.writerow(["K", "alpha", "scheme", "metric", "value"])
        for r in rows:
            for metric in ("sup_distance", "scaled_sup_distance",
                           "per_dataset_mean", "per_dataset_max",
                           "bound_scaled", "bound_unscaled", "lambda_pooled"):
                w.writerow([r["K"], r["alpha"], "b1w", metric,
                            format(r[metric], ".17g")])
            for x, d in r["quantile_correction"].items():
                for metric, v in d.items():
                    w.writerow([r["K"], r["alpha"], "b1w",
                                f"qc[{x}].{metric}", format(v, ".17g")])


# ---------------------------------------------------------------------------
# scheme comparison

def scheme_comparison(config, enum_data=None):
    """Side-by-side scheme table: exact identities plus Monte Carlo coverage.

    With ``enum_data`` (a tiny dataset), adds enumeration-exact bootstrap
    variances of the unweighted-mean statistic per scheme, the ratio of the
    B1-uniform variance to its closed-form target, and B3's excess over
    B1-uniform (equal to the intra variance term). The MC part runs
    run_experiment over all four schemes.
    """
    from .bootstrap import enumerate_bootstrap
    from .estimators import estimate_report, summarize

    out = {"enumeration": None, "mc": None}
    if enum_data is not None:
        rep = estimate_report(enum_data)
        summary = summarize(enum_data)
        K = summary.K
        target = rep.var_hat_mu_prime_K * (K - 1) / K ** 2
        enum_rows = {}
        for tag in SchemeTag:
            dist = enumerate_bootstrap(enum_data, tag)
            eK, vK = dist.e_var_mu_star_prime_K()
            eN, vN = dist.e_var_mu_star_N()
            enum_rows[tag.value] = {
                "e_mu_star_N": eN, "var_mu_star_N": vN,
                "e_mu_star_prime_K": eK, "var_mu_star_prime_K": vK,
            }
        b1u = enum_rows[SchemeTag.B1_UNIFORM.value]["var_mu_star_prime_K"]
        b3 = enum_rows[SchemeTag.B3_CLUSTER.value]["var_mu_star_prime_K"]
        out["enumeration"] = {
            "rows": enum_rows,
            "target_var_mu_prime_K": target,
            "b1u_variance_ratio": b1u / target if target > 0 else float("nan"),
            "b3_excess_over_b1u": b3 - b1u,
            "intra_mu_prime_K": rep.var_intra_mu_prime_K,
        }
    if config is not None and config.R >= 1 and config.B >= 1:
        cfg = ExperimentConfig(truth=config.truth, grid=config.grid,
                               R=config.R, B=config.B,
                               schemes=list(SchemeTag), level=config.level,
                               master_seed=config.master_seed,
                               threads=config.threads,
                               conditional_B=config.conditional_B)
        report = run_experiment(cfg)
        mc = []
        for g, gp in enumerate(report.grid):
            row = {"design": gp["design"], "schemes": {}}
            for name, blk in gp["schemes"].items():
                tgt = blk["mean_target_var_mu_prime_K"]
                row["schemes"][name] = dict(blk)
                row["schemes"][name]["variance_ratio_vs_target"] = (
                    blk["mean_bootstrap_var_mu_prime_K"] / tgt
                    if tgt > 0 else float("nan"))
                row["schemes"][name]["excess_vs_intra"] = (
                    blk["mean_bootstrap_var_mu_prime_K"] - tgt
                    - blk["mean_intra_mu_prime_K"])
            mc.append(row)
        out["mc"] = mc
    return out


def scheme_comparison_to_csv(result, path):
    """K,alpha,scheme,metric,value rows for the MC part of the comparison."""
    import csv as _csv
    with open(path, "w", newline="") as fh:
        w = _csv.writer(fh)
        w.writerow(["K", "alpha", "scheme", "metric", "value"])
        if result.get("enumeration"):
            enum = result["enumeration"]
            for scheme, row in enum["rows"].items():
                for metric, v in row.items():
                    w.writerow(["", "", scheme, f"enum.{metric}",
                                format(v, ".17g")])
            for metric in ("target_var_mu_prime_K", "b1u_variance_ratio",
                           "b3_excess_over_b1u", "intra_mu_prime_K"):
                w.writerow(["", "", "", f"enum.{metric}",
                            format(enum[metric], ".17g")])
        for row in result.get("mc") or []:
            K = row["design"]["K"]
            alpha = row["design"]["alpha"]
            for scheme, blk in row["schemes"].items():
                for metric, v in blk.items():
                    if isinstance(v, float):
                        w.writerow([K, alpha, scheme, metric,
                                    format(v, ".17g")])
