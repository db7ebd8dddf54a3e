"""Acceptance suite: one test per criterion, one printed pass/fail line each.

Run with ``pytest -s tests/test_acceptance.py`` to see the lines as they
complete. Every tolerance is pinned here; nothing defers to later tuning.
Master seeds are fixed arbitrary constants.
"""

import json
import math
import time

import numpy as np
import pytest

from clusterboot import (DesignParams, ExperimentConfig, SchemeTag,
                         ShiftedExponential, TruthParams,
                         conditional_normality_ks, enumerate_bootstrap,
                         rate_table, run_experiment, scheme_comparison,
                         summarize)
from clusterboot.cli import main as cli_main
from conftest import random_tiny_dataset

pytestmark = pytest.mark.acceptance


def _report(num, ok, detail):
    line = f"ACCEPTANCE {num}: {'PASS' if ok else 'FAIL'} - {detail}"
    print(line, flush=True)
    assert ok, line


def _elapsed_ok(num, t0, limit_s, detail):
    dt = time.perf_counter() - t0
    _report(f"{num} (runtime)", dt < limit_s, f"{detail}: {dt:.1f}s < {limit_s}s")


# ---------------------------------------------------------------------------
# 1. enumeration-exact bootstrap moments

def _closed_forms(data):
    """The four schemes' moment displays, written out independently."""
    s = summarize(data)
    n = s.sizes.astype(float)
    K = s.K
    N = float(n.sum())
    mu = s.mu_hat
    vh = s.v_hat
    mu_N = float((n / N) @ mu)
    mu_K = float(mu.mean())
    nstar = float((n / N) @ (n / N))
    ss_K = float(((mu - mu_K) ** 2).sum())
    varhat_muK = ss_K / (K - 1)
    return {
        "b2": {"eN": mu_N, "vN": float(((n - 1) * vh).sum()) / N ** 2,
               "eK": mu_K, "vK": float(((n - 1) / n ** 2 * vh).sum()) / K ** 2},
        "b1u": {"eN": mu_K, "vN": nstar * (K - 1) / K * varhat_muK,
                "eK": mu_K, "vK": ss_K / K ** 2},
        "b1w": {"eN": mu_N,
                "vN": nstar / N * float((n * (mu - mu_N) ** 2).sum()),
                "eK": mu_N,
                "vK": float((n * (mu - mu_N) ** 2).sum()) / (N * K)},
        "b3": {"eN": mu_K,
               "vN": nstar * float(((mu - mu_K) ** 2 + vh / n).sum()) / K,
               "eK": mu_K,
               "vK": (K - 1) / K ** 2 * varhat_muK
                     + float((vh / n).sum()) / K ** 2},
    }


def test_criterion_1_enumeration_exact_moments(d0):
    t0 = time.perf_counter()
    rng = np.random.default_rng(918273)
    datasets = [("D0", d0)] + [(f"tiny{i}", random_tiny_dataset(rng))
                               for i in range(5)]
    worst = 0.0
    for name, data in datasets:
        closed = _closed_forms(data)
        for scheme in SchemeTag:
            dist = enumerate_bootstrap(data, scheme)
            eN, vN = dist.e_var_mu_star_N()
            eK, vK = dist.e_var_mu_star_prime_K()
            want = closed[scheme.value]
            for got, exp in ((eN, want["eN"]), (vN, want["vN"]),
                             (eK, want["eK"]), (vK, want["vK"])):
                rel = abs(got - exp) / max(abs(exp), 1e-12)
                worst = max(worst, rel)
            assert abs(dist.total_probability() - 1.0) < 1e-12
    _report(1, worst <= 1e-10,
            f"enumeration vs closed forms on {len(datasets)} datasets x 4 "
            f"schemes, worst rel err {worst:.2e} <= 1e-10")
    _elapsed_ok(1, t0, 10.0, "enumeration suite")


# ---------------------------------------------------------------------------
# 2. estimator unbiasedness

BALANCED_TRUTH = TruthParams(mu=1.0, gamma=1.0, sigma2=1.0)


def test_criterion_2_estimator_unbiasedness():
    t0 = time.perf_counter()
    cfg = ExperimentConfig(truth=BALANCED_TRUTH,
                           grid=[DesignParams.balanced(50, 4)],
                           R=10_000, master_seed=52001)
    est = run_experiment(cfg).grid[0]["estimators"]
    details = []
    ok = True
    for name in ("mu_hat_N", "mu_hat_prime_K", "sigma2_hat", "gamma_hat"):
        bias = est[name]["bias"]
        se = est[name]["se"]
        good = abs(bias) <= 3 * se
        ok &= good
        details.append(f"{name}: bias {bias:+.5f} vs 3se {3 * se:.5f}")
    _report(2, ok, "; ".join(details))
    _elapsed_ok(2, t0, 60.0, "R=1e4 unbiasedness run")


# ---------------------------------------------------------------------------
# 3. variance formulas

def test_criterion_3_variance_formulas():
    t0 = time.perf_counter()
    cfg = ExperimentConfig(truth=BALANCED_TRUTH,
                           grid=[DesignParams.balanced(50, 4)],
                           R=100_000, master_seed=52002)
    est = run_experiment(cfg).grid[0]["estimators"]
    r_N = est["var_ratio_mu_N"]
    r_K = est["var_ratio_mu_K"]
    ok = 0.95 <= r_N <= 1.05 and 0.95 <= r_K <= 1.05
    _report(3, ok, f"empirical/theoretical variance ratios: weighted {r_N:.4f}, "
                   f"unweighted {r_K:.4f}, both in [0.95, 1.05]")
    # estimated variances track the theoretical ones too (within 5%)
    c_N = est["consistency_ratio_mu_N"]
    c_K = est["consistency_ratio_mu_K"]
    _report("3 (estimator consistency)",
            0.95 <= c_N <= 1.05 and 0.95 <= c_K <= 1.05,
            f"mean variance estimates / theoretical: {c_N:.4f}, {c_K:.4f}")
    _elapsed_ok(3, t0, 300.0, "R=1e5 variance run")


# ---------------------------------------------------------------------------
# 4. normality

SKEWED_TRUTH = TruthParams(mu=0.0, gamma=0.5, sigma2=1.0,
                           effect_dist=ShiftedExponential(),
                           noise_dist=ShiftedExponential())


def test_criterion_4_normality():
    t0 = time.perf_counter()
    # Props 2.1/2.2 at K=200, R=1e4, Gaussian truth
    cfg = ExperimentConfig(truth=BALANCED_TRUTH,
                           grid=[DesignParams(K=200, alpha=0.4)],
                           R=10_000, master_seed=52004)
    ks = run_experiment(cfg).grid[0]["ks"]
    crit_1pct = 1.62762 / math.sqrt(10_000)
    _report("4 (studentized grand means)",
            ks["t_N"]["ks"] < 0.03 and ks["t_prime_K"]["ks"] < 0.03,
            f"KS t_N {ks['t_N']['ks']:.4f}, t'_K {ks['t_prime_K']['ks']:.4f} "
            "< 0.03")
    _report("4 (within/between decomposed stats, 1% KS test)",
            ks["t_intra"]["ks"] < crit_1pct and ks["t_inter"]["ks"] < crit_1pct,
            f"KS intra {ks['t_intra']['ks']:.4f}, inter "
            f"{ks['t_inter']['ks']:.4f} < {crit_1pct:.4f}")

    # conditional bootstrap normality at B=1e5 on one K=200 dataset
    names = {SchemeTag.B2_INDIVIDUALS: "B2 conditional",
             SchemeTag.B1_UNIFORM: "B1 uniform conditional",
             SchemeTag.B1_WEIGHTED: "B1 weighted conditional",
             SchemeTag.B3_CLUSTER: "B3 conditional, own variance"}
    for tag, label in names.items():
        d = conditional_normality_ks(cfg, 0, tag, B=100_000)
        _report(f"4 ({label})", d < 0.02, f"conditional KS {d:.4f} < 0.02")

    # monotone normality along the K grid under skewed truth
    grid = [DesignParams(K=k, alpha=0.4) for k in (25, 50, 100, 200)]
    cfg_m = ExperimentConfig(truth=SKEWED_TRUTH, grid=grid, R=10_000,
                             master_seed=52014)
    seq = [gp["ks"]["t_N"]["ks"] for gp in run_experiment(cfg_m).grid]
    inversions = sum(1 for a, b in zip(seq, seq[1:]) if b > a)
    _report("4 (monotone normality in K)", inversions <= 1,
            f"KS sequence {['%.4f' % v for v in seq]}, "
            f"{inversions} inversion(s) <= 1")
    _elapsed_ok(4, t0, 600.0, "normality batch")


# ---------------------------------------------------------------------------
# 5. B3 inconsistency

def test_criterion_5_b3_inconsistency(d0, tiny_unbalanced):
    t0 = time.perf_counter()
    worst = 0.0
    for data in (d0, tiny_unbalanced):
        out = scheme_comparison(None, enum_data=data)["enumeration"]
        excess = out["b3_excess_over_b1u"]
        intra = out["intra_mu_prime_K"]
        worst = max(worst, abs(excess - intra) / max(abs(intra), 1e-12))
        assert abs(out["b1u_variance_ratio"] - 1.0) <= 1e-10
    _report("5 (enumeration identity)", worst <= 1e-10,
            f"B3 excess = intra variance, worst rel err {worst:.2e}")

    # over-coverage: gamma=1, sigma2=2.5, n_k=3 at K=100 predicts ~+3.2pts
    truth = TruthParams(mu=0.0, gamma=1.0, sigma2=2.5)
    cfg = ExperimentConfig(truth=truth,
                           grid=[DesignParams.balanced(100, 3)],
                           R=2000, B=999, schemes=["b3"], level=0.95,
                           master_seed=52005)
    cov = run_experiment(cfg).grid[0]["schemes"]["b3"]["coverage_bootstrap_t"]
    _report("5 (B3 over-coverage)", cov >= 0.97,
            f"B3 bootstrap-t coverage {cov:.4f} >= 0.97 (inflated variance)")
    _elapsed_ok(5, t0, 300.0, "B3 runs")


# ---------------------------------------------------------------------------
# 6. second-order behavior

def test_criterion_6_second_order():
    t0 = time.perf_counter()
    grid = [DesignParams(K=k, alpha=0.4) for k in (25, 50, 100, 200)]
    cfg = ExperimentConfig(truth=SKEWED_TRUTH, grid=grid, R=10_000, B=999,
                           master_seed=52006)
    rows = rate_table(cfg)

    bound_ok = all(r["scaled_sup_distance"] <= r["bound_scaled"] for r in rows)
    detail = ", ".join(f"K={r['K']}: {r['scaled_sup_distance']:.2f}<="
                       f"{r['bound_scaled']:.2f}" for r in rows)
    _report("6a (Berry-Esseen bound)", bound_ok, detail)

    improved = 0
    per_k = []
    for r in rows:
        qc = r["quantile_correction"]
        better = all(qc[key]["corrected_pooled"] < qc[key]["uncorrected"]
                     for key in qc)
        improved += better
        per_k.append(f"K={r['K']}: {'yes' if better else 'no'}")
    _report("6b (corrected quantile improves)", improved >= 3,
            f"{improved}/4 grid points improved at x=+-1.645 "
            f"({'; '.join(per_k)})")
    _elapsed_ok(6, t0, 1800.0, "rate experiment")


# ---------------------------------------------------------------------------
# 7. coverage

def test_criterion_7_coverage():
    t0 = time.perf_counter()
    cfg = ExperimentConfig(truth=BALANCED_TRUTH,
                           grid=[DesignParams(K=100, alpha=0.4)],
                           R=2000, B=999, schemes=["b1w", "b2"], level=0.95,
                           master_seed=52007)
    schemes = run_experiment(cfg).grid[0]["schemes"]
    c_w = schemes["b1w"]["coverage_bootstrap_t"]
    c_2 = schemes["b2"]["coverage_bootstrap_t"]
    ok = 0.93 <= c_w <= 0.97 and 0.93 <= c_2 <= 0.97
    _report(7, ok, f"bootstrap-t coverage: b1w for the global mean {c_w:.4f}, "
                   f"b2 for the conditional target {c_2:.4f}, both in "
                   "[0.93, 0.97]")
    _elapsed_ok(7, t0, 300.0, "coverage runs")


# ---------------------------------------------------------------------------
# 8. determinism

def test_criterion_8_determinism(tmp_path):
    cfg = {"truth": {"mu": 0.0, "gamma": 1.0, "sigma2": 1.0,
                     "noise_dist": {"name": "shifted_exponential"}},
           "grid": [{"K": 25, "alpha": 0.4, "c": 1.0},
                    {"K": 50, "alpha": 0.4, "c": 1.0}],
           "R": 200, "B": 99, "schemes": ["b1w", "b2", "b1u", "b3"],
           "master_seed": 52008}
    cfg_path = tmp_path / "config.json"
    cfg_path.write_text(json.dumps(cfg))
    outs = []
    for tag in ("a", "b"):
        out = tmp_path / f"report_{tag}.json"
        assert cli_main(["simulate", "--input", str(cfg_path),
                         "--output", str(out)]) == 0
        outs.append(out.read_bytes())
    same_sim = outs[0] == outs[1]

    rate_cfg = dict(cfg, grid=[{"K": k, "alpha": 0.4, "c": 1.0}
                               for k in (8, 12, 16)], R=100, B=30,
                    schemes=[])
    cfg_path.write_text(json.dumps(rate_cfg))
    outs_r = []
    for tag in ("a", "b"):
        out = tmp_path / f"rates_{tag}.json"
        assert cli_main(["rates", "--input", str(cfg_path),
                         "--output", str(out)]) == 0
        outs_r.append(out.read_bytes())
    _report(8, same_sim and outs_r[0] == outs_r[1],
            "repeated runs with the same master seed produce byte-identical "
            "simulate and rates report files")
