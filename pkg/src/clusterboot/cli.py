"""Command-line front end.

Subcommands: estimate, bootstrap, simulate, rates, compare. Exit codes:
0 success, 2 malformed input or invalid request, 3 degenerate data
(too few populations / singleton populations), 4 too few bootstrap
replicates for the requested level, 5 zero between-variance where the rate
experiment needs it. Errors also go to stderr as one-line JSON objects.
"""

import argparse
import json
import sys

from .bootstrap import (SchemeTag, confidence_interval, run_bootstrap)
from .errors import (ClusterBootError, DegenerateK, GridTooSmall,
                     InsufficientReplicates, InvalidDesign, InvalidTruth,
                     MalformedInput, SingletonPopulation, ZeroGamma)
from .estimators import estimate_report
from .model import ClusterDataset
from .montecarlo import (ExperimentConfig, rate_table, rate_table_to_csv,
                         run_experiment, scheme_comparison,
                         scheme_comparison_to_csv)

_EXIT_CODES = [
    ((MalformedInput, InvalidDesign, InvalidTruth, GridTooSmall, ValueError), 2),
    ((DegenerateK, SingletonPopulation), 3),
    ((InsufficientReplicates,), 4),
    ((ZeroGamma,), 5),
]


def _fail(exc):
    code = 1
    for types, c in _EXIT_CODES:
        if isinstance(exc, types):
            code = c
            break
    print(json.dumps({"error": type(exc).__name__, "message": str(exc)}),
          file=sys.stderr)
    return code


def _diag(msg):
    print(msg, file=sys.stderr)


def _write(path, text):
    if path in (None, "-"):
        print(text)
    else:
        with open(path, "w") as fh:
            fh.write(text)
            if not text.endswith("\n"):
                fh.write("\n")


def _load_config(path, args):
    with open(path) as fh:
        try:
            raw = json.load(fh)
        except json.JSONDecodeError as e:
            raise MalformedInput(f"{path}: invalid JSON: {e}") from None
    try:
        cfg = ExperimentConfig.from_dict(raw)
    except (KeyError, TypeError) as e:
        raise MalformedInput(f"{path}: bad experiment config: {e}") from None
    if args.seed is not None:
        cfg.master_seed = args.seed
    if args.threads is not None:
        cfg.threads = args.threads
    return cfg


def cmd_estimate(args):
    data = ClusterDataset.from_csv(args.input)
    report = estimate_report(data, compat_printed=args.compat_printed_formulas,
                             truncate_nonneg=args.truncate_gamma)
    if report.gamma_hat < 0:
        _diag(f"warning: negative between-variance estimate "
              f"gamma_hat={report.gamma_hat:.6g} (use --truncate-gamma to clip)")
    _write(args.output, report.to_json())
    return 0


def cmd_bootstrap(args):
    data = ClusterDataset.from_csv(args.input)
    scheme = SchemeTag.parse(args.scheme)
    if scheme is SchemeTag.B3_CLUSTER and args.target == "mu_N":
        raise MalformedInput(
            "two-stage resampling (b3) does not support inference for the "
            "weighted grand mean: its resampling variance is inflated by the "
            "within-population term; use b1w or b2, or target mu_prime_K")
    run = run_bootstrap(data, scheme, args.replicates, args.seed or 0)
    out = run.to_dict()
    intervals = {}
    for method in ("percentile", "bootstrap_t", "normal"):
        ci = confidence_interval(run, method=method, level=args.level)
        intervals[method] = ci.to_dict()
    out["intervals"] = intervals
    _write(args.output, json.dumps(out, sort_keys=True, indent=2))
    if args.dump_replicates:
        run.replicates_to_csv(args.dump_replicates)
        _diag(f"wrote per-replicate statistics to {args.dump_replicates}")
    return 0


def cmd_simulate(args):
    cfg = _load_config(args.input, args)
    _diag(f"simulate: R={cfg.R} B={cfg.B} grid="
          f"{[d.K for d in cfg.grid]} schemes={[s.value for s in cfg.schemes]}")
    report = run_experiment(cfg)
    _write(args.output, report.to_json())
    _diag(f"done in {report.timing['total_seconds']:.2f}s")
    return 0


def cmd_rates(args):
    cfg = _load_config(args.input, args)
    _diag(f"rates: R={cfg.R} B={cfg.B} K grid={[d.K for d in cfg.grid]}")
    rows = rate_table(cfg)
    _write(args.output, json.dumps(rows, sort_keys=True, indent=2))
    if args.csv:
        rate_table_to_csv(rows, args.csv)
        _diag(f"wrote CSV to {args.csv}")
    return 0


def cmd_compare(args):
    cfg = _load_config(args.input, args)
    enum_data = ClusterDataset.from_csv(args.enum_data) if args.enum_data else None
    result = scheme_comparison(cfg, enum_data=enum_data)
    _write(args.output, json.dumps(result, sort_keys=True, indent=2))
    if args.csv:
        scheme_comparison_to_csv(result, args.csv)
        _diag(f"wrote CSV to {args.csv}")
    return 0


def _add_common(p, needs_scheme=False):
    p.add_argument("--input", required=True,
                   help="CSV dataset or JSON experiment config")
    p.add_argument("--output", default="-", help="output path (default stdout)")
    p.add_argument("--seed", type=int, default=None)
    p.add_argument("--threads", type=int, default=None)
    p.add_argument("--level", type=float, default=0.95)
    p.add_argument("--compat-printed-formulas", action="store_true",
                   dest="compat_printed_formulas",
                   help="use the published formula variants (biased; for "
                        "comparison only)")
    p.add_argument("--truncate-gamma", action="store_true",
                   dest="truncate_gamma",
                   help="clip negative between-variance estimates at 0")
    if needs_scheme:
        p.add_argument("--scheme", default="b1w",
                       choices=[t.value for t in SchemeTag])
        p.add_argument("--replicates", "-B", type=int, default=999)
        p.add_argument("--target", choices=["mu_N", "mu_prime_K"],
                       default=None)
        p.add_argument("--dump-replicates", default=None,
                       help="optional CSV of per-replicate statistics")


def build_parser():
    ap = argparse.ArgumentParser(
        prog="clusterboot",
        description="Two-stage cluster sampling: estimation, bootstrap "
                    "schemes, and Monte Carlo diagnostics.")
    sub = ap.add_subparsers(dest="command", required=True)

    p = sub.add_parser("estimate", help="point/variance estimates from a CSV")
    _add_common(p)
    p.set_defaults(fn=cmd_estimate)

    p = sub.add_parser("bootstrap", help="bootstrap a CSV dataset")
    _add_common(p, needs_scheme=True)
    p.set_defaults(fn=cmd_bootstrap)

    p = sub.add_parser("simulate", help="run a replication experiment")
    _add_common(p)
    p.set_defaults(fn=cmd_simulate)

    p = sub.add_parser("rates", help="bootstrap approximation rate table")
    _add_common(p)
    p.add_argument("--csv", default=None, help="also write plot-ready CSV")
    p.set_defaults(fn=cmd_rates)

    p = sub.add_parser("compare", help="compare the four resampling schemes")
    _add_common(p)
    p.add_argument("--csv", default=None, help="also write plot-ready CSV")
    p.add_argument("--enum-data", default=None,
                   help="tiny CSV dataset for the exact enumeration block")
    p.set_defaults(fn=cmd_compare)
    return ap


def main(argv=None):
    args = build_parser().parse_args(argv)
    if getattr(args, "target", None) is None and hasattr(args, "scheme"):
        args.target = ("mu_N" if SchemeTag.parse(args.scheme) in
                       (SchemeTag.B2_INDIVIDUALS, SchemeTag.B1_WEIGHTED)
                       else "mu_prime_K")
    try:
        return args.fn(args)
    except ClusterBootError as e:
        return _fail(e)
    except ValueError as e:
        return _fail(e)
    except OSError as e:
        print(json.dumps({"error": "OSError", "message": str(e)}),
              file=sys.stderr)
        return 2


if __name__ == "__main__":
    sys.exit(main())
