"""Command-line front end.

Subcommands:
  synth       generate a synthetic instance directory
  solve       run one method on a matrix and write the factorization
  experiment  sweep levels x trials x methods, write report tables
  metrics     recompute quality metrics from saved artifacts

Exit codes: 0 success, 2 usage error, 3 data error, 4 numerical failure.
"""

import argparse
import json
import os
import sys
import time

import numpy as np

from . import __version__
from .baselines import SspaConfig, fgnsr_baseline, spa, sspa
from .errors import CssnmfError, DataError, NumericalError
from .experiment import ExperimentConfig, run_experiment
from .io import (ensure_dir, load_json, load_matrix_csv, save_index_csv,
                 save_json, save_matrix_csv)
from .linalg import frobenius_norm
from .metrics import MetricsReport, accuracy, rel_approx_error, rel_w_error
from .postprocess import (Threshold, TopP, aggregate, nnls_cd, select_rows,
                          spectral_cluster)
from .solver import MuControlConfig, SolverConfig, fgm_solve
from .synth import generate, load_instance, save_instance


def _build_parser():
    parser = argparse.ArgumentParser(
        prog="cssnmf",
        description="Convex smooth-separable NMF: solver, pipeline, baselines, benchmarks.",
    )
    parser.add_argument("--version", action="version", version=f"%(prog)s {__version__}")
    sub = parser.add_subparsers(dest="command", required=True)

    p_synth = sub.add_parser("synth", help="generate a synthetic instance")
    p_synth.add_argument("--scenario", required=True,
                         choices=["dirichlet", "midpoints", "outliers", "example1"])
    p_synth.add_argument("--eps", type=float, default=0.0, help="relative noise level")
    p_synth.add_argument("--ell", type=int, default=1, help="outlier count (outliers scenario)")
    p_synth.add_argument("--alpha", type=float, default=1.0, help="Dirichlet parameter")
    p_synth.add_argument("--seed", type=int, required=True)
    p_synth.add_argument("--out", required=True, help="output directory")

    p_solve = sub.add_parser("solve", help="factorize one matrix")
    p_solve.add_argument("--input", required=True, help="matrix CSV file")
    p_solve.add_argument("--method", default="cssnmf",
                         choices=["cssnmf", "spa", "sspa", "fgnsr"])
    p_solve.add_argument("--r", type=int, required=True, help="number of components")
    p_solve.add_argument("--p", type=int, help="keep the p rows of largest score")
    p_solve.add_argument("--delta", type=float,
                         help="keep rows with score >= delta (default 0.5)")
    p_solve.add_argument("--score", default="rows", choices=["rows", "offdiag", "diag"])
    p_solve.add_argument("--agg", default="mean", choices=["mean", "median"])
    p_solve.add_argument("--mu", default="auto",
                         help="penalty parameter: a number, or 'auto' for the online controller")
    p_solve.add_argument("--mu-rel", type=float,
                         help="fixed mu as a fraction of ||M||_F^2 (overrides --mu)")
    p_solve.add_argument("--mu0", type=float,
                         help="controller warm start (default 0.1 ||M||_F^2 / n)")
    p_solve.add_argument("--target-trace", type=float,
                         help="controller target for tr(X) (default r/2 + 1)")
    p_solve.add_argument("--sigma0", type=float, default=0.5)
    p_solve.add_argument("--maxiter", type=int, default=1000)
    p_solve.add_argument("--restart", type=int, default=50)
    p_solve.add_argument("--alpha0", type=float, default=0.05)
    p_solve.add_argument("--nplp", type=int, default=1, help="SSPA proximal latent points")
    p_solve.add_argument("--seed", type=int, default=0)
    p_solve.add_argument("--save-x", action="store_true", help="also write X.csv")
    p_solve.add_argument("--out", required=True, help="output directory")

    p_exp = sub.add_parser("experiment", help="run a benchmark sweep")
    p_exp.add_argument("--config", help="JSON config file (flags override it)")
    p_exp.add_argument("--scenario", choices=["dirichlet", "midpoints", "outliers"])
    p_exp.add_argument("--trials", type=int)
    p_exp.add_argument("--seed", type=int)
    p_exp.add_argument("--levels", help="comma-separated noise levels / outlier counts")
    p_exp.add_argument("--methods", help="comma-separated method names")
    p_exp.add_argument("--p", type=int, help="TopP selection")
    p_exp.add_argument("--delta", type=float, help="threshold selection")
    p_exp.add_argument("--score", choices=["rows", "offdiag", "diag"])
    p_exp.add_argument("--agg", choices=["mean", "median"])
    p_exp.add_argument("--mu", help="'auto' or a fixed value")
    p_exp.add_argument("--mu-rel", type=float)
    p_exp.add_argument("--target-trace", type=float)
    p_exp.add_argument("--maxiter", type=int)
    p_exp.add_argument("--restart", type=int)
    p_exp.add_argument("--alpha", type=float, help="Dirichlet parameter")
    p_exp.add_argument("--out", help="output directory")

    p_met = sub.add_parser("metrics", help="recompute metrics from saved artifacts")
    p_met.add_argument("--instance", required=True, help="instance directory (ground truth)")
    p_met.add_argument("--solution", required=True, help="solution directory (from solve)")
    p_met.add_argument("--out", help="output JSON file (default: print to stdout)")
    return parser


def cmd_synth(args):
    inst = generate(args.scenario, args.seed, eps=args.eps, ell=args.ell, alpha=args.alpha)
    save_instance(args.out, inst)
    print(f"wrote {args.scenario} instance ({inst.M.shape[0]}x{inst.M.shape[1]}) to {args.out}")
    return 0


def _solver_config_from_args(args, M, r, penalty):
    norm_sq = frobenius_norm(M) ** 2
    n = M.shape[1]
    if args.mu_rel is not None:
        return SolverConfig(mu=args.mu_rel * norm_sq, maxiter=args.maxiter,
                            alpha0=args.alpha0, penalty=penalty,
                            restart_period=args.restart)
    if args.mu == "auto":
        mu0 = args.mu0 if args.mu0 is not None else 0.1 * norm_sq / n
        if args.target_trace is not None:
            target = args.target_trace
        else:
            target = float(r) if penalty == "trace" else r / 2.0 + 1.0
        return SolverConfig(mu=mu0, maxiter=args.maxiter, alpha0=args.alpha0,
                            penalty=penalty, restart_period=args.restart,
                            mu_control=MuControlConfig(target=target, sigma0=args.sigma0))
    try:
        mu = float(args.mu)
    except ValueError:
        raise DataError(f"--mu must be a number or 'auto', got {args.mu!r}") from None
    return SolverConfig(mu=mu, maxiter=args.maxiter, alpha0=args.alpha0,
                        penalty=penalty, restart_period=args.restart)


def cmd_solve(args):
    M = load_matrix_csv(args.input)
    r = args.r
    out = ensure_dir(args.out)
    t0 = time.perf_counter()
    summary = {"method": args.method, "r": r,
               "m": int(M.shape[0]), "n": int(M.shape[1]), "input": args.input}

    if args.method == "cssnmf":
        if args.p is not None:
            rule = TopP(args.p)
        else:
            rule = Threshold(args.delta if args.delta is not None else 0.5, min_count=r)
        solver = _solver_config_from_args(args, M, r, "squared_diag")
        result = fgm_solve(M, solver)
        K = select_rows(result.X, rule, by=args.score)
        sub = result.X[np.ix_(K, K)]
        labels = spectral_cluster(0.5 * (sub + sub.T), r, args.seed)
        W = aggregate(M, K, labels, args.agg)
        H = nnls_cd(M, W)
        save_index_csv(os.path.join(out, "labels.csv"), labels)
        if args.save_x:
            save_matrix_csv(os.path.join(out, "X.csv"), result.X)
        summary["final_mu"] = float(result.final_mu)
        summary["iterations"] = int(result.iterations_run)
        summary["objective_tail"] = float(result.objective_trace[-1])
        summary["trace_x"] = float(np.trace(result.X))
    elif args.method == "spa":
        K = spa(M, r)
        W = M[:, K]
        H = nnls_cd(M, W)
    elif args.method == "sspa":
        clusters, W = sspa(M, r, SspaConfig(nplp=args.nplp, aggregation=args.agg))
        K = np.concatenate(clusters)
        H = nnls_cd(M, W)
        save_index_csv(os.path.join(out, "labels.csv"),
                       np.repeat(np.arange(r), args.nplp))
    else:  # fgnsr
        solver = _solver_config_from_args(args, M, r, "trace")
        K = fgnsr_baseline(M, r, solver)
        W = M[:, K]
        H = nnls_cd(M, W)

    save_index_csv(os.path.join(out, "K.csv"), K)
    save_matrix_csv(os.path.join(out, "W.csv"), W)
    save_matrix_csv(os.path.join(out, "H.csv"), H)
    summary["residual"] = float(frobenius_norm(M - W @ H))
    summary["rel_error"] = summary["residual"] / frobenius_norm(M)
    summary["runtime_ms"] = 1000.0 * (time.perf_counter() - t0)
    save_json(os.path.join(out, "summary.json"), summary)
    print(f"{args.method}: |K|={len(K)} rel_error={summary['rel_error']:.6g} -> {out}")
    return 0


_EXP_FLAG_MAP = {
    "scenario": "scenario",
    "trials": "trials",
    "seed": "seed",
    "score": "score",
    "agg": "aggregation",
    "target_trace": "target_trace",
    "maxiter": "maxiter",
    "restart": "restart_period",
    "alpha": "alpha_dirichlet",
    "out": "output_dir",
}


def _experiment_config(args):
    fields = {}
    if args.config:
        raw = load_json(args.config)
        known = set(ExperimentConfig.__dataclass_fields__)
        unknown = set(raw) - known - {"selection"}
        if unknown:
            raise DataError(f"unknown config keys: {sorted(unknown)}")
        sel = raw.pop("selection", None)
        if sel is not None:
            if "top_p" in sel:
                raw["selection"] = TopP(int(sel["top_p"]))
            elif "threshold" in sel:
                raw["selection"] = Threshold(float(sel["threshold"]))
            else:
                raise DataError("selection must specify top_p or threshold")
        fields.update(raw)
    for flag, field in _EXP_FLAG_MAP.items():
        val = getattr(args, flag, None)
        if val is not None:
            fields[field] = val
    if args.levels is not None:
        fields["levels"] = [float(tok) for tok in args.levels.split(",") if tok]
    if args.methods is not None:
        fields["methods"] = tuple(tok.strip() for tok in args.methods.split(",") if tok.strip())
    if args.p is not None:
        fields["selection"] = TopP(args.p)
    elif args.delta is not None:
        fields["selection"] = Threshold(args.delta)
    if args.mu_rel is not None:
        fields["mu_mode"] = "rel"
        fields["mu_value"] = args.mu_rel
    elif args.mu is not None:
        if args.mu == "auto":
            fields["mu_mode"] = "auto"
        else:
            try:
                fields["mu_mode"], fields["mu_value"] = "abs", float(args.mu)
            except ValueError:
                raise DataError(f"--mu must be a number or 'auto', got {args.mu!r}") from None
    if "scenario" not in fields:
        raise DataError("scenario required (flag --scenario or config file)")
    return ExperimentConfig(**fields)


def cmd_experiment(args):
    cfg = _experiment_config(args)
    rows = run_experiment(cfg)
    failed = sum(1 for r in rows if r["error"])
    where = cfg.output_dir if cfg.output_dir else "(no output dir: results not written)"
    print(f"{cfg.scenario}: {len(rows)} rows ({failed} failed) -> {where}")
    return 0


def cmd_metrics(args):
    inst = load_instance(args.instance)
    W = load_matrix_csv(os.path.join(args.solution, "W.csv"))
    H = load_matrix_csv(os.path.join(args.solution, "H.csv"))
    method = "unknown"
    summary_path = os.path.join(args.solution, "summary.json")
    if os.path.exists(summary_path):
        method = load_json(summary_path).get("method", "unknown")
    t0 = time.perf_counter()
    report = MetricsReport(
        scenario=inst.scenario,
        seed=inst.seed,
        eps=inst.epsilon,
        method=method,
        accuracy=accuracy(H, inst.labels, np.arange(inst.n0)),
        d_w=rel_w_error(W, inst.W_true),
        rel_error=rel_approx_error(inst.M, W),
        runtime_ms=1000.0 * (time.perf_counter() - t0),
    )
    if args.out:
        save_json(args.out, report.to_dict())
    else:
        print(json.dumps(report.to_dict(), indent=2, sort_keys=True))
    return 0


def main(argv=None):
    parser = _build_parser()
    args = parser.parse_args(argv)
    handlers = {"synth": cmd_synth, "solve": cmd_solve,
                "experiment": cmd_experiment, "metrics": cmd_metrics}
    try:
        return handlers[args.command](args)
    except (DataError, OSError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 3
    except (NumericalError, CssnmfError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 4


if __name__ == "__main__":
    sys.exit(main())
