"""Benchmark sweeps: levels x trials x methods on the synthetic families.

The runner generates one instance per (level, trial) from split seeds,
evaluates every requested method on it, and writes raw per-trial rows,
per-level aggregates, best-over-trials rows (outlier scenario), and
plot-ready per-metric tables.  Wall-clock timings go to a separate file so
the metric CSVs are byte-identical across re-runs with the same seed.
"""

import os
import time
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field, replace

import numpy as np

from .baselines import SspaConfig, fgnsr_baseline, nplp_policy, spa, sspa
from .errors import CssnmfError, DataError
from .io import ensure_dir, format_float
from .linalg import frobenius_norm
from .metrics import accuracy, rel_w_error
from .postprocess import (Threshold, TopP, aggregate, nnls_cd, select_rows,
                          spectral_cluster)
from .rng import child_seed
from .solver import MuControlConfig, SolverConfig, fgm_solve
from .synth import (dirichlet_noise_grid, gen_dirichlet, gen_midpoints,
                    gen_outliers, midpoints_noise_grid)

ALL_METHODS = ("cssnmf", "spa", "sspa_min", "sspa_mid", "sspa_mean", "fgnsr")


@dataclass
class ExperimentConfig:
    scenario: str                     # dirichlet | midpoints | outliers
    trials: int = 10
    seed: int = 0
    levels: list = None               # noise grid / outlier counts; None = scenario default
    methods: tuple = ALL_METHODS
    selection: object = None          # TopP/Threshold; None = scenario default
    score: str = None                 # rows | offdiag | diag; None = scenario default
    aggregation: str = "mean"
    mu_mode: str = None               # "auto" (controller) | "rel" | "abs"; None = default
    mu_value: float = None            # fixed mu ("abs") or factor of ||M||_F^2 ("rel")
    mu_scale: float = 0.1             # controller warm start mu0 = mu_scale ||M||_F^2 / n
    target_trace: float = None        # controller target; None = r/2 + 1
    sigma0: float = 0.5
    maxiter: int = 1000
    restart_period: int = 50
    alpha0: float = 0.05
    alpha_dirichlet: float = 1.0
    output_dir: str = None

    def __post_init__(self):
        if self.scenario not in ("dirichlet", "midpoints", "outliers"):
            raise DataError(f"unknown scenario {self.scenario!r}")
        if self.trials < 1:
            raise DataError("trials must be >= 1")
        if self.levels is None:
            self.levels = default_levels(self.scenario)
        self.levels = list(self.levels)
        if not self.levels:
            raise DataError("level grid must be non-empty")
        self.methods = tuple(self.methods)
        for m in self.methods:
            if m not in ALL_METHODS + ("cssnmf_mean", "cssnmf_median"):
                raise DataError(f"unknown method {m!r}")
        if self.mu_mode is None:
            # fixed relative mu: small enough that corrupted columns gain
            # nothing from serving as dictionary atoms, large enough to
            # spread weight across each class (the outlier study keeps a
            # larger value so outlier self-weights stay visible in K)
            self.mu_mode = "rel"
            if self.mu_value is None:
                self.mu_value = 2e-2 if self.scenario == "outliers" else 1e-4
        if self.mu_mode not in ("auto", "rel", "abs"):
            raise DataError(f"unknown mu_mode {self.mu_mode!r}")
        if self.mu_mode in ("rel", "abs") and self.mu_value is None:
            raise DataError("mu_value required for fixed mu")
        if self.score is None:
            # the diagonal-inclusive row norm keeps the outlier columns in
            # K (their mass is pure self-representation); elsewhere the
            # off-diagonal mass is the robust evidence of a smooth class
            self.score = "rows" if self.scenario == "outliers" else "offdiag"
        if self.score not in ("rows", "offdiag", "diag"):
            raise DataError(f"unknown score {self.score!r}")


def default_levels(scenario):
    if scenario == "dirichlet":
        return [float(v) for v in dirichlet_noise_grid()]
    if scenario == "midpoints":
        return [float(v) for v in midpoints_noise_grid()]
    return list(range(1, 16))


def default_selection(scenario, inst):
    # outliers carry unit row mass like the pure classes; a fixed threshold
    # admits them into K so that aggregation has to cope with them, while
    # TopP(n0) is the natural choice when the pure count is the target
    if scenario == "outliers":
        return Threshold(0.5, min_count=inst.r)
    return TopP(inst.params.get("n0", inst.n0))


def _generate(scenario, level, seed, cfg):
    if scenario == "dirichlet":
        return gen_dirichlet(seed, eps=level, alpha=cfg.alpha_dirichlet)
    if scenario == "midpoints":
        return gen_midpoints(seed, eps=level)
    return gen_outliers(seed, ell=int(level))


def solver_config_for(inst, cfg, penalty="squared_diag"):
    """Build the solver configuration for an instance.

    "auto" runs the trace-steering controller from a coarse warm start;
    for the trace-penalized baseline the target is r (mass one per class),
    for the squared-diagonal model r/2 + 1.
    """
    norm_sq = frobenius_norm(inst.M) ** 2
    n = inst.M.shape[1]
    if cfg.mu_mode == "auto":
        mu0 = cfg.mu_scale * norm_sq / n
        if penalty == "trace":
            target = float(inst.r)
        else:
            target = cfg.target_trace if cfg.target_trace is not None else inst.r / 2.0 + 1.0
        control = MuControlConfig(target=target, statistic="diagonal", sigma0=cfg.sigma0)
        return SolverConfig(mu=mu0, maxiter=cfg.maxiter, alpha0=cfg.alpha0,
                            penalty=penalty, restart_period=cfg.restart_period,
                            mu_control=control)
    mu = cfg.mu_value * norm_sq if cfg.mu_mode == "rel" else cfg.mu_value
    return SolverConfig(mu=mu, maxiter=cfg.maxiter, alpha0=cfg.alpha0,
                        penalty=penalty, restart_period=cfg.restart_period)


def _cssnmf_parts(inst, cfg, cache):
    """Solve + select + cluster once per trial; aggregations share it."""
    if "parts" not in cache:
        solver = solver_config_for(inst, cfg)
        X = fgm_solve(inst.M, solver).X
        rule = cfg.selection if cfg.selection is not None else default_selection(cfg.scenario, inst)
        if isinstance(rule, Threshold) and rule.min_count < inst.r:
            rule = replace(rule, min_count=inst.r)
        K = select_rows(X, rule, by=cfg.score)
        sub = X[np.ix_(K, K)]
        labels = spectral_cluster(0.5 * (sub + sub.T), inst.r, child_seed(inst.seed, 1))
        cache["parts"] = (K, labels)
    return cache["parts"]


def evaluate_method(method, inst, cfg, cache):
    """Return (accuracy, d_w, rel_error) for one method on one instance."""
    M, r = inst.M, inst.r
    J0 = np.arange(inst.n0)
    if method in ("cssnmf", "cssnmf_mean", "cssnmf_median"):
        agg = cfg.aggregation if method == "cssnmf" else method.split("_", 1)[1]
        K, labels = _cssnmf_parts(inst, cfg, cache)
        W = aggregate(M, K, labels, agg)
    elif method == "spa":
        W = M[:, spa(M, r)]
    elif method.startswith("sspa_"):
        nplp = nplp_policy(inst.class_sizes, method.split("_", 1)[1])
        _, W = sspa(M, r, SspaConfig(nplp=nplp, aggregation="mean"))
    elif method == "fgnsr":
        solver = solver_config_for(inst, cfg, penalty="trace")
        W = M[:, fgnsr_baseline(M, r, solver)]
    else:
        raise DataError(f"unknown method {method!r}")
    H = nnls_cd(M, W)
    acc = accuracy(H, inst.labels, J0)
    d_w = rel_w_error(W, inst.W_true)
    rel = frobenius_norm(M - W @ H) / frobenius_norm(M)
    return acc, d_w, rel


def run_trial(cfg, level_idx, trial_idx):
    """All method rows for one (level, trial) cell."""
    level = cfg.levels[level_idx]
    seed = child_seed(cfg.seed, level_idx, trial_idx)
    inst = _generate(cfg.scenario, level, seed, cfg)
    cache = {}
    rows = []
    for method in cfg.methods:
        t0 = time.perf_counter()
        row = {
            "scenario": cfg.scenario,
            "level": level,
            "trial": trial_idx,
            "seed": seed,
            "method": method,
            "accuracy": np.nan,
            "d_w": np.nan,
            "rel_error": np.nan,
            "runtime_ms": 0.0,
            "error": "",
        }
        try:
            acc, d_w, rel = evaluate_method(method, inst, cfg, cache)
            row.update(accuracy=acc, d_w=d_w, rel_error=rel)
        except CssnmfError as exc:
            row["error"] = f"{type(exc).__name__}: {exc}"
        row["runtime_ms"] = 1000.0 * (time.perf_counter() - t0)
        rows.append(row)
    return rows


def _trial_task(args):
    cfg, level_idx, trial_idx = args
    return run_trial(cfg, level_idx, trial_idx)


def worker_count():
    """Worker cap from CSSNMF_THREADS (0 = all cores; unset = 1)."""
    raw = os.environ.get("CSSNMF_THREADS", "1")
    try:
        k = int(raw)
    except ValueError:
        raise DataError(f"CSSNMF_THREADS must be an integer, got {raw!r}") from None
    if k == 0:
        return os.cpu_count() or 1
    return max(1, k)


def run_experiment(cfg):
    """Run the full sweep and return the list of raw row dicts.

    Writes raw.csv, aggregates.csv, plotdata/<metric>.csv, timings.csv and
    (for the outlier scenario) best_over_trials.csv under cfg.output_dir
    when it is set.
    """
    tasks = [(cfg, li, ti) for li in range(len(cfg.levels)) for ti in range(cfg.trials)]
    workers = worker_count()
    if workers > 1 and len(tasks) > 1:
        with ProcessPoolExecutor(max_workers=workers) as pool:
            chunks = list(pool.map(_trial_task, tasks))
    else:
        chunks = [_trial_task(t) for t in tasks]
    rows = [row for chunk in chunks for row in chunk]
    if cfg.output_dir:
        write_reports(cfg, rows)
    return rows


def _fmt_level(level):
    return repr(int(level)) if float(level).is_integer() else format_float(level)


METRIC_COLS = ("accuracy", "d_w", "rel_error")


def aggregate_rows(cfg, rows):
    """Mean metric values per (level, method), skipping error rows."""
    out = []
    for level in cfg.levels:
        for method in cfg.methods:
            cell = [r for r in rows
                    if r["level"] == level and r["method"] == method and not r["error"]]
            agg = {"scenario": cfg.scenario, "level": level, "method": method,
                   "n_trials": len(cell)}
            for col in METRIC_COLS:
                agg[col] = float(np.mean([r[col] for r in cell])) if cell else np.nan
            out.append(agg)
    return out


def best_rows(cfg, rows):
    """Best value per (level, method): max accuracy, min d_w / rel_error."""
    out = []
    for level in cfg.levels:
        for method in cfg.methods:
            cell = [r for r in rows
                    if r["level"] == level and r["method"] == method and not r["error"]]
            best = {"scenario": cfg.scenario, "level": level, "method": method,
                    "n_trials": len(cell)}
            if cell:
                best["accuracy"] = float(max(r["accuracy"] for r in cell))
                best["d_w"] = float(min(r["d_w"] for r in cell))
                best["rel_error"] = float(min(r["rel_error"] for r in cell))
            else:
                best.update(accuracy=np.nan, d_w=np.nan, rel_error=np.nan)
            out.append(best)
    return out


def _write_csv(path, header, lines):
    with open(path, "w", encoding="ascii") as fh:
        fh.write(",".join(header) + "\n")
        for line in lines:
            fh.write(",".join(line) + "\n")


def write_reports(cfg, rows):
    out = ensure_dir(cfg.output_dir)
    raw_header = ["scenario", "level", "trial", "seed", "method"] + list(METRIC_COLS) + ["error"]
    _write_csv(
        os.path.join(out, "raw.csv"),
        raw_header,
        ([r["scenario"], _fmt_level(r["level"]), str(r["trial"]), str(r["seed"]),
          r["method"]] + [format_float(r[c]) for c in METRIC_COLS] + [r["error"]]
         for r in rows),
    )
    _write_csv(
        os.path.join(out, "timings.csv"),
        ["scenario", "level", "trial", "method", "runtime_ms"],
        ([r["scenario"], _fmt_level(r["level"]), str(r["trial"]), r["method"],
          format_float(r["runtime_ms"])] for r in rows),
    )
    aggs = aggregate_rows(cfg, rows)
    agg_header = ["scenario", "level", "method", "n_trials"] + list(METRIC_COLS)
    _write_csv(
        os.path.join(out, "aggregates.csv"),
        agg_header,
        ([a["scenario"], _fmt_level(a["level"]), a["method"], str(a["n_trials"])]
         + [format_float(a[c]) for c in METRIC_COLS] for a in aggs),
    )
    if cfg.scenario == "outliers":
        _write_csv(
            os.path.join(out, "best_over_trials.csv"),
            agg_header,
            ([b["scenario"], _fmt_level(b["level"]), b["method"], str(b["n_trials"])]
             + [format_float(b[c]) for c in METRIC_COLS] for b in best_rows(cfg, rows)),
        )
    plotdir = ensure_dir(os.path.join(out, "plotdata"))
    by_cell = {(a["level"], a["method"]): a for a in aggs}
    for col in METRIC_COLS:
        _write_csv(
            os.path.join(plotdir, f"{col}.csv"),
            ["level"] + list(cfg.methods),
            ([_fmt_level(level)] + [format_float(by_cell[(level, m)][col]) for m in cfg.methods]
             for level in cfg.levels),
        )
