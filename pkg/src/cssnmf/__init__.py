"""Convex smooth-separable nonnegative matrix factorization.

A library for the penalized convex self-dictionary model
min_{X in Omega} ||M - MX||_F^2 + mu ||diag(X)||_2^2 and its two-step
pipeline (solve, select, cluster, aggregate, NNLS), together with the
SPA / SSPA / trace-penalized baselines, synthetic benchmark generators,
and quality metrics.
"""

__version__ = "0.1.0"

from .baselines import SspaConfig, fgnsr_baseline, nplp_policy, spa, sspa
from .errors import CssnmfError, DataError, NumericalError
from .experiment import ExperimentConfig, run_experiment
from .linalg import (col_l1_norms, frobenius_norm, l1_operator_norm,
                     spectral_norm_sq, sym_eig)
from .metrics import (MetricsReport, RobustnessCertificate, accuracy,
                      certificate, kappa, rel_approx_error, rel_w_error,
                      theorem6_selection, theorem8_selection)
from .postprocess import (CssnmfSolution, Threshold, TopP, aggregate,
                          cssnmf_pipeline, nnls_cd, select_rows,
                          spectral_cluster)
from .solver import (MuControlConfig, PenaltyKind, SolverConfig, SolverResult,
                     adapt_mu, fgm_solve, gradient, objective, project_omega,
                     solve_mu_ladder)
from .synth import (SyntheticInstance, dirichlet_noise_grid, gen_dirichlet,
                    gen_example1, gen_midpoints, gen_outliers, generate,
                    example1_h, example1_xstar, load_instance,
                    midpoints_noise_grid, save_instance)

__all__ = [
    "CssnmfError", "DataError", "NumericalError",
    "frobenius_norm", "col_l1_norms", "l1_operator_norm", "spectral_norm_sq", "sym_eig",
    "PenaltyKind", "SolverConfig", "MuControlConfig", "SolverResult",
    "project_omega", "objective", "gradient", "adapt_mu", "fgm_solve", "solve_mu_ladder",
    "TopP", "Threshold", "CssnmfSolution", "select_rows", "spectral_cluster",
    "aggregate", "nnls_cd", "cssnmf_pipeline",
    "SspaConfig", "spa", "sspa", "nplp_policy", "fgnsr_baseline",
    "SyntheticInstance", "gen_dirichlet", "gen_midpoints", "gen_outliers",
    "gen_example1", "example1_h", "example1_xstar", "generate",
    "dirichlet_noise_grid", "midpoints_noise_grid", "save_instance", "load_instance",
    "kappa", "accuracy", "rel_w_error", "rel_approx_error",
    "RobustnessCertificate", "certificate", "theorem6_selection", "theorem8_selection",
    "MetricsReport", "ExperimentConfig", "run_experiment",
]
