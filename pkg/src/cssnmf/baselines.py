"""Comparison algorithms: SPA, SSPA and the trace-penalized baseline.

SPA greedily extracts the column of largest l2 norm and deflates by
projecting onto its orthogonal complement.  SSPA extends it by aggregating
several proximal latent points per extracted component.  The third
baseline solves the trace-penalized self-dictionary model and applies SPA
to the rows of the returned X.
"""

from dataclasses import dataclass

import numpy as np

from .errors import DataError, NumericalError
from .linalg import as_matrix, frobenius_norm
from .solver import PenaltyKind, fgm_solve


@dataclass(frozen=True)
class SspaConfig:
    nplp: int                 # proximal latent points aggregated per component
    aggregation: str = "mean"  # "mean" or "median"

    def __post_init__(self):
        if self.nplp < 1:
            raise ValueError("nplp must be >= 1")
        if self.aggregation not in ("mean", "median"):
            raise ValueError(f"unknown aggregation {self.aggregation!r}")


def spa(M, r):
    """Successive projection: return the r extracted column indices.

    Each step picks argmax_j ||R(:,j)||_2 (ties -> smallest index) and
    projects the residual onto the orthogonal complement of the pick.
    Raises when the residual vanishes before r columns are found.
    """
    M = as_matrix(M)
    if r < 1 or r > M.shape[1]:
        raise DataError(f"spa: r={r} out of range")
    R = M.copy()
    floor = 1e-12 * frobenius_norm(M)
    picked = []
    for _ in range(r):
        norms = np.sqrt((R * R).sum(axis=0))
        j = int(norms.argmax())
        if norms[j] < floor:
            raise NumericalError("spa: rank-deficient input (residual vanished)")
        u = R[:, j] / norms[j]
        R -= np.outer(u, u @ R)
        R[:, j] = 0.0
        picked.append(j)
    return np.array(picked, dtype=int)


def sspa(M, r, cfg):
    """Smoothed SPA: aggregate ``cfg.nplp`` proximal columns per component.

    Per extraction: take the direction of the largest-norm residual column,
    select the nplp columns with largest inner product against it
    (ties -> smallest index), aggregate the corresponding columns of the
    *original* M into W(:,t), and deflate the residual by the aggregated
    residual direction.  With nplp = 1 this reduces exactly to SPA.

    Returns (clusters, W): r index arrays of size nplp and the m x r basis.
    """
    M = as_matrix(M)
    n = M.shape[1]
    if r < 1 or r > n:
        raise DataError(f"sspa: r={r} out of range")
    if cfg.nplp > n:
        raise DataError(f"sspa: nplp={cfg.nplp} exceeds n={n}")
    R = M.copy()
    floor = 1e-12 * frobenius_norm(M)
    W = np.empty((M.shape[0], r))
    clusters = []
    for t in range(r):
        norms = np.sqrt((R * R).sum(axis=0))
        j = int(norms.argmax())
        if norms[j] < floor:
            raise NumericalError("sspa: rank-deficient input (residual vanished)")
        u = R[:, j] / norms[j]
        scores = u @ R
        sel = np.sort(np.argsort(-scores, kind="stable")[: cfg.nplp])
        cols_m = M[:, sel]
        cols_r = R[:, sel]
        if cfg.aggregation == "mean":
            W[:, t] = cols_m.mean(axis=1)
            d = cols_r.mean(axis=1)
        else:
            W[:, t] = np.median(cols_m, axis=1)
            d = np.median(cols_r, axis=1)
        dn = np.linalg.norm(d)
        if dn < floor:
            raise NumericalError("sspa: aggregated direction vanished")
        d = d / dn
        R -= np.outer(d, d @ R)
        clusters.append(sel)
    return clusters, W


def nplp_policy(class_sizes, policy):
    """Number of proximal latent points from the true class sizes.

    "min" -> p_min, "mid" -> floor((p_min + p_bar)/2), "mean" -> round(p_bar)
    with banker's rounding on the half.
    """
    sizes = np.asarray(class_sizes, dtype=float)
    p_min = sizes.min()
    p_bar = sizes.mean()
    if policy == "min":
        return int(p_min)
    if policy == "mid":
        return int(np.floor(0.5 * (p_min + p_bar)))
    if policy == "mean":
        return int(np.rint(p_bar))
    raise ValueError(f"unknown nplp policy {policy!r}")


def fgnsr_baseline(M, r, solver):
    """Trace-penalized solve, then SPA on the rows of X.

    ``solver`` must use the trace penalty.  Returns the r selected column
    indices of M.
    """
    if solver.penalty is not PenaltyKind.TRACE:
        raise ValueError("fgnsr_baseline requires the trace penalty")
    result = fgm_solve(M, solver)
    return spa(result.X.T, r)
