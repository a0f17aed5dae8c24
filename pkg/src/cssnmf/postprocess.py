"""Turn a solver matrix X into factors (K, clusters, W, H).

Pipeline stages: select candidate columns by row l1 norm of X, spectral
clustering of the symmetrized restriction X(K,K), per-cluster aggregation
of the corresponding columns of M (mean or entrywise median), and a
nonnegative least-squares solve for H on the full matrix.
"""

from dataclasses import dataclass, replace

import numpy as np

from .errors import DataError, NumericalError
from .linalg import as_matrix, frobenius_norm, sym_eig
from .rng import stream
from .solver import fgm_solve


@dataclass(frozen=True)
class TopP:
    """Keep the p rows with largest score (ties -> smaller index)."""

    p: int


@dataclass(frozen=True)
class Threshold:
    """Keep rows with score >= delta; falls back to TopP(min_count) when
    fewer than ``min_count`` rows pass."""

    delta: float
    min_count: int = 1


@dataclass
class CssnmfSolution:
    K: np.ndarray          # selected column indices into M
    labels: np.ndarray     # cluster id per element of K, in {0..r-1}
    W: np.ndarray          # m x r aggregated basis
    H: np.ndarray          # r x n nonnegative coefficients
    residual: float        # ||M - W H||_F


def select_rows(X, rule, by="rows"):
    """Return the selected index set (sorted ascending) from X.

    ``by="rows"`` scores each index by its row l1 norm, which uses all the
    entries of X; ``by="offdiag"`` drops the diagonal from that score
    (robust when corrupted columns carry large self-representation weight);
    ``by="diag"`` scores by the diagonal entry alone.
    """
    X = as_matrix(X, "X")
    n = X.shape[0]
    if X.shape[1] != n:
        raise DataError("select_rows expects a square matrix")
    if by == "rows":
        scores = np.abs(X).sum(axis=1)
    elif by == "offdiag":
        scores = np.abs(X).sum(axis=1) - np.abs(np.diagonal(X))
    elif by == "diag":
        scores = np.diagonal(X).copy()
    else:
        raise ValueError(f"unknown score {by!r}")

    if isinstance(rule, TopP):
        if not 1 <= rule.p <= n:
            raise DataError(f"TopP p={rule.p} out of range for n={n}")
        order = np.argsort(-scores, kind="stable")
        return np.sort(order[: rule.p])
    if isinstance(rule, Threshold):
        keep = np.flatnonzero(scores >= rule.delta)
        if keep.size < rule.min_count:
            return select_rows(X, TopP(rule.min_count), by=by)
        return keep
    raise TypeError(f"unsupported selection rule {rule!r}")


def _kmeanspp_init(U, r, rng):
    p = U.shape[0]
    centers = np.empty((r, U.shape[1]))
    centers[0] = U[int(rng.integers(p))]
    d2 = ((U - centers[0]) ** 2).sum(axis=1)
    for k in range(1, r):
        total = d2.sum()
        if total > 0.0:
            idx = int(rng.choice(p, p=d2 / total))
        else:
            idx = int(rng.integers(p))
        centers[k] = U[idx]
        d2 = np.minimum(d2, ((U - centers[k]) ** 2).sum(axis=1))
    return centers


def _lloyd(U, centers, max_iter):
    p, r = U.shape[0], centers.shape[0]
    labels = np.full(p, -1)
    for _ in range(max_iter):
        d2 = ((U[:, None, :] - centers[None, :, :]) ** 2).sum(axis=2)
        new_labels = d2.argmin(axis=1)
        own = d2[np.arange(p), new_labels].copy()
        for k in range(r):
            if not np.any(new_labels == k):
                far = int(np.argmax(own))
                new_labels[far] = k
                own[far] = -np.inf  # do not move the same point twice
        if np.array_equal(new_labels, labels):
            break
        labels = new_labels
        for k in range(r):
            centers[k] = U[labels == k].mean(axis=0)
    d2 = ((U[:, None, :] - centers[None, :, :]) ** 2).sum(axis=2)
    inertia = float(d2[np.arange(p), labels].sum())
    return labels, inertia


def _kmeans(U, r, rng, restarts=10, max_iter=100):
    best_labels, best_inertia = None, np.inf
    for _ in range(restarts):
        centers = _kmeanspp_init(U, r, rng)
        labels, inertia = _lloyd(U, centers.copy(), max_iter)
        if inertia < best_inertia:
            best_labels, best_inertia = labels, inertia
    return best_labels


def _canonical_order(S):
    # permutation-invariant ordering: degree first, then the sorted row
    # values as lexicographic tie-break
    deg = S.sum(axis=1)
    rows_sorted = np.sort(S, axis=1)
    keys = np.vstack([rows_sorted.T[::-1], deg])
    return np.lexsort(keys)


def spectral_cluster(S, r, seed):
    """Cluster the p x p similarity matrix S into r groups.

    Normalized-adjacency embedding on the graph without self-loops (the
    diagonal of S is discarded): A = D^{-1/2} S D^{-1/2} with D the
    diagonal of row sums (zero-degree rows get degree 1), rows of the top-r
    eigenvectors l2-normalized, then seeded k-means++ with 10 restarts.
    Rows are canonically reordered before k-means so that permuted inputs
    consume the random draws identically.
    """
    S = as_matrix(S, "S")
    p = S.shape[0]
    if S.shape[1] != p:
        raise DataError("spectral_cluster expects a square matrix")
    if r > p:
        raise DataError(f"cannot form r={r} clusters from {p} rows")
    scale = max(frobenius_norm(S), 1.0)
    if frobenius_norm(S - S.T) > 1e-10 * scale:
        raise DataError("spectral_cluster: similarity matrix is not symmetric")
    if S.min() < -1e-12:
        raise DataError("spectral_cluster: similarity entries must be nonnegative")
    S = np.maximum(0.5 * (S + S.T), 0.0)
    np.fill_diagonal(S, 0.0)

    deg = S.sum(axis=1)
    deg[deg == 0.0] = 1.0
    inv_sqrt = 1.0 / np.sqrt(deg)
    A = S * inv_sqrt[:, None] * inv_sqrt[None, :]
    _, vecs = sym_eig(A)
    U = vecs[:, -r:]
    norms = np.linalg.norm(U, axis=1)
    nz = norms > 0.0
    U[nz] = U[nz] / norms[nz, None]

    order = _canonical_order(S)
    fitted = _kmeans(U[order], r, stream(seed))
    labels = np.empty(p, dtype=int)
    labels[order] = fitted
    return labels


def aggregate(M, K, labels, rule="mean"):
    """Aggregate the columns M(:, K) per cluster into an m x r matrix.

    ``rule`` is "mean" or "median"; the median is entrywise, with the
    midpoint convention for even cluster sizes.
    """
    M = as_matrix(M)
    K = np.asarray(K, dtype=int)
    labels = np.asarray(labels, dtype=int)
    if labels.shape != K.shape:
        raise DataError("labels must align with K")
    if rule not in ("mean", "median"):
        raise ValueError(f"unknown aggregation rule {rule!r}")
    r = int(labels.max()) + 1 if labels.size else 0
    W = np.empty((M.shape[0], r))
    for t in range(r):
        members = K[labels == t]
        if members.size == 0:
            raise DataError(f"aggregate: cluster {t} is empty")
        cols = M[:, members]
        W[:, t] = cols.mean(axis=1) if rule == "mean" else np.median(cols, axis=1)
    return W


def nnls_cd(M, W, tol=1e-8, max_sweeps=500):
    """min_{H >= 0} ||M - W H||_F^2 by cyclic coordinate descent.

    Precomputes G = W^T W and F = W^T M, starts at H = 0, and sweeps the
    update H(k,:) <- max(0, H(k,:) + (F(k,:) - G(k,:) H) / G(k,k)) until the
    largest single-coordinate change in a sweep is <= tol.
    """
    M = as_matrix(M)
    W = as_matrix(W, "W")
    if W.shape[0] != M.shape[0]:
        raise DataError("W and M row counts differ")
    G = W.T @ W
    if np.any(np.diagonal(G) == 0.0):
        raise DataError("nnls_cd: W has a zero column")
    F = W.T @ M
    r, n = W.shape[1], M.shape[1]
    H = np.zeros((r, n))
    for _ in range(max_sweeps):
        biggest = 0.0
        for k in range(r):
            hk = np.maximum(0.0, H[k] + (F[k] - G[k] @ H) / G[k, k])
            delta = np.abs(hk - H[k]).max() if n else 0.0
            if delta > biggest:
                biggest = delta
            H[k] = hk
        if biggest <= tol:
            break
    return H


def cssnmf_pipeline(M, r, rule, agg, solver, seed, score="rows"):
    """Full pipeline: solve, select, cluster, aggregate, NNLS.

    ``rule`` is a :class:`TopP` or :class:`Threshold`, ``agg`` is "mean" or
    "median", ``solver`` a :class:`SolverConfig`, ``score`` the row
    statistic for :func:`select_rows`.  Returns a :class:`CssnmfSolution`;
    H is computed on the full M.
    """
    M = as_matrix(M)
    if r < 1:
        raise DataError("r must be >= 1")
    if isinstance(rule, Threshold) and rule.min_count < r:
        rule = replace(rule, min_count=r)
    result = fgm_solve(M, solver)
    K = select_rows(result.X, rule, by=score)
    sub = result.X[np.ix_(K, K)]
    labels = spectral_cluster(0.5 * (sub + sub.T), r, seed)
    if np.unique(labels).size < r:
        raise NumericalError("clustering produced fewer than r non-empty clusters")
    W = aggregate(M, K, labels, agg)
    H = nnls_cd(M, W)
    residual = frobenius_norm(M - W @ H)
    return CssnmfSolution(K=K, labels=labels, W=W, H=H, residual=residual)
