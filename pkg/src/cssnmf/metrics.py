"""Quality measures and theory-side diagnostics.

Clustering accuracy (best label permutation), relative basis error after
column normalization, relative approximation error through an NNLS solve,
the conditioning measure kappa(W), and the robustness certificate with the
diagonal-threshold recovery sets it predicts.
"""

from dataclasses import asdict, dataclass

import numpy as np
from scipy.optimize import linear_sum_assignment, linprog

from .errors import DataError, NumericalError
from .linalg import as_matrix, frobenius_norm
from .postprocess import nnls_cd


def kappa(W):
    """Conditioning of W: min_k min_{x>=0} ||W(:,k) - W(:,kbar) x||_1.

    Each inner problem is solved as a linear program with residual splits:
    minimize e^T(u+v) over x, u, v >= 0 subject to
    W(:,kbar) x + u - v = W(:,k).
    """
    W = as_matrix(W, "W")
    m, r = W.shape
    if r < 2:
        raise DataError("kappa needs at least two columns")
    eye = np.eye(m)
    best = np.inf
    for k in range(r):
        others = W[:, [j for j in range(r) if j != k]]
        A_eq = np.hstack([others, eye, -eye])
        c = np.concatenate([np.zeros(r - 1), np.ones(2 * m)])
        res = linprog(c, A_eq=A_eq, b_eq=W[:, k], bounds=(0, None), method="highs")
        if res.status != 0:
            raise NumericalError(f"kappa: LP failed for column {k}: {res.message}")
        best = min(best, float(res.fun))
    return max(best, 0.0)


def accuracy(H_hat, labels, J0=None):
    """Fraction of pure columns classified correctly under the best
    permutation of the predicted components.

    Predicted class of column j is argmax_t H_hat(t, j) (ties -> smallest
    t); the permutation is the optimal assignment on the confusion matrix.
    """
    H_hat = as_matrix(H_hat, "H_hat")
    labels = np.asarray(labels, dtype=int)
    if J0 is None:
        J0 = np.arange(labels.size)
    J0 = np.asarray(J0, dtype=int)
    if labels.size != J0.size:
        raise DataError("labels must align with J0")
    r = H_hat.shape[0]
    pred = H_hat[:, J0].argmax(axis=0)
    confusion = np.zeros((r, r))
    for y, yhat in zip(labels, pred):
        confusion[y, yhat] += 1.0
    rows, cols = linear_sum_assignment(confusion, maximize=True)
    return float(confusion[rows, cols].sum()) / float(J0.size)


def rel_w_error(W_hat, W_true):
    """min_Pi ||W_hat Pi - W||_F / ||W||_F after column l2 normalization."""
    W_hat = as_matrix(W_hat, "W_hat")
    W_true = as_matrix(W_true, "W_true")
    if W_hat.shape != W_true.shape:
        raise DataError(f"shape mismatch {W_hat.shape} vs {W_true.shape}")
    normalized = []
    for A, name in ((W_hat, "W_hat"), (W_true, "W_true")):
        norms = np.linalg.norm(A, axis=0)
        if np.any(norms == 0.0):
            raise DataError(f"{name} has a zero column")
        normalized.append(A / norms)
    A, B = normalized
    r = A.shape[1]
    cost = np.empty((r, r))
    for a in range(r):
        diff = A[:, a][:, None] - B
        cost[a] = (diff * diff).sum(axis=0)
    rows, cols = linear_sum_assignment(cost)
    perm = np.empty(r, dtype=int)
    perm[cols] = rows
    return frobenius_norm(A[:, perm] - B) / frobenius_norm(B)


def rel_approx_error(M, W):
    """min_{P >= 0} ||M - W P||_F / ||M||_F via coordinate-descent NNLS."""
    M = as_matrix(M)
    norm_m = frobenius_norm(M)
    if norm_m == 0.0:
        raise DataError("rel_approx_error: M is zero")
    P = nnls_cd(M, W, tol=1e-8, max_sweeps=500)
    return frobenius_norm(M - np.asarray(W) @ P) / norm_m


@dataclass
class RobustnessCertificate:
    kappa: float
    beta: float
    r_eff: float            # sum_t 1/p_t, the effective rank
    p_max: int
    epsilon: float
    delta: float            # 4 eps (1 + kappa beta) / (kappa (1 - beta)(1 - eps))
    thm6_threshold: float   # kappa (1 - beta) / (5 (p_max + 1)(1 + kappa beta))
    thm8_threshold: float   # kappa (1 - beta) / (18 p_max^2 r_eff)

    def to_dict(self):
        return asdict(self)


def certificate(W, H, pure_sets, eps):
    """Compute the robustness certificate for a ground-truth factorization.

    beta is the largest mixing coefficient over columns outside the pure
    sets; it must be < 1 (a unit coefficient would mean the column belongs
    to some pure set).  Requires eps < 1.
    """
    W = as_matrix(W, "W")
    H = as_matrix(H, "H")
    if not 0.0 <= eps < 1.0:
        raise DataError("certificate requires 0 <= eps < 1")
    n = H.shape[1]
    pure = np.concatenate([np.asarray(s, dtype=int) for s in pure_sets])
    mixed = np.setdiff1d(np.arange(n), pure)
    beta = float(H[:, mixed].max()) if mixed.size else 0.0
    if beta >= 1.0:
        raise DataError(
            "beta >= 1: a column outside the pure sets has a unit "
            "coefficient and should belong to some S_t"
        )
    sizes = np.array([len(s) for s in pure_sets], dtype=float)
    if np.any(sizes < 1):
        raise DataError("every pure set must be non-empty")
    r_eff = float((1.0 / sizes).sum())
    p_max = int(sizes.max())
    kap = kappa(W)
    if kap <= 0.0:
        raise NumericalError("certificate: kappa(W) = 0, W is degenerate")
    delta = 4.0 * eps * (1.0 + kap * beta) / (kap * (1.0 - beta) * (1.0 - eps))
    thm6 = kap * (1.0 - beta) / (5.0 * (p_max + 1) * (1.0 + kap * beta))
    thm8 = kap * (1.0 - beta) / (18.0 * p_max**2 * r_eff)
    return RobustnessCertificate(
        kappa=kap,
        beta=beta,
        r_eff=r_eff,
        p_max=p_max,
        epsilon=float(eps),
        delta=delta,
        thm6_threshold=thm6,
        thm8_threshold=thm8,
    )


def theorem6_selection(X, cert):
    """Indices with X(j,j) above (1 - delta)/p_max."""
    d = np.diagonal(as_matrix(X, "X"))
    return np.flatnonzero(d > (1.0 - cert.delta) / cert.p_max)


def theorem8_selection(X, cert):
    """Indices with X(j,j) above (1 - delta)/p_max - sqrt(delta * r_eff)."""
    d = np.diagonal(as_matrix(X, "X"))
    cut = (1.0 - cert.delta) / cert.p_max - np.sqrt(cert.delta * cert.r_eff)
    return np.flatnonzero(d > cut)


@dataclass
class MetricsReport:
    scenario: str
    seed: int
    eps: float
    method: str
    accuracy: float
    d_w: float
    rel_error: float
    runtime_ms: float

    def to_dict(self):
        return asdict(self)
