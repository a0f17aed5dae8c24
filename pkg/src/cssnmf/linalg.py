"""Dense-matrix kernels used throughout the package.

Matrices are plain float64 ``numpy.ndarray``s.  The helpers here cover the
norms the solver and metrics need, a deterministic power iteration for the
squared spectral norm (the Lipschitz constant of the data-fidelity term),
and a small symmetric eigendecomposition used by spectral clustering.
"""

import warnings

import numpy as np

from .errors import DataError, NumericalError


def as_matrix(M, name="matrix"):
    """Validate and return ``M`` as a finite 2-D float64 array."""
    A = np.asarray(M, dtype=float)
    if A.ndim != 2:
        raise DataError(f"{name} must be 2-D, got shape {A.shape}")
    if not np.all(np.isfinite(A)):
        raise DataError(f"{name} contains NaN or Inf entries")
    return A


def frobenius_norm(M):
    """sqrt of the sum of squared entries."""
    return float(np.linalg.norm(np.asarray(M, dtype=float), "fro"))


def col_l1_norms(M):
    """Vector of column l1 norms, entry j = sum_i |M(i,j)|."""
    return np.abs(np.asarray(M, dtype=float)).sum(axis=0)


def l1_operator_norm(M):
    """max_j ||M(:,j)||_1 (the matrix norm induced by the vector l1 norm)."""
    norms = col_l1_norms(M)
    return float(norms.max()) if norms.size else 0.0


def spectral_norm_sq(M, tol=1e-10, max_iter=5000):
    """Largest squared singular value of ``M`` by power iteration on M^T M.

    The start vector is the normalized all-ones vector, so the estimate (and
    everything downstream that consumes it, e.g. the solver step size) is
    reproducible.  On non-convergence a warning is issued and the last
    Rayleigh quotient is returned; callers that need a guaranteed upper
    bound should inflate by (1 + tol).
    """
    A = as_matrix(M)
    if tol <= 0:
        raise ValueError("tol must be positive")
    if not np.any(A):
        raise NumericalError("spectral_norm_sq: zero matrix")
    n = A.shape[1]
    G = A.T @ A
    v = np.full(n, 1.0 / np.sqrt(n))
    lam = 0.0
    for _ in range(max_iter):
        gv = G @ v
        nrm = np.linalg.norm(gv)
        if nrm == 0.0:
            # ones vector happens to be in the null space; perturb once
            v = np.zeros(n)
            v[0] = 1.0
            continue
        v = gv / nrm
        lam_new = float(v @ (G @ v))
        if abs(lam_new - lam) <= tol * lam_new:
            return lam_new
        lam = lam_new
    warnings.warn(
        f"power iteration did not converge in {max_iter} iterations; "
        "returning last estimate",
        RuntimeWarning,
    )
    return lam


def sym_eig(S, sym_tol=1e-12):
    """Eigendecomposition of a symmetric matrix.

    Returns ``(eigenvalues, eigenvectors)`` with eigenvalues ascending and
    orthonormal eigenvector columns.  Raises on non-square or non-symmetric
    input (asymmetry above ``sym_tol`` relative to ||S||_F).
    """
    A = as_matrix(S, "S")
    if A.shape[0] != A.shape[1]:
        raise DataError(f"sym_eig expects a square matrix, got {A.shape}")
    scale = frobenius_norm(A)
    if frobenius_norm(A - A.T) > sym_tol * max(scale, 1.0):
        raise DataError("sym_eig: input is not symmetric")
    vals, vecs = np.linalg.eigh(0.5 * (A + A.T))
    return vals, vecs
