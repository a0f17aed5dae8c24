"""Fast gradient solver for the penalized convex self-dictionary model.

Solves, over the weighted feasible set

    Omega = { X in R^{n x n} : X >= 0,  X(i,i) <= 1,
              w_i * X(i,j) <= w_j * X(i,i)  for all i, j },

the problem  min_{X in Omega}  ||M - M X||_F^2 + mu * P(X),  where the
penalty P is either ||diag(X)||_2^2 (the smooth-separable model) or
e^T diag(X) (the trace-penalized separable baseline).  The weight vector w
holds the column l1 norms of M; with unit weights the coupling constraint
reduces to X(i,j) <= X(i,i).

The solver is Nesterov's fast gradient method with projection onto Omega,
optional periodic restarts, and an optional online controller that steers
a statistic of the iterates (trace or residual) toward a target by
multiplicative mu updates.
"""

from dataclasses import dataclass, field, replace
from enum import Enum

import numpy as np

from .errors import DataError, NumericalError
from .linalg import as_matrix, col_l1_norms, frobenius_norm, spectral_norm_sq


class PenaltyKind(Enum):
    SQUARED_DIAG = "squared_diag"
    TRACE = "trace"


@dataclass
class MuControlConfig:
    """Online mu controller: steer T(X) toward ``target``.

    statistic: "diagonal" (T = tr(X)) or "residual" (T = ||M - MX||_F).
    target:    the set point (tau for diagonal, rho for residual).
    sigma0:    initial relative step of the multiplicative update.
    adjust_every: iterations between updates; 0 means "at restarts".
    """

    target: float
    statistic: str = "diagonal"
    sigma0: float = 0.5
    adjust_every: int = 0

    def __post_init__(self):
        if self.statistic not in ("diagonal", "residual"):
            raise ValueError(f"unknown statistic {self.statistic!r}")
        if self.target <= 0:
            raise ValueError("target must be positive")
        if self.sigma0 <= 0:
            raise ValueError("sigma0 must be positive")
        if self.adjust_every < 0:
            raise ValueError("adjust_every must be >= 0")


@dataclass
class SolverConfig:
    mu: float
    maxiter: int = 1000
    alpha0: float = 0.05
    penalty: PenaltyKind = PenaltyKind.SQUARED_DIAG
    restart_period: int = 50
    lipschitz_safety: float = 1.0
    mu_control: MuControlConfig | None = None

    def __post_init__(self):
        if isinstance(self.penalty, str):
            self.penalty = PenaltyKind(self.penalty)
        if self.mu <= 0:
            raise ValueError("mu must be positive")
        if self.maxiter < 1:
            raise ValueError("maxiter must be >= 1")
        if not 0.0 < self.alpha0 < 1.0:
            raise ValueError("alpha0 must lie in (0, 1)")
        if self.restart_period < 0:
            raise ValueError("restart_period must be >= 0 (0 = never)")
        if self.lipschitz_safety < 1.0:
            raise ValueError("lipschitz_safety must be >= 1")


@dataclass
class SolverResult:
    X: np.ndarray
    objective_trace: np.ndarray
    final_mu: float
    iterations_run: int


def project_omega(Y, w):
    """Euclidean projection of ``Y`` onto Omega with weights ``w``.

    The projection decomposes by rows.  For row i with diagonal variable t
    and slopes c_j = w_j / w_i the off-diagonal entries are
    clip(Y(i,j), 0, c_j * t), so the row objective is a convex piecewise
    quadratic in t with breakpoints max(Y(i,j), 0) / c_j.  The minimizer is
    found by sorting the breakpoints and scanning segments for the zero of
    the derivative, then clamping t to [0, 1].
    """
    Y = as_matrix(Y, "Y")
    n = Y.shape[0]
    if Y.shape[1] != n:
        raise DataError("project_omega expects a square matrix")
    w = np.asarray(w, dtype=float)
    if w.shape != (n,):
        raise DataError("weight vector length must match the matrix order")
    if np.any(w <= 0):
        raise ValueError("Omega weights must be strictly positive")

    C = w[None, :] / w[:, None]  # C[i, j] = w_j / w_i
    d = np.diagonal(Y).copy()

    offdiag = ~np.eye(n, dtype=bool)
    active = offdiag & (Y > 0)
    # per-entry breakpoint t_j = Y(i,j) / c_j; inactive entries never clamp
    B = np.where(active, Y / C, 0.0)
    CY = np.where(active, C * Y, 0.0)
    C2 = np.where(active, C * C, 0.0)

    order = np.argsort(-B, axis=1, kind="stable")
    Bs = np.take_along_axis(B, order, axis=1)
    S1 = np.cumsum(np.take_along_axis(CY, order, axis=1), axis=1)
    S2 = np.cumsum(np.take_along_axis(C2, order, axis=1), axis=1)

    zeros = np.zeros((n, 1))
    S1 = np.concatenate([zeros, S1], axis=1)  # prefix sums incl. empty prefix
    S2 = np.concatenate([zeros, S2], axis=1)
    # on the segment where the k largest-breakpoint entries are clamped,
    # g'(t) = 2 (1 + S2_k) t - 2 (d + S1_k)
    t_cand = (d[:, None] + S1) / (1.0 + S2)
    hi = np.concatenate([np.full((n, 1), np.inf), Bs], axis=1)
    lo = np.concatenate([Bs, zeros], axis=1)
    valid = (t_cand >= lo) & (t_cand <= hi)
    # last column covers an unconstrained minimizer below 0 (clamped later)
    valid[:, -1] |= t_cand[:, -1] < 0.0
    k = np.argmax(valid, axis=1)
    bad = ~valid.any(axis=1)
    if np.any(bad):
        # rounding at a derivative kink can push the zero just outside both
        # adjacent segments; take the candidate nearest its segment
        dist = np.maximum(lo - t_cand, 0.0) + np.maximum(t_cand - hi, 0.0)
        k[bad] = np.argmin(dist[bad], axis=1)
    t = np.clip(t_cand[np.arange(n), k], 0.0, 1.0)

    X = np.clip(Y, 0.0, C * t[:, None])
    np.fill_diagonal(X, t)
    return X


def objective(M, X, mu, penalty=PenaltyKind.SQUARED_DIAG):
    """||M - MX||_F^2 + mu * P(X)."""
    M = np.asarray(M, dtype=float)
    X = np.asarray(X, dtype=float)
    resid = frobenius_norm(M - M @ X) ** 2
    dg = np.diagonal(X)
    if PenaltyKind(penalty) is PenaltyKind.SQUARED_DIAG:
        pen = float(dg @ dg)
    else:
        pen = float(dg.sum())
    return resid + mu * pen


def gradient(M, Y, mu, penalty=PenaltyKind.SQUARED_DIAG):
    """Gradient of the penalized objective at ``Y``.

    2 M^T (M Y - M) plus 2*mu*Diag(diag(Y)) for the squared-diagonal
    penalty, or mu on the diagonal for the trace penalty.
    """
    M = np.asarray(M, dtype=float)
    Y = np.asarray(Y, dtype=float)
    G = 2.0 * (M.T @ (M @ Y - M))
    dg = np.arange(Y.shape[0])
    if PenaltyKind(penalty) is PenaltyKind.SQUARED_DIAG:
        G[dg, dg] += 2.0 * mu * np.diagonal(Y)
    else:
        G[dg, dg] += mu
    return G


def adapt_mu(current_mu, sigma, T_observed, T_target, last_direction=0):
    """One multiplicative controller update: mu <- mu * (1 +/- sigma).

    Assumes the steered statistic decreases as mu increases, so an observed
    value above target raises mu and one below lowers it.  When the update
    direction reverses versus ``last_direction``, sigma is halved first to
    damp oscillation.  Returns (new_mu, new_sigma, new_direction).
    """
    if current_mu <= 0:
        raise ValueError("current_mu must be positive")
    if sigma <= 0:
        raise ValueError("sigma must be positive")
    if T_observed == T_target:
        return current_mu, sigma, last_direction
    direction = 1 if T_observed > T_target else -1
    if last_direction != 0 and direction != last_direction:
        sigma = 0.5 * sigma
    return current_mu * (1.0 + direction * sigma), sigma, direction


def _alpha_next(alpha):
    # positive root of a^2 = (1 - a) * alpha^2
    a2 = alpha * alpha
    return 0.5 * (-a2 + np.sqrt(a2 * a2 + 4.0 * a2))


def fgm_solve(M, config, x0=None):
    """Run the fast gradient method on ``M`` and return a :class:`SolverResult`.

    Starts from X = 0 (or ``x0`` when warm-starting, e.g. in a mu
    continuation ladder).  Per iteration: projected gradient step with step
    size 1/L, L = lipschitz_safety * (2 sigma_max(M)^2 + 2 mu), followed by
    Nesterov extrapolation.  Every ``restart_period`` iterations momentum is
    reset (Y <- X, alpha <- alpha0); when a mu controller is configured its
    update is applied there (or every ``adjust_every`` iterations) and L is
    recomputed.  Stops early once ||X - X_prev||_F <= 1e-9 (1 + ||X||_F)
    for 5 consecutive iterations.
    """
    M = as_matrix(M)
    if M.shape[1] < 2:
        raise DataError("fgm_solve needs a matrix with at least 2 columns")
    if not np.any(M):
        raise NumericalError("fgm_solve: zero matrix has no Lipschitz constant")

    w_full = col_l1_norms(M)
    nonzero = w_full > 0.0
    if not np.all(nonzero):
        # all-zero columns cannot carry Omega weights: solve the nonzero
        # submatrix and re-embed as zero rows/columns of X
        idx = np.flatnonzero(nonzero)
        sub = fgm_solve(M[:, idx], config, None if x0 is None else x0[np.ix_(idx, idx)])
        n = M.shape[1]
        X = np.zeros((n, n))
        X[np.ix_(idx, idx)] = sub.X
        return SolverResult(X, sub.objective_trace, sub.final_mu, sub.iterations_run)

    n = M.shape[1]
    w = w_full
    mu = config.mu
    sigma2 = spectral_norm_sq(M)
    L = config.lipschitz_safety * (2.0 * sigma2 + 2.0 * mu)

    G = M.T @ M
    norm_m_sq = frobenius_norm(M) ** 2
    penalty = config.penalty

    X = np.zeros((n, n)) if x0 is None else as_matrix(x0, "x0").copy()
    Y = X.copy()
    alpha = config.alpha0
    diag_idx = np.arange(n)

    ctl = config.mu_control
    sigma_step = ctl.sigma0 if ctl is not None else 0.0
    direction = 0
    adjust_every = 0
    if ctl is not None:
        adjust_every = ctl.adjust_every if ctl.adjust_every > 0 else config.restart_period

    trace = np.empty(config.maxiter)
    stall = 0
    iterations = 0
    for k in range(1, config.maxiter + 1):
        Xp = X
        grad = 2.0 * (G @ Y - G)
        if penalty is PenaltyKind.SQUARED_DIAG:
            grad[diag_idx, diag_idx] += 2.0 * mu * np.diagonal(Y)
        else:
            grad[diag_idx, diag_idx] += mu
        X = project_omega(Y - grad / L, w)

        GX = G @ X
        resid = max(norm_m_sq - 2.0 * np.sum(G * X.T) + np.sum(X * GX), 0.0)
        dg = np.diagonal(X)
        pen = float(dg @ dg) if penalty is PenaltyKind.SQUARED_DIAG else float(dg.sum())
        trace[k - 1] = resid + mu * pen
        iterations = k

        at_restart = config.restart_period > 0 and k % config.restart_period == 0
        if ctl is not None and adjust_every > 0 and k % adjust_every == 0:
            if ctl.statistic == "diagonal":
                T_obs, T_tgt = float(dg.sum()), ctl.target
            else:
                # residual grows with mu; negate both sides so the
                # decreasing-statistic rule of adapt_mu applies
                T_obs, T_tgt = -np.sqrt(resid), -ctl.target
            mu, sigma_step, direction = adapt_mu(mu, sigma_step, T_obs, T_tgt, direction)
            L = config.lipschitz_safety * (2.0 * sigma2 + 2.0 * mu)

        if at_restart:
            Y = X.copy()
            alpha = config.alpha0
        else:
            alpha_new = _alpha_next(alpha)
            beta = alpha * (1.0 - alpha) / (alpha * alpha + alpha_new)
            Y = X + beta * (X - Xp)
            alpha = alpha_new

        if frobenius_norm(X - Xp) <= 1e-9 * (1.0 + frobenius_norm(X)):
            stall += 1
            if stall >= 5:
                break
        else:
            stall = 0

    return SolverResult(X, trace[:iterations], mu, iterations)


def solve_mu_ladder(M, mus, config, iters=None):
    """Continuation: solve for each mu in ``mus``, warm-starting each stage.

    ``iters`` optionally gives per-stage iteration budgets (defaults to
    config.maxiter per stage).  Returns the final stage's result with the
    concatenated objective trace and the total iteration count.
    """
    mus = list(mus)
    if not mus:
        raise ValueError("mu ladder must contain at least one value")
    if iters is None:
        iters = [config.maxiter] * len(mus)
    if len(iters) != len(mus):
        raise ValueError("iters must match mus in length")
    X = None
    traces = []
    total = 0
    res = None
    for mu_k, it_k in zip(mus, iters):
        stage = replace(config, mu=mu_k, maxiter=it_k, mu_control=None)
        res = fgm_solve(M, stage, x0=X)
        X = res.X
        traces.append(res.objective_trace)
        total += res.iterations_run
    return SolverResult(res.X, np.concatenate(traces), res.final_mu, total)
