"""Synthetic benchmark generators with full ground truth.

Three families: random Dirichlet mixtures with Gaussian noise, pairwise
midpoints with adversarial noise on the midpoint block, and noiseless
pure classes with appended uniform outlier columns.  All end with
per-column l1 normalization of M; the pre-normalization ground truth and
the normalization scalars are kept on the instance.
"""

import os
from dataclasses import dataclass, field

import numpy as np

from .errors import DataError
from .io import (ensure_dir, load_index_csv, load_json, load_matrix_csv,
                 save_index_csv, save_json, save_matrix_csv)
from .linalg import frobenius_norm
from .rng import stream


@dataclass
class SyntheticInstance:
    M: np.ndarray
    W_true: np.ndarray
    H_true: np.ndarray
    labels: np.ndarray            # class id per pure column (indices 0..n0-1)
    pure_sets: list               # r index arrays S_t
    epsilon: float
    scenario: str
    seed: int
    col_scale: np.ndarray         # l1 sums used to normalize the columns of M
    params: dict = field(default_factory=dict)

    @property
    def n0(self):
        return len(self.labels)

    @property
    def r(self):
        return self.W_true.shape[1]

    @property
    def class_sizes(self):
        return [len(s) for s in self.pure_sets]


def dirichlet_noise_grid():
    """The 7 noise levels of the Dirichlet benchmark, logspace(-5, -0.05)."""
    return np.logspace(-5.0, -0.05, 7)


def midpoints_noise_grid():
    """The 4 noise levels of the midpoint benchmark, logspace(-3, -0.05)."""
    return np.logspace(-3.0, -0.05, 4)


def _one_hot_blocks(r, per_class):
    H0 = np.zeros((r, r * per_class))
    for j in range(r * per_class):
        H0[j // per_class, j] = 1.0
    return H0


def _scaled_noise(N, eps, m0_norm):
    nrm = frobenius_norm(N)
    if eps == 0.0 or nrm == 0.0:
        return np.zeros_like(N)
    return N * (eps * m0_norm / nrm)


def _normalize_columns(M):
    sums = M.sum(axis=0)
    if np.any(sums <= 0.0):
        raise DataError("column with nonpositive l1 mass after clipping")
    return M / sums, sums


def gen_dirichlet(seed, eps, alpha=1.0):
    """30 x 100 Dirichlet-mixture instance: r=5 classes of 10 pure columns,
    50 Dirichlet(alpha) mixtures, i.i.d. Gaussian noise at relative
    Frobenius level ``eps``."""
    m, r, per_class, n_mix = 30, 5, 10, 50
    rng = stream(seed)
    W = rng.random((m, r))
    H0 = _one_hot_blocks(r, per_class)
    H1 = rng.dirichlet(alpha * np.ones(r), size=n_mix).T
    H = np.hstack([H0, H1])
    M0 = W @ H
    N = _scaled_noise(rng.standard_normal(M0.shape), eps, frobenius_norm(M0))
    M, scale = _normalize_columns(np.maximum(0.0, M0 + N))
    n0 = r * per_class
    return SyntheticInstance(
        M=M,
        W_true=W,
        H_true=H,
        labels=np.repeat(np.arange(r), per_class),
        pure_sets=[np.arange(t * per_class, (t + 1) * per_class) for t in range(r)],
        epsilon=float(eps),
        scenario="dirichlet",
        seed=int(seed),
        col_scale=scale,
        params={"alpha": float(alpha), "n0": n0},
    )


def gen_midpoints(seed, eps):
    """30 x 95 midpoint instance: r=10 classes of 5 pure columns plus the
    45 pairwise midpoints, with adversarial noise on the midpoint block
    only (pushed away from the centroid of the pure columns), scaled to
    relative level ``eps`` and clipped nonnegative."""
    m, r, per_class = 30, 10, 5
    rng = stream(seed)
    W = rng.random((m, r))
    H0 = _one_hot_blocks(r, per_class)
    pairs = [(p, q) for p in range(r) for q in range(p + 1, r)]
    H1 = np.zeros((r, len(pairs)))
    for j, (p, q) in enumerate(pairs):
        H1[p, j] = 0.5
        H1[q, j] = 0.5
    H = np.hstack([H0, H1])
    M0 = W @ H
    n0 = r * per_class
    wbar = M0[:, :n0].mean(axis=1)
    N = np.zeros_like(M0)
    N[:, n0:] = M0[:, n0:] - wbar[:, None]
    N = np.maximum(0.0, _scaled_noise(N, eps, frobenius_norm(M0)))
    M, scale = _normalize_columns(np.maximum(0.0, M0 + N))
    return SyntheticInstance(
        M=M,
        W_true=W,
        H_true=H,
        labels=np.repeat(np.arange(r), per_class),
        pure_sets=[np.arange(t * per_class, (t + 1) * per_class) for t in range(r)],
        epsilon=float(eps),
        scenario="midpoints",
        seed=int(seed),
        col_scale=scale,
        params={"n0": n0},
    )


def gen_outliers(seed, ell):
    """30 x (50 + ell) outlier instance: r=5 noiseless classes of 10 pure
    columns plus ``ell`` uniform-[0,1] outlier columns (unlabeled)."""
    if not 1 <= ell <= 15:
        raise DataError(f"ell={ell} out of range [1, 15]")
    m, r, per_class = 30, 5, 10
    rng = stream(seed)
    W = rng.random((m, r))
    H0 = _one_hot_blocks(r, per_class)
    M0 = W @ H0
    B = rng.random((m, ell))
    M, scale = _normalize_columns(np.hstack([M0, B]))
    n0 = r * per_class
    return SyntheticInstance(
        M=M,
        W_true=W,
        H_true=np.hstack([H0, np.zeros((r, ell))]),
        labels=np.repeat(np.arange(r), per_class),
        pure_sets=[np.arange(t * per_class, (t + 1) * per_class) for t in range(r)],
        epsilon=0.0,
        scenario="outliers",
        seed=int(seed),
        col_scale=scale,
        params={"ell": int(ell), "n0": n0},
    )


def example1_h():
    """The 3 x 9 coefficient matrix of the worked block-structure example:
    class sizes (2, 3, 1) followed by the three pairwise midpoints."""
    H = np.zeros((3, 9))
    H[0, 0] = H[0, 1] = 1.0
    H[1, 2] = H[1, 3] = H[1, 4] = 1.0
    H[2, 5] = 1.0
    H[:, 6] = [0.0, 0.5, 0.5]
    H[:, 7] = [0.5, 0.0, 0.5]
    H[:, 8] = [0.5, 0.5, 0.0]
    return H


def example1_xstar():
    """Closed-form optimum of the squared-diagonal model on the worked
    example: row i in class t equals H(t,:) / p_t, rows off the pure set
    are zero."""
    H = example1_h()
    p = (2, 3, 1)
    sets = [[0, 1], [2, 3, 4], [5]]
    X = np.zeros((9, 9))
    for t, S_t in enumerate(sets):
        for i in S_t:
            X[i, :] = H[t, :] / p[t]
    return X


def gen_example1(seed, m=20):
    """Noiseless worked-example instance with a seeded uniform-[0,1] basis.

    Columns are not l1-normalized; the weighted feasible set absorbs the
    differing column scales.
    """
    rng = stream(seed)
    W = rng.random((m, 3))
    H = example1_h()
    return SyntheticInstance(
        M=W @ H,
        W_true=W,
        H_true=H,
        labels=np.array([0, 0, 1, 1, 1, 2]),
        pure_sets=[np.array([0, 1]), np.array([2, 3, 4]), np.array([5])],
        epsilon=0.0,
        scenario="example1",
        seed=int(seed),
        col_scale=np.ones(9),
        params={"n0": 6},
    )


def generate(scenario, seed, eps=0.0, ell=1, alpha=1.0):
    """Dispatch by scenario name."""
    if scenario == "dirichlet":
        return gen_dirichlet(seed, eps, alpha)
    if scenario == "midpoints":
        return gen_midpoints(seed, eps)
    if scenario == "outliers":
        return gen_outliers(seed, ell)
    if scenario == "example1":
        return gen_example1(seed)
    raise DataError(f"unknown scenario {scenario!r}")


def save_instance(directory, inst):
    """Serialize an instance to a directory of CSV files plus meta.json."""
    ensure_dir(directory)
    save_matrix_csv(os.path.join(directory, "M.csv"), inst.M)
    save_matrix_csv(os.path.join(directory, "W_true.csv"), inst.W_true)
    save_matrix_csv(os.path.join(directory, "H_true.csv"), inst.H_true)
    save_index_csv(os.path.join(directory, "labels.csv"), inst.labels)
    meta = {
        "scenario": inst.scenario,
        "seed": inst.seed,
        "eps": inst.epsilon,
        "m": int(inst.M.shape[0]),
        "n": int(inst.M.shape[1]),
        "r": int(inst.r),
        "p": inst.class_sizes,
        "pure_sets": [[int(j) for j in s] for s in inst.pure_sets],
        "col_scale": [float(v) for v in inst.col_scale],
        "params": inst.params,
    }
    save_json(os.path.join(directory, "meta.json"), meta)


def load_instance(directory):
    meta = load_json(os.path.join(directory, "meta.json"))
    return SyntheticInstance(
        M=load_matrix_csv(os.path.join(directory, "M.csv")),
        W_true=load_matrix_csv(os.path.join(directory, "W_true.csv")),
        H_true=load_matrix_csv(os.path.join(directory, "H_true.csv")),
        labels=np.array(load_index_csv(os.path.join(directory, "labels.csv")), dtype=int),
        pure_sets=[np.array(s, dtype=int) for s in meta["pure_sets"]],
        epsilon=float(meta["eps"]),
        scenario=meta["scenario"],
        seed=int(meta["seed"]),
        col_scale=np.array(meta["col_scale"], dtype=float),
        params=meta.get("params", {}),
    )
