"""CSV / JSON serialization.

Matrix CSV format (shared by every command and fixture): one matrix row
per line, comma-separated decimal literals, no header.  Floats are written
with ``repr`` so values round-trip exactly and re-runs are byte-identical.
"""

import json
import os

import numpy as np

from .errors import DataError


def format_float(x):
    """Full round-trip decimal formatting for a scalar."""
    return repr(float(x))


def load_matrix_csv(path):
    """Load a matrix from the plain CSV format; rejects ragged rows."""
    rows = []
    width = None
    with open(path, "r", encoding="ascii") as fh:
        for lineno, line in enumerate(fh, start=1):
            line = line.strip()
            if not line:
                continue
            try:
                row = [float(tok) for tok in line.split(",")]
            except ValueError as exc:
                raise DataError(f"{path}:{lineno}: unparsable entry ({exc})") from None
            if width is None:
                width = len(row)
            elif len(row) != width:
                raise DataError(
                    f"{path}:{lineno}: ragged row (expected {width} entries, got {len(row)})"
                )
            rows.append(row)
    if not rows:
        raise DataError(f"{path}: empty matrix file")
    M = np.array(rows, dtype=float)
    if not np.all(np.isfinite(M)):
        raise DataError(f"{path}: matrix contains NaN or Inf")
    return M


def save_matrix_csv(path, M):
    """Write a matrix in the plain CSV format."""
    A = np.atleast_2d(np.asarray(M, dtype=float))
    with open(path, "w", encoding="ascii") as fh:
        for i in range(A.shape[0]):
            fh.write(",".join(format_float(v) for v in A[i]))
            fh.write("\n")


def load_index_csv(path):
    """Load a one-integer-per-line index/label file."""
    out = []
    with open(path, "r", encoding="ascii") as fh:
        for line in fh:
            line = line.strip()
            if line:
                out.append(int(line))
    return out


def save_index_csv(path, indices):
    with open(path, "w", encoding="ascii") as fh:
        for k in indices:
            fh.write(f"{int(k)}\n")


def save_json(path, obj):
    with open(path, "w", encoding="ascii") as fh:
        json.dump(obj, fh, indent=2, sort_keys=True)
        fh.write("\n")


def load_json(path):
    with open(path, "r", encoding="ascii") as fh:
        return json.load(fh)


def ensure_dir(path):
    os.makedirs(path, exist_ok=True)
    return path
