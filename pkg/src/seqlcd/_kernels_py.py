"""NumPy fallback for the compiled kernels.

Every function here must produce bit-identical output to its Cython
counterpart in ``_kernels.pyx``: accumulation runs in float64, one term at
a time along the element (or sequence-offset) axis, vectorized only across
independent output entries. Keep the two files in lockstep.
"""

from __future__ import annotations

import numpy as np

BACKEND_NAME = "python"

_COL_BLOCK = 256  # bounds the float64 scratch for full-matrix builds


def _round_half_away(x: np.ndarray) -> np.ndarray:
    """Round to nearest integer, halves away from zero (int64)."""
    f = np.floor(x)
    d = x - f
    out = f.astype(np.int64)
    out += d > 0.5
    out += (d == 0.5) & (x > 0)
    return out


def dist_columns(ref: np.ndarray, query: np.ndarray, out: np.ndarray, cols: np.ndarray) -> None:
    """Fill out[:, c] with Euclidean distances ref[i] <-> query[c] for c in cols."""
    dim = ref.shape[1]
    ref64 = ref.astype(np.float64)
    for start in range(0, len(cols), _COL_BLOCK):
        blk = cols[start : start + _COL_BLOCK]
        q64 = query[blk].astype(np.float64)
        acc = np.zeros((ref.shape[0], len(blk)), dtype=np.float64)
        for k in range(dim):
            t = ref64[:, k, np.newaxis] - q64[np.newaxis, :, k]
            acc += t * t
        out[:, blk] = np.sqrt(acc).astype(np.float32)


def dist_entries(
    ref: np.ndarray,
    query: np.ndarray,
    out: np.ndarray,
    r_idx: np.ndarray,
    c_idx: np.ndarray,
) -> None:
    """Fill out[r, c] for each scattered (r, c) pair."""
    dim = ref.shape[1]
    acc = np.zeros(len(r_idx), dtype=np.float64)
    for k in range(dim):
        t = ref[r_idx, k].astype(np.float64) - query[c_idx, k].astype(np.float64)
        acc += t * t
    out[r_idx, c_idx] = np.sqrt(acc).astype(np.float32)


def score_candidates(
    D: np.ndarray,
    n: int,
    qs: np.ndarray,
    speeds: np.ndarray,
    ds: int,
) -> tuple[np.ndarray, np.ndarray]:
    """Best sequence-difference score over the speed sweep, per candidate.

    Sums D along the trajectory of slope v through (q, n) — ds+1 terms,
    speed-scaled reference indices rounded half away from zero and clamped
    to the row range. Ties between speeds keep the smaller v (strict <).
    Returns (scores float64, speed index int32) aligned with ``qs``.
    """
    rows = D.shape[0]
    ds2 = ds // 2
    col0 = n - ds2
    pos = qs.astype(np.int64) - ds2

    best = np.full(len(qs), np.inf, dtype=np.float64)
    best_v = np.full(len(qs), -1, dtype=np.int32)
    for vi in range(len(speeds)):
        v = float(speeds[vi])
        acc = np.zeros(len(qs), dtype=np.float64)
        for i in range(ds + 1):
            r = np.clip(_round_half_away(v * (pos + i)), 0, rows - 1)
            acc += D[r, col0 + i].astype(np.float64)
        upd = (best_v < 0) | (acc < best)
        best[upd] = acc[upd]
        best_v[upd] = vi
    return best, best_v
