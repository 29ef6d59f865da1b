# cython: language_level=3, boundscheck=False, wraparound=False, cdivision=True
"""Compiled hot loops: distance evaluation and sequence-difference scoring.

Bit-for-bit twin of ``_kernels_py``; accumulation is float64 with one term
added per element in index order. Keep the two files in lockstep.
"""

import numpy as np

from libc.math cimport floor, sqrt

BACKEND_NAME = "compiled"


cdef inline Py_ssize_t _round_half_away(double x) noexcept nogil:
    cdef double f = floor(x)
    cdef double d = x - f
    if d > 0.5:
        return <Py_ssize_t> f + 1
    if d < 0.5:
        return <Py_ssize_t> f
    if x > 0:
        return <Py_ssize_t> f + 1
    return <Py_ssize_t> f


cdef inline Py_ssize_t _clamp(Py_ssize_t r, Py_ssize_t hi) noexcept nogil:
    if r < 0:
        return 0
    if r > hi:
        return hi
    return r


def dist_columns(const float[:, ::1] ref, const float[:, ::1] query,
                 float[:, ::1] out, const Py_ssize_t[::1] cols):
    """Fill out[:, c] with Euclidean distances ref[i] <-> query[c] for c in cols."""
    cdef Py_ssize_t rows = ref.shape[0]
    cdef Py_ssize_t dim = ref.shape[1]
    cdef Py_ssize_t nc = cols.shape[0]
    cdef Py_ssize_t i, j, k, c
    cdef double acc, diff
    with nogil:
        for j in range(nc):
            c = cols[j]
            for i in range(rows):
                acc = 0.0
                for k in range(dim):
                    diff = <double> ref[i, k] - <double> query[c, k]
                    acc += diff * diff
                out[i, c] = <float> sqrt(acc)


def dist_entries(const float[:, ::1] ref, const float[:, ::1] query,
                 float[:, ::1] out, const Py_ssize_t[::1] r_idx,
                 const Py_ssize_t[::1] c_idx):
    """Fill out[r, c] for each scattered (r, c) pair."""
    cdef Py_ssize_t dim = ref.shape[1]
    cdef Py_ssize_t npairs = r_idx.shape[0]
    cdef Py_ssize_t p, k, r, c
    cdef double acc, diff
    with nogil:
        for p in range(npairs):
            r = r_idx[p]
            c = c_idx[p]
            acc = 0.0
            for k in range(dim):
                diff = <double> ref[r, k] - <double> query[c, k]
                acc += diff * diff
            out[r, c] = <float> sqrt(acc)


def score_candidates(const float[:, ::1] D, Py_ssize_t n,
                     const Py_ssize_t[::1] qs, const double[::1] speeds,
                     Py_ssize_t ds):
    """Best sequence-difference score over the speed sweep, per candidate.

    Sums D along the trajectory of slope v through (q, n) — ds+1 terms,
    speed-scaled reference indices rounded half away from zero and clamped
    to the row range. Ties between speeds keep the smaller v (strict <).
    Returns (scores float64, speed index int32) aligned with ``qs``.
    """
    cdef Py_ssize_t rows = D.shape[0]
    cdef Py_ssize_t ds2 = ds // 2
    cdef Py_ssize_t col0 = n - ds2
    cdef Py_ssize_t nq = qs.shape[0]
    cdef Py_ssize_t nv = speeds.shape[0]

    scores = np.empty(nq, dtype=np.float64)
    speed_idx = np.empty(nq, dtype=np.int32)
    cdef double[::1] scores_v = scores
    cdef int[::1] speed_v = speed_idx

    cdef Py_ssize_t iq, vi, i, r, pos
    cdef double v, acc, best
    cdef int best_v
    with nogil:
        for iq in range(nq):
            pos = qs[iq] - ds2
            best = 0.0
            best_v = -1
            for vi in range(nv):
                v = speeds[vi]
                acc = 0.0
                for i in range(ds + 1):
                    r = _clamp(_round_half_away(v * <double> (pos + i)), rows - 1)
                    acc += <double> D[r, col0 + i]
                if best_v < 0 or acc < best:
                    best = acc
                    best_v = vi
            scores_v[iq] = best
            speed_v[iq] = best_v
    return scores, speed_idx
