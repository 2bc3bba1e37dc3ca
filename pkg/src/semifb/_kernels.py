"""Compiled compressed-storage kernels.

Every kernel computes, for each output slot r,

    y[r] = ⊕_{p in indptr[r]:indptr[r+1]} data[p] ⊗ x[indices[p]]

folding entries in storage order (ascending index). Parallelism is over
output slots only, so each output's accumulation order never changes with the
thread count. Entries whose operand is the zero element are skipped; this is
exact because they contribute the ⊕ identity.
"""

import math
import os

import numba
import numpy as np
from numba import njit, prange

if "NUMBA_THREADING_LAYER_PRIORITY" not in os.environ:
    # TBB first (numba's default) warns on older system TBB builds
    numba.config.THREADING_LAYER_PRIORITY = ["omp", "workqueue", "tbb"]


def set_threads(n: int | None) -> None:
    """Thread count for the parallel kernels; None means all logical processors."""
    numba.set_num_threads(numba.config.NUMBA_NUM_THREADS if n is None else max(1, min(n, numba.config.NUMBA_NUM_THREADS)))


NEG_INF = -np.inf


@njit(parallel=True, cache=True)
def log_spmv(indptr, indices, data, x, out):
    for r in prange(out.shape[0]):
        m = NEG_INF
        s = 0.0
        for p in range(indptr[r], indptr[r + 1]):
            xv = x[indices[p]]
            w = data[p]
            if xv == NEG_INF or w == NEG_INF:
                continue
            y = w + xv
            # streaming log-sum-exp: s holds sum(exp(term - m))
            if y > m:
                s = s * math.exp(m - y) + 1.0
                m = y
            else:
                s += math.exp(y - m)
        if m == NEG_INF:
            out[r] = NEG_INF
        else:
            out[r] = m + math.log(s)


@njit(parallel=True, cache=True)
def tropical_spmv(indptr, indices, data, x, out):
    for r in prange(out.shape[0]):
        m = NEG_INF
        for p in range(indptr[r], indptr[r + 1]):
            y = data[p] + x[indices[p]]
            if y > m:
                m = y
        out[r] = m


@njit(parallel=True, cache=True)
def tropical_spmv_argmax(indptr, indices, data, x, out, arg):
    """Tropical product plus the first (lowest-index) maximizing source; -1 if none."""
    for r in prange(out.shape[0]):
        m = NEG_INF
        best = -1
        for p in range(indptr[r], indptr[r + 1]):
            y = data[p] + x[indices[p]]
            if y > m:
                m = y
                best = indices[p]
        out[r] = m
        arg[r] = best


@njit(parallel=True, cache=True)
def prob_spmv(indptr, indices, data, x, out):
    for r in prange(out.shape[0]):
        s = 0.0
        for p in range(indptr[r], indptr[r + 1]):
            s += data[p] * x[indices[p]]
        out[r] = s


@njit(cache=True)
def log_fold(values):
    """Ascending-order ⊕-fold of a log-domain vector (same arithmetic as log_spmv)."""
    m = NEG_INF
    s = 0.0
    for i in range(values.shape[0]):
        y = values[i]
        if y == NEG_INF:
            continue
        if y > m:
            s = s * math.exp(m - y) + 1.0
            m = y
        else:
            s += math.exp(y - m)
    if m == NEG_INF:
        return NEG_INF
    return m + math.log(s)


@njit(cache=True)
def tropical_fold(values):
    m = NEG_INF
    for i in range(values.shape[0]):
        if values[i] > m:
            m = values[i]
    return m


@njit(cache=True)
def prob_fold(values):
    s = 0.0
    for i in range(values.shape[0]):
        s += values[i]
    return s


SPMV = {"log": log_spmv, "tropical": tropical_spmv, "prob": prob_spmv}
FOLD = {"log": log_fold, "tropical": tropical_fold, "prob": prob_fold}
