"""Brute-force path enumeration, used as the test oracle.

Every length-N state sequence is scored as

    pi(s_1) ⊗ v_1(s_1) ⊗ T(s_1, s_2) ⊗ v_2(s_2) ⊗ ... ⊗ omega(s_N)

directly from dense arrays, without any of the sparse kernels. Path scores
are accumulated in the same association order as the recursions, so tropical
results can be compared exactly; log totals use exactly-rounded summation
(``math.fsum``) after a max shift.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .errors import EmptyLatticeError, OracleTooLargeError
from .fsm import WeightedGraph
from .inference import as_likelihoods

MAX_PATHS = 10**7


@dataclass(frozen=True, eq=False)
class BruteForceResult:
    logZ: float
    posteriors: np.ndarray  # K×N probabilities
    best_path: list[int]
    best_score: float


def _state_at(idx: np.ndarray, n: int, K: int, N: int) -> np.ndarray:
    return (idx // K ** (N - 1 - n)) % K


def path_scores(g: WeightedGraph, V) -> np.ndarray:
    """Score of every state sequence, indexed in lexicographic (mixed-radix) order."""
    V = as_likelihoods(V)
    K, N = V.K, V.N
    if K != g.K:
        raise ValueError(f"likelihoods have {K} states, graph has {g.K}")
    if K**N > MAX_PATHS:
        raise OracleTooLargeError(f"{K}^{N} paths exceeds the enumeration guard of {MAX_PATHS}")
    T = g.T.to_dense()
    pi = g.pi.to_dense()
    omega = g.omega.to_dense()
    vals = V.values
    idx = np.arange(K**N, dtype=np.int64)
    prev = _state_at(idx, 0, K, N)
    acc = pi[prev] + vals[prev, 0]
    for n in range(1, N):
        cur = _state_at(idx, n, K, N)
        acc = vals[cur, n] + (T[prev, cur] + acc)
        prev = cur
    return acc + omega[prev]


def brute_force(g: WeightedGraph, V) -> BruteForceResult:
    V = as_likelihoods(V)
    K, N = V.K, V.N
    scores = path_scores(g, V)
    top = scores.max()
    if top == -math.inf:
        raise EmptyLatticeError()
    weights = np.exp(scores - top)
    total = math.fsum(weights)
    logZ = top + math.log(total)

    idx = np.arange(K**N, dtype=np.int64)
    post = np.zeros((K, N))
    for n in range(N):
        states = _state_at(idx, n, K, N)
        for k in range(K):
            post[k, n] = math.fsum(weights[states == k]) / total

    best = int(np.argmax(scores))
    path = [int(_state_at(np.int64(best), n, K, N)) for n in range(N)]
    return BruteForceResult(float(logZ), post, path, float(scores[best]))
