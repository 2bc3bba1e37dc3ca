"""Forward-backward and Viterbi as sparse semiring matrix-vector products.

With emissions v_n (one column of the likelihood matrix, one entry per state)
and transition matrix T, the recursions are::

    alpha_1 = v_1 ∘ pi
    alpha_n = v_n ∘ (T^T alpha_{n-1})
    beta_N  = omega
    beta_n  = T (beta_{n+1} ∘ v_{n+1})
    logZ    = ⊕_k alpha_N(k) ⊗ omega(k)
    gamma_n = (alpha_n ∘ beta_n) ⊘ logZ

Run in the log semiring they give log-posteriors; in the tropical semiring the
forward pass scores the best path. Internally lattices are stored frame-major
(N×K) so each frame is contiguous; the public functions return K×N views.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Sequence

import numpy as np

from . import _kernels
from .errors import DimensionMismatchError, EmptyLatticeError
from .fsm import BatchGraph, WeightedGraph, add_phony_final, compose_batch
from .semiring import LOG, TROPICAL, Semiring
from .sparse import SparseMatrix, fold


@dataclass(frozen=True, eq=False)
class LikelihoodTensor:
    """K×N log-likelihoods; entry (i, n) is log p(x_n | z_n = i)."""

    values: np.ndarray

    def __post_init__(self):
        vals = np.asarray(self.values)
        if vals.dtype.kind != "f":
            vals = vals.astype(np.float64)
        if vals.ndim != 2 or vals.shape[0] < 1 or vals.shape[1] < 1:
            raise DimensionMismatchError(f"likelihoods must be a non-empty K×N matrix, got shape {vals.shape}")
        object.__setattr__(self, "values", LOG.validate_array(vals))

    @property
    def K(self) -> int:
        return self.values.shape[0]

    @property
    def N(self) -> int:
        return self.values.shape[1]


def as_likelihoods(V) -> LikelihoodTensor:
    return V if isinstance(V, LikelihoodTensor) else LikelihoodTensor(np.asarray(V))


@dataclass(frozen=True, eq=False)
class FBResult:
    alphas: np.ndarray  # K×N, semiring values
    betas: np.ndarray  # K×N, semiring values
    logZ: float  # log-domain total weight
    semiring: Semiring = LOG


@dataclass(frozen=True, eq=False)
class PosteriorMatrix:
    """K×N log-posteriors; ``probs`` gives the probability-domain view."""

    log: np.ndarray

    @property
    def probs(self) -> np.ndarray:
        return np.exp(self.log)

    @property
    def shape(self) -> tuple[int, int]:
        return self.log.shape


@dataclass(frozen=True)
class ViterbiPath:
    states: list[int]
    score: float


def _emissions(V: LikelihoodTensor, K: int, semiring: Semiring, dtype) -> np.ndarray:
    """Frame-major (N×K) emissions in the semiring's representation."""
    if V.K != K:
        raise DimensionMismatchError(f"likelihoods have {V.K} states, graph has {K}")
    return np.ascontiguousarray(semiring.from_log_array(V.values.T), dtype=dtype)


def _forward(T: SparseMatrix, pi: np.ndarray, v: np.ndarray, semiring: Semiring) -> np.ndarray:
    N, K = v.shape
    alphas = np.empty((N, K), dtype=v.dtype)
    alphas[0] = semiring.times_array(v[0], pi)
    tmp = np.empty(K, dtype=v.dtype)
    for n in range(1, N):
        T.matvec_transposed(alphas[n - 1], out=tmp)
        np.copyto(alphas[n], semiring.times_array(v[n], tmp))
    return alphas


def _backward(T: SparseMatrix, omega: np.ndarray, v: np.ndarray, semiring: Semiring) -> np.ndarray:
    N, K = v.shape
    betas = np.empty((N, K), dtype=v.dtype)
    betas[N - 1] = omega
    for n in range(N - 2, -1, -1):
        T.matvec(semiring.times_array(betas[n + 1], v[n + 1]), out=betas[n])
    return betas


def forward(g: WeightedGraph, V, semiring: Semiring = LOG, dtype=np.float64) -> np.ndarray:
    """K×N forward lattice in ``semiring`` values."""
    V = as_likelihoods(V)
    T, pi, _ = g.view(semiring, dtype)
    return _forward(T, pi, _emissions(V, g.K, semiring, dtype), semiring).T


def backward(g: WeightedGraph, V, semiring: Semiring = LOG, dtype=np.float64) -> np.ndarray:
    """K×N backward lattice in ``semiring`` values."""
    V = as_likelihoods(V)
    T, _, omega = g.view(semiring, dtype)
    return _backward(T, omega, _emissions(V, g.K, semiring, dtype), semiring).T


def total_weight(alphas: np.ndarray, omega: np.ndarray, semiring: Semiring = LOG) -> float:
    """⊕_k alpha_N(k) ⊗ omega(k) as a raw semiring value (may be the zero element)."""
    omega = omega.to_dense() if hasattr(omega, "to_dense") else np.asarray(omega)
    last = np.ascontiguousarray(alphas[:, -1])
    if last.shape != omega.shape:
        raise DimensionMismatchError(f"alphas have {last.shape[0]} states, omega has {omega.shape[0]}")
    return fold(semiring.times_array(last, omega.astype(last.dtype, copy=False)), semiring)


def log_marginal(alphas: np.ndarray, omega, semiring: Semiring = LOG) -> float:
    """log p(X); raises EmptyLatticeError when no accepting path has weight."""
    total = total_weight(alphas, omega, semiring)
    if total == semiring.zero:
        raise EmptyLatticeError()
    return semiring.to_log_prob(total)


def _posterior_log(alphas: np.ndarray, betas: np.ndarray, total: float, semiring: Semiring) -> np.ndarray:
    gamma = semiring.times_array(alphas, betas)
    if semiring is LOG or semiring is TROPICAL:
        return gamma - total
    return semiring.to_log_array(gamma / total)


def posteriors(fb: FBResult) -> PosteriorMatrix:
    """gamma_n(k) = alpha_n(k) ⊗ beta_n(k) ⊘ Z, returned as log-probabilities."""
    total = fb.semiring.from_log_prob(fb.logZ)
    return PosteriorMatrix(_posterior_log(fb.alphas, fb.betas, total, fb.semiring))


def lattices(g: WeightedGraph, V, semiring: Semiring = LOG, dtype=np.float64) -> FBResult:
    V = as_likelihoods(V)
    T, pi, omega = g.view(semiring, dtype)
    v = _emissions(V, g.K, semiring, dtype)
    alphas = _forward(T, pi, v, semiring).T
    betas = _backward(T, omega, v, semiring).T
    return FBResult(alphas, betas, log_marginal(alphas, omega, semiring), semiring)


def forward_backward(g: WeightedGraph, V, semiring: Semiring = LOG, dtype=np.float64) -> tuple[PosteriorMatrix, float]:
    """(posteriors, logZ) for one sequence."""
    fb = lattices(g, V, semiring, dtype)
    return posteriors(fb), fb.logZ


# -- batches -----------------------------------------------------------------


@dataclass
class _PaddedBatch:
    graph: WeightedGraph
    offsets: tuple[int, ...]
    phony: bool


def _padded(bg: BatchGraph, phony: bool) -> _PaddedBatch:
    cache = bg._cache
    if phony not in cache:
        if phony:
            pb = compose_batch([add_phony_final(g) for g in bg.graphs])
            cache[phony] = _PaddedBatch(pb.composed, pb.offsets, True)
        else:
            cache[phony] = _PaddedBatch(bg.composed, bg.offsets, False)
    return cache[phony]


def batch_lattices(
    bg: BatchGraph, Vs: Sequence, semiring: Semiring = LOG, dtype=np.float64
) -> list[FBResult | EmptyLatticeError]:
    """Run the recursions once on the block-diagonal system.

    Equal-length members run on the composed graph directly. Mixed lengths use
    one phony end state per member, N_max + 1 frames, and emissions padded with
    0̄ (real states) and 1̄ (phony state) past each member's end. Each entry of
    the result is the member's FBResult, or the EmptyLatticeError for that
    member.
    """
    Vs = [as_likelihoods(V) for V in Vs]
    if len(Vs) != bg.members:
        raise DimensionMismatchError(f"batch has {bg.members} members but {len(Vs)} likelihood tensors were given")
    for i, (g, V) in enumerate(zip(bg.graphs, Vs)):
        if V.K != g.K:
            raise DimensionMismatchError(f"member {i}: likelihoods have {V.K} states, graph has {g.K}")
    lengths = [V.N for V in Vs]
    if bg.lengths is not None and tuple(lengths) != bg.lengths:
        raise DimensionMismatchError(f"likelihood lengths {lengths} differ from batch lengths {list(bg.lengths)}")

    mixed = len(set(lengths)) > 1
    pb = _padded(bg, mixed)
    T, pi, omega = pb.graph.view(semiring, dtype)
    n_frames = max(lengths) + 1 if mixed else lengths[0]

    v = np.full((n_frames, pb.graph.K), semiring.zero, dtype=dtype)
    for lo, g, V in zip(pb.offsets, bg.graphs, Vs):
        v[: V.N, lo : lo + g.K] = _emissions(V, g.K, semiring, dtype)
        if mixed:
            v[V.N :, lo + g.K] = semiring.one

    alphas = _forward(T, pi, v, semiring)
    betas = _backward(T, omega, v, semiring)

    results: list[FBResult | EmptyLatticeError] = []
    for i, (lo, g, V) in enumerate(zip(pb.offsets, bg.graphs, Vs)):
        a = alphas[: V.N, lo : lo + g.K].T
        b = betas[: V.N, lo : lo + g.K].T
        if mixed:
            total = fold(semiring.times_array(alphas[-1, lo + g.K : lo + g.K + 1], omega[lo + g.K : lo + g.K + 1]), semiring)
        else:
            total = fold(semiring.times_array(np.ascontiguousarray(a[:, -1]), omega[lo : lo + g.K]), semiring)
        if total == semiring.zero:
            results.append(EmptyLatticeError(member=i))
        else:
            results.append(FBResult(a, b, semiring.to_log_prob(total), semiring))
    return results


def forward_backward_batch(
    bg: BatchGraph, Vs: Sequence, semiring: Semiring = LOG, dtype=np.float64
) -> list[tuple[PosteriorMatrix, float]]:
    """Per-member (posteriors, logZ), bit-identical to solo forward_backward runs."""
    out = []
    for res in batch_lattices(bg, Vs, semiring, dtype):
        if isinstance(res, EmptyLatticeError):
            raise res
        out.append((posteriors(res), res.logZ))
    return out


# -- Viterbi -----------------------------------------------------------------


def viterbi(g: WeightedGraph, V) -> ViterbiPath:
    """Best accepting path; ties go to the lowest state index."""
    V = as_likelihoods(V)
    T, pi, omega = g.view(TROPICAL)
    v = _emissions(V, g.K, TROPICAL, np.float64)
    N, K = v.shape
    delta = v[0] + pi
    back = np.empty((N, K), dtype=np.int64)
    tmp = np.empty(K)
    for n in range(1, N):
        _kernels.tropical_spmv_argmax(T.col_ptr, T.col_rows, T.col_data, delta, tmp, back[n])
        delta = v[n] + tmp
    final = delta + omega
    best = int(np.argmax(final))
    score = float(final[best])
    if score == TROPICAL.zero:
        raise EmptyLatticeError()
    states = [best]
    for n in range(N - 1, 0, -1):
        states.append(int(back[n, states[-1]]))
    states.reverse()
    return ViterbiPath(states, score)


def path_score(g: WeightedGraph, V, states: Sequence[int]) -> float:
    """Score a state sequence arc by arc, associating additions as the recursions do."""
    V = as_likelihoods(V)
    if len(states) != V.N:
        raise DimensionMismatchError(f"path has {len(states)} states for {V.N} frames")
    vals = V.values
    acc = vals[states[0], 0] + g.pi[states[0]]
    for n in range(1, V.N):
        acc = vals[states[n], n] + (g.T.lookup(states[n - 1], states[n]) + acc)
    return float(acc + g.omega[states[-1]])
