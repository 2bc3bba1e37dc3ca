"""Weighted graphs (the Markov process), their text format, batching and generators.

A :class:`WeightedGraph` holds K states, a K×K transition matrix whose entry
(i, j) is the log-score of moving from state i to state j, an initial vector
``pi`` and a final vector ``omega``. All weights are log-probabilities in nats.

Text format, one record per line, ``#`` starts a comment::

    K <num_states>
    I <state> <log_weight>
    F <state> <log_weight>
    A <src> <dst> <log_weight>

``-inf`` encodes the zero element. Repeated records for the same state or arc
are combined with ⊕.
"""

from __future__ import annotations

import io
import math
from collections import deque
from dataclasses import dataclass, field
from typing import Iterable, Sequence, TextIO

import numpy as np

from .errors import GraphFormatError, InfeasibleGraphError, InvalidGraphError
from .semiring import LOG, Semiring
from .sparse import SparseMatrix, SparseVector, block_diagonal, vstack


@dataclass(frozen=True, eq=False)
class WeightedGraph:
    K: int
    T: SparseMatrix
    pi: SparseVector
    omega: SparseVector
    _views: dict = field(default_factory=dict, init=False, repr=False, compare=False)

    def __post_init__(self):
        if self.K < 1:
            raise InvalidGraphError("graph needs at least one state")
        if self.T.shape != (self.K, self.K):
            raise InvalidGraphError(f"transition matrix is {self.T.shape}, expected {(self.K, self.K)}")
        if self.pi.dim != self.K or self.omega.dim != self.K:
            raise InvalidGraphError("initial/final vectors must have dimension K")
        if not (self.pi.values != LOG.zero).any():
            raise InvalidGraphError("graph has no initial state")
        if not (self.omega.values != LOG.zero).any():
            raise InvalidGraphError("graph has no final state")

    @classmethod
    def build(
        cls,
        K: int,
        arcs: Iterable[tuple[int, int, float]],
        initial: Iterable[tuple[int, float]],
        final: Iterable[tuple[int, float]],
    ) -> WeightedGraph:
        return cls(
            K,
            SparseMatrix.from_triplets(K, K, arcs),
            SparseVector.from_pairs(K, initial),
            SparseVector.from_pairs(K, final),
        )

    @property
    def num_arcs(self) -> int:
        return self.T.nnz

    def view(self, semiring: Semiring = LOG, dtype=np.float64):
        """(T, pi, omega) with values expressed in ``semiring``; pi/omega dense. Cached."""
        key = (semiring.name, np.dtype(dtype).str)
        if key not in self._views:
            T = self.T.map_semiring(semiring).astype(dtype)
            pi = self.pi.map_semiring(semiring).to_dense(dtype)
            omega = self.omega.map_semiring(semiring).to_dense(dtype)
            self._views[key] = (T, pi, omega)
        return self._views[key]

    def __eq__(self, other) -> bool:
        if not isinstance(other, WeightedGraph):
            return NotImplemented
        return self.K == other.K and self.T == other.T and self.pi == other.pi and self.omega == other.omega

    def __repr__(self) -> str:
        return f"WeightedGraph(K={self.K}, arcs={self.num_arcs})"


# -- text format -------------------------------------------------------------


def _parse_weight(tok: str, lineno: int) -> float:
    try:
        w = float(tok)
    except ValueError:
        raise GraphFormatError(f"bad weight {tok!r}", lineno) from None
    if math.isnan(w) or w == math.inf:
        raise GraphFormatError(f"weight {tok!r} is not a log-probability", lineno)
    return w


def _parse_state(tok: str, lineno: int) -> int:
    try:
        s = int(tok)
    except ValueError:
        raise GraphFormatError(f"bad state index {tok!r}", lineno) from None
    if s < 0:
        raise GraphFormatError(f"negative state index {s}", lineno)
    return s


_ARITY = {"K": 1, "I": 2, "F": 2, "A": 3}


def load_graph(source: TextIO | str) -> WeightedGraph:
    """Parse the text format from a stream or a string."""
    if isinstance(source, str):
        source = io.StringIO(source)
    K = None
    k_line = None
    initial, final, arcs = [], [], []
    # (state, line) pairs for range checks once K is known
    refs: list[tuple[int, int]] = []
    for lineno, raw in enumerate(source, start=1):
        line = raw.split("#", 1)[0].split()
        if not line:
            continue
        tag, args = line[0], line[1:]
        if tag not in _ARITY:
            raise GraphFormatError(f"unknown record type {tag!r}", lineno)
        if len(args) != _ARITY[tag]:
            raise GraphFormatError(f"{tag} record takes {_ARITY[tag]} fields, got {len(args)}", lineno)
        if tag == "K":
            if K is not None:
                raise GraphFormatError(f"duplicate K record (first on line {k_line})", lineno)
            K = _parse_state(args[0], lineno)
            if K == 0:
                raise GraphFormatError("graph must have at least one state", lineno)
            k_line = lineno
        elif tag == "A":
            s, d = _parse_state(args[0], lineno), _parse_state(args[1], lineno)
            arcs.append((s, d, _parse_weight(args[2], lineno)))
            refs += [(s, lineno), (d, lineno)]
        else:
            s = _parse_state(args[0], lineno)
            (initial if tag == "I" else final).append((s, _parse_weight(args[1], lineno)))
            refs.append((s, lineno))
    if K is None:
        raise GraphFormatError("missing K record")
    for s, lineno in refs:
        if s >= K:
            raise GraphFormatError(f"state {s} out of range for K={K}", lineno)
    if not any(w != LOG.zero for _, w in initial):
        raise GraphFormatError("graph has no initial state")
    if not any(w != LOG.zero for _, w in final):
        raise GraphFormatError("graph has no final state")
    return WeightedGraph.build(K, arcs, initial, final)


def save_graph(g: WeightedGraph) -> str:
    """Canonical text: K, initials, finals, then arcs sorted by (src, dst)."""
    out = [f"K {g.K}"]
    out += [f"I {i} {w!r}" for i, w in g.pi.items()]
    out += [f"F {i} {w!r}" for i, w in g.omega.items()]
    out += [f"A {s} {d} {w!r}" for s, d, w in g.T.triplets()]
    return "\n".join(out) + "\n"


def read_graph_file(path) -> WeightedGraph:
    with open(path, encoding="utf-8") as fh:
        return load_graph(fh)


def write_graph_file(g: WeightedGraph, path) -> None:
    with open(path, "w", encoding="utf-8") as fh:
        fh.write(save_graph(g))


# -- batching ----------------------------------------------------------------


@dataclass(frozen=True, eq=False)
class BatchGraph:
    """Block-diagonal composition of ``members`` graphs.

    ``lengths`` holds per-member frame counts, or None when the frame counts
    are left to the likelihoods supplied at inference time.
    """

    composed: WeightedGraph
    offsets: tuple[int, ...]
    graphs: tuple[WeightedGraph, ...]
    lengths: tuple[int, ...] | None = None
    _cache: dict = field(default_factory=dict, init=False, repr=False, compare=False)

    @property
    def members(self) -> int:
        return len(self.graphs)

    def state_range(self, i: int) -> slice:
        return slice(self.offsets[i], self.offsets[i] + self.graphs[i].K)

    def member(self, i: int) -> WeightedGraph:
        """Slice member ``i`` back out of the composed graph."""
        lo, K = self.offsets[i], self.graphs[i].K
        r, c, w = self.composed.T.coo()
        keep = (r >= lo) & (r < lo + K)
        T = SparseMatrix.from_arrays(K, K, r[keep] - lo, c[keep] - lo, w[keep])
        return WeightedGraph(K, T, _slice_vector(self.composed.pi, lo, K), _slice_vector(self.composed.omega, lo, K))


def _slice_vector(v: SparseVector, lo: int, K: int) -> SparseVector:
    keep = (v.indices >= lo) & (v.indices < lo + K)
    return SparseVector(K, v.indices[keep] - lo, v.values[keep], v.semiring)


def compose_batch(graphs: Sequence[WeightedGraph], lengths: Sequence[int] | None = None) -> BatchGraph:
    if not graphs:
        raise ValueError("compose_batch needs at least one graph")
    if lengths is not None:
        if len(lengths) != len(graphs):
            raise ValueError(f"{len(graphs)} graphs but {len(lengths)} lengths")
        if any(n < 1 for n in lengths):
            raise ValueError("sequence lengths must be positive")
        lengths = tuple(int(n) for n in lengths)
    offsets = tuple(int(x) for x in np.cumsum([0] + [g.K for g in graphs[:-1]]))
    if len(graphs) == 1:
        composed = graphs[0]
    else:
        composed = WeightedGraph(
            sum(g.K for g in graphs),
            block_diagonal([g.T for g in graphs]),
            vstack([g.pi for g in graphs]),
            vstack([g.omega for g in graphs]),
        )
    return BatchGraph(composed, offsets, tuple(graphs), lengths)


def replicate(g: WeightedGraph, count: int, length: int | None = None) -> BatchGraph:
    """``count`` copies of ``g`` composed into one batch."""
    if count < 1:
        raise ValueError("replicate count must be >= 1")
    return compose_batch([g] * count, None if length is None else [length] * count)


def add_phony_final(g: WeightedGraph) -> WeightedGraph:
    """Append a self-looping end state fed by every final state.

    Arcs s -> phony carry omega(s); the phony state is the only final state.
    With likelihoods 1̄ on the phony state (and 0̄ elsewhere) for frames past the
    end of the sequence, every accepting path keeps its weight.
    """
    K = g.K
    r, c, w = g.T.coo()
    fin = g.omega.canonicalize()
    r2 = np.concatenate([r, fin.indices, [K]])
    c2 = np.concatenate([c, np.full(fin.nnz, K), [K]])
    w2 = np.concatenate([w, fin.values, [LOG.one]])
    T = SparseMatrix.from_arrays(K + 1, K + 1, r2, c2, w2)
    pi = SparseVector(K + 1, g.pi.indices, g.pi.values)
    omega = SparseVector(K + 1, np.array([K]), np.array([LOG.one]))
    return WeightedGraph(K + 1, T, pi, omega)


# -- graph checks ------------------------------------------------------------


def _sweep(ptr: np.ndarray, idx: np.ndarray, seeds: np.ndarray, K: int) -> np.ndarray:
    seen = np.zeros(K, dtype=bool)
    seen[seeds] = True
    queue = deque(int(s) for s in seeds)
    while queue:
        s = queue.popleft()
        for t in idx[ptr[s]:ptr[s + 1]]:
            if not seen[t]:
                seen[t] = True
                queue.append(int(t))
    return seen


def dead_states(g: WeightedGraph) -> np.ndarray:
    """States not on any initial -> final path."""
    T = g.T.canonicalize()
    fwd = _sweep(T.row_ptr, T.row_cols, g.pi.canonicalize().indices, g.K)
    bwd = _sweep(T.col_ptr, T.col_rows, g.omega.canonicalize().indices, g.K)
    return np.flatnonzero(~(fwd & bwd))


def is_stochastic(g: WeightedGraph, tol: float = 1e-8) -> bool:
    """True when every state's outgoing arc weights ⊕-sum to 1̄ (log 1 = 0)."""
    for s in range(g.K):
        lo, hi = g.T.row_ptr[s], g.T.row_ptr[s + 1]
        if hi > lo and abs(LOG.sum(g.T.row_data[lo:hi])) > tol:
            return False
    return True


# -- synthetic graphs --------------------------------------------------------

_KIND_ALIASES = {
    "alignment": "alignment",
    "left-to-right-alignment": "alignment",
    "ngram": "ngram",
    "ergodic-ngram": "ngram",
}


def _normalized_log_weights(rng: np.random.Generator, src: np.ndarray, K: int) -> np.ndarray:
    raw = rng.random(src.size) + 1e-3
    totals = np.bincount(src, weights=raw, minlength=K)
    return np.log(raw / totals[src])


def _sample_pairs(rng, needed: int, existing: set, propose, enumerate_all, pool_size: int) -> list:
    """Draw ``needed`` distinct new (src, dst) pairs."""
    if needed <= 0:
        return []
    if needed * 2 >= pool_size:
        pool = [p for p in enumerate_all() if p not in existing]
        pick = rng.choice(len(pool), size=needed, replace=False)
        return [pool[i] for i in sorted(pick)]
    chosen: list = []
    taken = set(existing)
    while len(chosen) < needed:
        for p in propose(max(64, 2 * (needed - len(chosen)))):
            if p not in taken:
                taken.add(p)
                chosen.append(p)
                if len(chosen) == needed:
                    break
    return chosen


def random_graph(K: int, A: int, seed: int, kind: str = "alignment") -> WeightedGraph:
    """Deterministic synthetic graph with exactly ``A`` arcs and no dead states.

    ``alignment``: left-to-right chain 0 -> 1 -> ... -> K-1 plus self-loops and
    forward skips; starts in state 0, ends in state K-1.
    ``ngram``: strongly connected (a random Hamiltonian cycle plus random
    extra arcs); every state is initial (uniform) and final (1̄).
    Outgoing weights of each state are logs of normalized random positives.
    """
    try:
        kind = _KIND_ALIASES[kind]
    except KeyError:
        raise ValueError(f"unknown graph kind {kind!r}") from None
    if K < 1:
        raise InfeasibleGraphError("need at least one state")
    rng = np.random.default_rng(seed)

    if kind == "alignment":
        max_arcs = K * (K + 1) // 2
        if A < K or A > max_arcs:
            raise InfeasibleGraphError(f"alignment graph with K={K} needs {K} <= arcs <= {max_arcs}, got {A}")
        pairs = [(i, i + 1) for i in range(K - 1)]
        n_loops = min(K, A - len(pairs))
        loops = np.sort(rng.choice(K, size=n_loops, replace=False))
        pairs += [(int(i), int(i)) for i in loops]
        n_skip = A - len(pairs)
        if n_skip and K < 3:
            raise InfeasibleGraphError("no room for skip arcs")

        def propose(n):
            src = rng.integers(0, max(K - 2, 1), size=n)
            dst = src + 1 + rng.geometric(0.5, size=n)
            return [(int(s), int(d)) for s, d in zip(src, dst) if d < K]

        def all_skips():
            return [(i, j) for i in range(K) for j in range(i + 2, K)]

        pairs += _sample_pairs(rng, n_skip, set(pairs), propose, all_skips, (K - 1) * (K - 2) // 2)
        initial = [(0, LOG.one)]
        final = [(K - 1, LOG.one)]
    else:
        if A < K or A > K * K:
            raise InfeasibleGraphError(f"ngram graph with K={K} needs {K} <= arcs <= {K * K}, got {A}")
        perm = rng.permutation(K)
        pairs = [(int(perm[i]), int(perm[(i + 1) % K])) for i in range(K)]

        def propose(n):
            flat = rng.integers(0, K * K, size=n)
            return [(int(f // K), int(f % K)) for f in flat]

        def all_pairs():
            return [(i, j) for i in range(K) for j in range(K)]

        pairs += _sample_pairs(rng, A - K, set(pairs), propose, all_pairs, K * K - K)
        initial = [(i, -math.log(K)) for i in range(K)]
        final = [(i, LOG.one) for i in range(K)]

    arr = np.array(sorted(set(pairs)), dtype=np.int64).reshape(-1, 2)
    assert arr.shape[0] == A
    w = _normalized_log_weights(rng, arr[:, 0], K)
    T = SparseMatrix.from_arrays(K, K, arr[:, 0], arr[:, 1], w)
    return WeightedGraph(K, T, SparseVector.from_pairs(K, initial), SparseVector.from_pairs(K, final))
