"""Semiring-valued sparse vectors and matrices.

The implicit value of an absent entry is the semiring zero (``-inf`` in the
log and tropical semirings, ``0`` in the probability semiring), never the
numeric 0. Matrices keep both compressed-row and compressed-column layouts so
the direct product ``M x`` and the transposed product ``M^T x`` each walk
contiguous memory.

Dense vectors are plain 1-D numpy arrays holding semiring values.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Iterable, Sequence

import numpy as np

from . import _kernels
from .errors import DimensionMismatchError
from .semiring import LOG, Semiring


@dataclass(frozen=True, eq=False)
class SparseVector:
    dim: int
    indices: np.ndarray
    values: np.ndarray
    semiring: Semiring = LOG

    def __post_init__(self):
        idx = np.asarray(self.indices, dtype=np.int64)
        vals = self.semiring.validate_array(np.asarray(self.values, dtype=np.float64))
        if self.dim < 1:
            raise ValueError("vector dimension must be positive")
        if idx.shape != vals.shape or idx.ndim != 1:
            raise ValueError("indices and values must be 1-D and equally long")
        if idx.size and (idx[0] < 0 or idx[-1] >= self.dim or (np.diff(idx) <= 0).any()):
            raise ValueError("indices must be strictly increasing and within [0, dim)")
        object.__setattr__(self, "indices", idx)
        object.__setattr__(self, "values", vals)

    @classmethod
    def from_pairs(cls, dim: int, pairs: Iterable[tuple[int, float]], semiring: Semiring = LOG) -> SparseVector:
        """Build from (index, weight) pairs; repeated indices combine with ⊕."""
        acc: dict[int, float] = {}
        for i, w in pairs:
            i = int(i)
            if not 0 <= i < dim:
                raise IndexError(f"index {i} out of range for dimension {dim}")
            w = semiring.validate(w)
            acc[i] = semiring.plus(acc[i], w) if i in acc else w
        keys = sorted(acc)
        return cls(dim, np.array(keys, dtype=np.int64), np.array([acc[k] for k in keys]), semiring)

    @classmethod
    def from_dense(cls, x: np.ndarray, semiring: Semiring = LOG) -> SparseVector:
        x = np.asarray(x, dtype=np.float64)
        idx = np.flatnonzero(x != semiring.zero)
        return cls(x.shape[0], idx, x[idx], semiring)

    @property
    def nnz(self) -> int:
        return int(self.indices.size)

    def __getitem__(self, i: int) -> float:
        pos = np.searchsorted(self.indices, i)
        if pos < self.indices.size and self.indices[pos] == i:
            return float(self.values[pos])
        return self.semiring.zero

    def to_dense(self, dtype=np.float64) -> np.ndarray:
        out = np.full(self.dim, self.semiring.zero, dtype=dtype)
        out[self.indices] = self.values
        return out

    def items(self) -> list[tuple[int, float]]:
        return [(int(i), float(v)) for i, v in zip(self.indices, self.values)]

    def canonicalize(self) -> SparseVector:
        keep = self.values != self.semiring.zero
        return SparseVector(self.dim, self.indices[keep], self.values[keep], self.semiring)

    def map_semiring(self, semiring: Semiring) -> SparseVector:
        """Re-express log-probability values in another semiring."""
        vals = semiring.from_log_array(self.semiring.to_log_array(self.values))
        return SparseVector(self.dim, self.indices, vals, semiring)

    def __eq__(self, other) -> bool:
        if not isinstance(other, SparseVector):
            return NotImplemented
        return (
            self.dim == other.dim
            and self.semiring is other.semiring
            and np.array_equal(self.indices, other.indices)
            and np.array_equal(self.values, other.values)
        )


def _compress(n_major: int, major: np.ndarray, minor: np.ndarray, data: np.ndarray):
    order = np.lexsort((minor, major))
    counts = np.bincount(major, minlength=n_major)
    indptr = np.zeros(n_major + 1, dtype=np.int64)
    np.cumsum(counts, out=indptr[1:])
    return indptr, np.ascontiguousarray(minor[order]), np.ascontiguousarray(data[order])


class SparseMatrix:
    """Immutable semiring-valued matrix with CSR and CSC views.

    Build with :meth:`from_triplets` or :func:`block_diagonal`. Stored entries
    may hold the zero element explicitly; :meth:`canonicalize` drops them.
    """

    __slots__ = ("shape", "semiring", "row_ptr", "row_cols", "row_data", "col_ptr", "col_rows", "col_data")

    def __init__(self, shape, semiring, row_ptr, row_cols, row_data, col_ptr, col_rows, col_data):
        self.shape = (int(shape[0]), int(shape[1]))
        self.semiring = semiring
        self.row_ptr = row_ptr
        self.row_cols = row_cols
        self.row_data = row_data
        self.col_ptr = col_ptr
        self.col_rows = col_rows
        self.col_data = col_data
        for arr in (row_ptr, row_cols, row_data, col_ptr, col_rows, col_data):
            arr.flags.writeable = False

    @classmethod
    def _from_coo(cls, rows: int, cols: int, r: np.ndarray, c: np.ndarray, w: np.ndarray, semiring: Semiring):
        row_ptr, row_cols, row_data = _compress(rows, r, c, w)
        col_ptr, col_rows, col_data = _compress(cols, c, r, w)
        return cls((rows, cols), semiring, row_ptr, row_cols, row_data, col_ptr, col_rows, col_data)

    @classmethod
    def from_triplets(
        cls,
        rows: int,
        cols: int,
        triplets: Iterable[tuple[int, int, float]],
        semiring: Semiring = LOG,
        dtype=np.float64,
    ) -> SparseMatrix:
        """Duplicate (row, col) entries are combined with ⊕ in input order."""
        if rows < 1 or cols < 1:
            raise ValueError("matrix dimensions must be positive")
        trip = list(triplets)
        if trip:
            r = np.fromiter((t[0] for t in trip), dtype=np.int64, count=len(trip))
            c = np.fromiter((t[1] for t in trip), dtype=np.int64, count=len(trip))
            w = semiring.validate_array(np.fromiter((float(t[2]) for t in trip), dtype=np.float64, count=len(trip)))
        else:
            r = c = np.zeros(0, dtype=np.int64)
            w = np.zeros(0)
        return cls.from_arrays(rows, cols, r, c, w, semiring, dtype)

    @classmethod
    def from_arrays(cls, rows, cols, r, c, w, semiring: Semiring = LOG, dtype=np.float64) -> SparseMatrix:
        r = np.asarray(r, dtype=np.int64)
        c = np.asarray(c, dtype=np.int64)
        w = semiring.validate_array(np.asarray(w, dtype=np.float64))
        if r.size and (r.min() < 0 or r.max() >= rows or c.min() < 0 or c.max() >= cols):
            bad = int(np.flatnonzero((r < 0) | (r >= rows) | (c < 0) | (c >= cols))[0])
            raise IndexError(f"entry ({r[bad]}, {c[bad]}) out of range for {rows}x{cols} matrix")
        key = r * cols + c
        if np.unique(key).size != key.size:
            r, c, w = _combine_duplicates(key, r, c, w, cols, semiring)
        return cls._from_coo(rows, cols, r, c, w.astype(dtype), semiring)

    @property
    def nnz(self) -> int:
        return int(self.row_cols.size)

    @property
    def dtype(self):
        return self.row_data.dtype

    def lookup(self, i: int, j: int) -> float:
        lo, hi = self.row_ptr[i], self.row_ptr[i + 1]
        pos = lo + np.searchsorted(self.row_cols[lo:hi], j)
        if pos < hi and self.row_cols[pos] == j:
            return float(self.row_data[pos])
        return self.semiring.zero

    def triplets(self) -> list[tuple[int, int, float]]:
        """Stored entries in row-major order."""
        rows = np.repeat(np.arange(self.shape[0]), np.diff(self.row_ptr))
        return [(int(i), int(j), float(w)) for i, j, w in zip(rows, self.row_cols, self.row_data)]

    def coo(self) -> tuple[np.ndarray, np.ndarray, np.ndarray]:
        rows = np.repeat(np.arange(self.shape[0], dtype=np.int64), np.diff(self.row_ptr))
        return rows, self.row_cols, self.row_data

    def to_dense(self) -> np.ndarray:
        out = np.full(self.shape, self.semiring.zero, dtype=self.dtype)
        r, c, w = self.coo()
        out[r, c] = w
        return out

    def canonicalize(self) -> SparseMatrix:
        r, c, w = self.coo()
        keep = w != self.semiring.zero
        return SparseMatrix._from_coo(*self.shape, r[keep], c[keep], w[keep], self.semiring)

    def transpose(self) -> SparseMatrix:
        return SparseMatrix(
            (self.shape[1], self.shape[0]), self.semiring,
            self.col_ptr, self.col_rows, self.col_data,
            self.row_ptr, self.row_cols, self.row_data,
        )

    def astype(self, dtype) -> SparseMatrix:
        if np.dtype(dtype) == self.dtype:
            return self
        return SparseMatrix(
            self.shape, self.semiring,
            self.row_ptr, self.row_cols, self.row_data.astype(dtype),
            self.col_ptr, self.col_rows, self.col_data.astype(dtype),
        )

    def map_semiring(self, semiring: Semiring) -> SparseMatrix:
        """Re-express the stored log-probabilities in another semiring (same structure)."""
        if semiring is self.semiring:
            return self
        conv = lambda d: semiring.from_log_array(self.semiring.to_log_array(d)).astype(self.dtype)  # noqa: E731
        return SparseMatrix(
            self.shape, semiring,
            self.row_ptr, self.row_cols, conv(self.row_data),
            self.col_ptr, self.col_rows, conv(self.col_data),
        )

    def matvec(self, x, out: np.ndarray | None = None) -> np.ndarray:
        """y_i = ⊕_j M_ij ⊗ x_j."""
        x = _dense(x, self.shape[1], self.dtype)
        if out is None:
            out = np.empty(self.shape[0], dtype=self.dtype)
        _kernels.SPMV[self.semiring.name](self.row_ptr, self.row_cols, self.row_data, x, out)
        return out

    def matvec_transposed(self, x, out: np.ndarray | None = None) -> np.ndarray:
        """y_j = ⊕_i M_ij ⊗ x_i."""
        x = _dense(x, self.shape[0], self.dtype)
        if out is None:
            out = np.empty(self.shape[1], dtype=self.dtype)
        _kernels.SPMV[self.semiring.name](self.col_ptr, self.col_rows, self.col_data, x, out)
        return out

    def __eq__(self, other) -> bool:
        if not isinstance(other, SparseMatrix):
            return NotImplemented
        return (
            self.shape == other.shape
            and self.semiring is other.semiring
            and np.array_equal(self.row_ptr, other.row_ptr)
            and np.array_equal(self.row_cols, other.row_cols)
            and np.array_equal(self.row_data, other.row_data)
        )

    def __repr__(self) -> str:
        return f"SparseMatrix(shape={self.shape}, nnz={self.nnz}, semiring={self.semiring.name})"


def _combine_duplicates(key, r, c, w, cols, semiring):
    order = np.argsort(key, kind="stable")
    merged: dict[int, float] = {}
    for p in order:
        k = int(key[p])
        merged[k] = semiring.plus(merged[k], float(w[p])) if k in merged else float(w[p])
    keys = np.fromiter(merged.keys(), dtype=np.int64, count=len(merged))
    vals = np.fromiter(merged.values(), dtype=np.float64, count=len(merged))
    return keys // cols, keys % cols, vals


def _dense(x, dim: int, dtype) -> np.ndarray:
    if isinstance(x, SparseVector):
        x = x.to_dense()
    x = np.ascontiguousarray(x, dtype=dtype)
    if x.ndim != 1 or x.shape[0] != dim:
        raise DimensionMismatchError(f"vector of length {x.shape[0] if x.ndim == 1 else x.shape} does not match dimension {dim}")
    return x


def hadamard(u, v, semiring: Semiring = LOG):
    """Element-wise ⊗. Two sparse operands give a sparse result; otherwise dense."""
    if isinstance(u, SparseVector) and isinstance(v, SparseVector):
        if u.dim != v.dim:
            raise DimensionMismatchError(f"hadamard of dims {u.dim} and {v.dim}")
        common, iu, iv = np.intersect1d(u.indices, v.indices, assume_unique=True, return_indices=True)
        return SparseVector(u.dim, common, semiring.times_array(u.values[iu], v.values[iv]), semiring)
    u = u.to_dense() if isinstance(u, SparseVector) else np.asarray(u)
    v = v.to_dense() if isinstance(v, SparseVector) else np.asarray(v)
    if u.shape != v.shape:
        raise DimensionMismatchError(f"hadamard of shapes {u.shape} and {v.shape}")
    return semiring.times_array(u, v)


def block_diagonal(blocks: Sequence[SparseMatrix]) -> SparseMatrix:
    """diag(B_1, ..., B_I), with block i offset by the sizes of the blocks before it."""
    if not blocks:
        raise ValueError("block_diagonal needs at least one block")
    semiring = blocks[0].semiring
    if any(b.semiring is not semiring for b in blocks):
        raise ValueError("all blocks must share a semiring")
    dtype = np.result_type(*[b.dtype for b in blocks])

    def stack(ptr_attr, idx_attr, data_attr, minor_axis):
        ptrs, idxs, datas = [np.zeros(1, dtype=np.int64)], [], []
        nnz_off = 0
        minor_off = 0
        for b in blocks:
            ptrs.append(getattr(b, ptr_attr)[1:] + nnz_off)
            idxs.append(getattr(b, idx_attr) + minor_off)
            datas.append(getattr(b, data_attr).astype(dtype, copy=False))
            nnz_off += b.nnz
            minor_off += b.shape[minor_axis]
        return np.concatenate(ptrs), np.concatenate(idxs), np.concatenate(datas)

    rows = sum(b.shape[0] for b in blocks)
    cols = sum(b.shape[1] for b in blocks)
    row_ptr, row_cols, row_data = stack("row_ptr", "row_cols", "row_data", 1)
    col_ptr, col_rows, col_data = stack("col_ptr", "col_rows", "col_data", 0)
    return SparseMatrix((rows, cols), semiring, row_ptr, row_cols, row_data, col_ptr, col_rows, col_data)


def vstack(vectors: Sequence):
    """Concatenate vectors; SparseVectors stay sparse, anything else becomes dense."""
    if not vectors:
        raise ValueError("vstack needs at least one vector")
    if all(isinstance(v, SparseVector) for v in vectors):
        semiring = vectors[0].semiring
        idx, vals, off = [], [], 0
        for v in vectors:
            idx.append(v.indices + off)
            vals.append(v.values)
            off += v.dim
        return SparseVector(off, np.concatenate(idx), np.concatenate(vals), semiring)
    return np.concatenate([v.to_dense() if isinstance(v, SparseVector) else np.asarray(v) for v in vectors])


def fold(values: np.ndarray, semiring: Semiring = LOG) -> float:
    """⊕ over a dense vector in ascending index order, with the kernels' arithmetic."""
    return float(_kernels.FOLD[semiring.name](np.ascontiguousarray(values)))
