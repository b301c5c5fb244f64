"""Exact (min, +) arithmetic on integer vectors and row-compressed matrices.

Values live in int64 arrays. ``INF`` is a sentinel far above any finite value
this package produces (at most n*m), so ``finite + finite`` never overflows
and ``INF + small`` is clamped back to ``INF``.
"""

from __future__ import annotations

import struct
from dataclasses import dataclass
from pathlib import Path
from typing import Sequence

import numpy as np

INF = np.int64(1 << 62)
# Largest finite magnitude accepted anywhere; keeps INF + value < 2**63.
FINITE_MAX = 1 << 40

CACHE_MAGIC = b"TROPMAT1"


def as_vector(values) -> np.ndarray:
    """Convert a sequence with ``math.inf``/``None``/``INF`` entries to an int64 vector."""
    if isinstance(values, np.ndarray) and values.dtype == np.int64:
        return values
    out = np.empty(len(values), dtype=np.int64)
    for i, v in enumerate(values):
        if v is None or v == float("inf") or v >= INF:
            out[i] = INF
        else:
            if v < 0 or v > FINITE_MAX or int(v) != v:
                raise ValueError(f"entry {i} is not a valid tropical value: {v!r}")
            out[i] = int(v)
    return out


def to_list(x: np.ndarray) -> list[float | int]:
    """Plain Python values, with ``math.inf`` for infinite entries."""
    return [float("inf") if v >= INF else int(v) for v in x]


@dataclass(frozen=True)
class TropicalMatrix:
    """Sparse matrix over (N u {inf}, min, +); absent entries are infinite."""

    nrows: int
    ncols: int
    indptr: np.ndarray
    indices: np.ndarray
    data: np.ndarray

    @property
    def nnz(self) -> int:
        return int(self.indptr[-1])

    @property
    def nbytes(self) -> int:
        return self.indptr.nbytes + self.indices.nbytes + self.data.nbytes

    @classmethod
    def from_triplets(cls, nrows: int, ncols: int, rows, cols, vals) -> TropicalMatrix:
        """Assemble from (row, col, value) triplets; repeated positions keep the minimum."""
        rows = np.asarray(rows, dtype=np.int64)
        cols = np.asarray(cols, dtype=np.int64)
        vals = np.asarray(vals, dtype=np.int64)
        if not (len(rows) == len(cols) == len(vals)):
            raise ValueError("triplet arrays differ in length")
        if len(rows) and (rows.min() < 0 or rows.max() >= nrows or cols.min() < 0 or cols.max() >= ncols):
            raise ValueError("triplet index out of range")
        if len(vals) and (vals.min() < 0 or vals.max() > FINITE_MAX):
            raise ValueError("stored values must be finite and nonnegative")
        order = np.lexsort((vals, cols, rows))
        rows, cols, vals = rows[order], cols[order], vals[order]
        if len(rows):
            first = np.ones(len(rows), dtype=bool)
            first[1:] = (rows[1:] != rows[:-1]) | (cols[1:] != cols[:-1])
            rows, cols, vals = rows[first], cols[first], vals[first]
        indptr = np.zeros(nrows + 1, dtype=np.int64)
        np.cumsum(np.bincount(rows, minlength=nrows), out=indptr[1:])
        return cls(nrows, ncols, indptr, _index_array(cols, ncols), _value_array(vals))

    @classmethod
    def from_dense(cls, rows: Sequence[Sequence]) -> TropicalMatrix:
        dense = np.array([as_vector(r) for r in rows], dtype=np.int64).reshape(len(rows), -1)
        r, c = np.nonzero(dense < INF)
        return cls.from_triplets(dense.shape[0], dense.shape[1], r, c, dense[r, c])

    @classmethod
    def identity(cls, size: int) -> TropicalMatrix:
        idx = np.arange(size)
        return cls.from_triplets(size, size, idx, idx, np.zeros(size, dtype=np.int64))

    def to_dense(self) -> np.ndarray:
        out = np.full((self.nrows, self.ncols), INF, dtype=np.int64)
        rows = np.repeat(np.arange(self.nrows), np.diff(self.indptr))
        out[rows, self.indices] = self.data
        return out

    def row(self, i: int) -> tuple[np.ndarray, np.ndarray]:
        lo, hi = self.indptr[i], self.indptr[i + 1]
        return self.indices[lo:hi], self.data[lo:hi]

    def get(self, i: int, j: int) -> int | float:
        cols, vals = self.row(i)
        k = np.searchsorted(cols, j)
        if k < len(cols) and cols[k] == j:
            return int(vals[k])
        return float("inf")

    def validate(self) -> None:
        if len(self.indptr) != self.nrows + 1 or self.indptr[0] != 0:
            raise ValueError("offset array has the wrong shape")
        if np.any(np.diff(self.indptr) < 0):
            raise ValueError("offsets must be nondecreasing")
        if len(self.indices) != self.nnz or len(self.data) != self.nnz:
            raise ValueError("index/value arrays do not match the offsets")
        if self.nnz:
            if self.indices.min() < 0 or self.indices.max() >= self.ncols:
                raise ValueError("column index out of range")
            step = np.diff(self.indices.astype(np.int64))
            row_start = np.zeros(self.nnz, dtype=bool)
            row_start[self.indptr[:-1][np.diff(self.indptr) > 0]] = True
            if np.any((step <= 0) & ~row_start[1:]):
                raise ValueError("column indices must strictly increase within a row")
            if self.data.min() < 0:
                raise ValueError("stored values must be finite and nonnegative")


def _index_array(cols: np.ndarray, ncols: int) -> np.ndarray:
    return cols.astype(np.int32 if ncols < 2**31 else np.int64)


def _value_array(vals: np.ndarray) -> np.ndarray:
    if len(vals) == 0 or vals.max() < 2**7:
        return vals.astype(np.int8)
    return vals.astype(np.int64)


def matvec(A: TropicalMatrix, x) -> np.ndarray:
    """y[i] = min_k (A[i, k] + x[k]); an empty row gives INF."""
    x = as_vector(x)
    if len(x) != A.ncols:
        raise ValueError(f"matrix has {A.ncols} columns but vector has length {len(x)}")
    y = np.full(A.nrows, INF, dtype=np.int64)
    if A.nnz == 0:
        return y
    terms = x[A.indices] + A.data
    np.minimum(terms, INF, out=terms)
    starts = A.indptr[:-1]
    nonempty = starts < A.indptr[1:]
    y[nonempty] = np.minimum.reduceat(terms, starts[nonempty])
    return y


def scalar_shift(b: int, x) -> np.ndarray:
    if b < 0:
        raise ValueError(f"shift must be nonnegative, got {b}")
    x = as_vector(x)
    return np.where(x >= INF, INF, x + np.int64(b))


def shifted_equal(x, y) -> int | None:
    """Return b >= 0 with y == b (x) x, or None if no such b exists.

    Both vectors must be infinite at exactly the same positions.
    """
    x, y = as_vector(x), as_vector(y)
    if len(x) != len(y):
        raise ValueError(f"vector lengths differ: {len(x)} != {len(y)}")
    fx, fy = x < INF, y < INF
    if not np.array_equal(fx, fy):
        return None
    if not fx.any():
        return 0
    diff = y[fx] - x[fx]
    b = int(diff[0])
    if b < 0 or np.any(diff != b):
        return None
    return b


def save_matrix(path: str | Path, A: TropicalMatrix, n: int) -> None:
    """Write the TROPMAT1 cache file: header, offsets, column indices, values."""
    if A.nrows != A.ncols:
        raise ValueError("only square matrices can be cached")
    with open(path, "wb") as fh:
        fh.write(CACHE_MAGIC)
        fh.write(struct.pack("<3Q", n, A.nrows, A.nnz))
        fh.write(A.indptr.astype("<u8").tobytes())
        fh.write(A.indices.astype("<u8").tobytes())
        fh.write(A.data.astype("<u8").tobytes())


def load_matrix(path: str | Path, n: int | None = None, size: int | None = None) -> TropicalMatrix:
    """Read a TROPMAT1 cache file, checking the header against `n` and `size`."""
    raw = Path(path).read_bytes()
    if raw[:8] != CACHE_MAGIC:
        raise ValueError(f"{path}: bad magic {raw[:8]!r}")
    if len(raw) < 32:
        raise ValueError(f"{path}: truncated header")
    file_n, s, nnz = struct.unpack_from("<3Q", raw, 8)
    if n is not None and file_n != n:
        raise ValueError(f"{path}: cached for n={file_n}, expected n={n}")
    if size is not None and s != size:
        raise ValueError(f"{path}: cached size {s}, expected {size}")
    expected = 32 + 8 * ((s + 1) + 2 * nnz)
    if len(raw) != expected:
        raise ValueError(f"{path}: expected {expected} bytes, found {len(raw)}")
    body = np.frombuffer(raw, dtype="<u8", offset=32).astype(np.int64)
    indptr = body[: s + 1]
    indices = body[s + 1 : s + 1 + nnz]
    data = body[s + 1 + nnz :]
    A = TropicalMatrix(s, s, indptr.copy(), _index_array(indices, s), _value_array(data))
    if A.nnz != nnz:
        raise ValueError(f"{path}: offsets disagree with nnz={nnz}")
    A.validate()
    return A
