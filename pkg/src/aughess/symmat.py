"""Dense symmetric matrices with packed storage and cached eigensystems.

Storage is the row-major upper triangle, so a ``SymMat`` always represents an
exactly symmetric matrix; there are no separate upper/lower copies to drift
apart. Dimensions 2 <= n <= 8 are supported.
"""

from __future__ import annotations

import numpy as np

from .errors import ArgumentError

MIN_DIM = 2
MAX_DIM = 8

_SYM_TOL = 1e-8


def _pack_indices(n: int):
    return np.triu_indices(n)


class SymMat:
    """Immutable n x n symmetric matrix.

    Parameters
    ----------
    entries : array_like
        n(n+1)/2 coefficients in row-major upper-triangle order.
    n : int
        Matrix dimension.
    """

    __slots__ = ("n", "entries", "_eig")

    def __init__(self, entries, n):
        if not (MIN_DIM <= n <= MAX_DIM):
            raise ArgumentError(f"dimension {n} outside supported range [{MIN_DIM}, {MAX_DIM}]")
        entries = np.asarray(entries, dtype=float).reshape(-1).copy()
        if entries.size != n * (n + 1) // 2:
            raise ArgumentError(
                f"expected {n * (n + 1) // 2} packed entries for n={n}, got {entries.size}"
            )
        entries.setflags(write=False)
        object.__setattr__(self, "n", n)
        object.__setattr__(self, "entries", entries)
        object.__setattr__(self, "_eig", None)

    def __setattr__(self, key, value):
        raise AttributeError("SymMat is immutable")

    # -- constructors ------------------------------------------------------

    @classmethod
    def from_matrix(cls, a) -> "SymMat":
        a = np.asarray(a, dtype=float)
        if a.ndim != 2 or a.shape[0] != a.shape[1]:
            raise ArgumentError(f"expected a square matrix, got shape {a.shape}")
        n = a.shape[0]
        scale = 1.0 + np.abs(a).max(initial=0.0)
        if np.abs(a - a.T).max(initial=0.0) > _SYM_TOL * scale:
            raise ArgumentError("matrix is not symmetric within tolerance")
        sym = 0.5 * (a + a.T)
        i, j = _pack_indices(n)
        return cls(sym[i, j], n)

    @classmethod
    def diag(cls, values) -> "SymMat":
        values = np.asarray(values, dtype=float).reshape(-1)
        return cls.from_matrix(np.diag(values))

    @classmethod
    def identity(cls, n: int) -> "SymMat":
        return cls.from_matrix(np.eye(n))

    @classmethod
    def zero(cls, n: int) -> "SymMat":
        return cls.from_matrix(np.zeros((n, n)))

    # -- views -------------------------------------------------------------

    def matrix(self) -> np.ndarray:
        """Dense n x n array reconstructed from packed storage (exactly symmetric)."""
        n = self.n
        out = np.zeros((n, n))
        i, j = _pack_indices(n)
        out[i, j] = self.entries
        out[j, i] = self.entries
        return out

    def eig(self):
        """Eigenvalues in non-decreasing order and orthonormal eigenvectors (columns)."""
        if self._eig is None:
            w, v = np.linalg.eigh(self.matrix())
            w.setflags(write=False)
            v.setflags(write=False)
            object.__setattr__(self, "_eig", (w, v))
        return self._eig

    def eigenvalues(self) -> np.ndarray:
        return self.eig()[0]

    # -- algebra -----------------------------------------------------------

    def trace(self) -> float:
        n = self.n
        idx = np.cumsum(np.concatenate(([0], np.arange(n, 1, -1))))
        return float(self.entries[idx].sum())

    def norm(self) -> float:
        """Frobenius norm."""
        return float(np.linalg.norm(self.matrix()))

    def add(self, other: "SymMat") -> "SymMat":
        if other.n != self.n:
            raise ArgumentError("dimension mismatch")
        return SymMat(self.entries + other.entries, self.n)

    def scale(self, t: float) -> "SymMat":
        return SymMat(self.entries * float(t), self.n)

    def shift_identity(self, t: float) -> "SymMat":
        """self + t * I."""
        return SymMat.from_matrix(self.matrix() + float(t) * np.eye(self.n))

    def __repr__(self):
        return f"SymMat(n={self.n}, entries={np.array2string(self.entries, precision=6)})"


def as_symmat(r, n=None) -> SymMat:
    """Coerce a SymMat or a dense array into a SymMat."""
    if isinstance(r, SymMat):
        if n is not None and r.n != n:
            raise ArgumentError(f"expected dimension {n}, got {r.n}")
        return r
    m = SymMat.from_matrix(r)
    if n is not None and m.n != n:
        raise ArgumentError(f"expected dimension {n}, got {m.n}")
    return m


def as_batch(r) -> np.ndarray:
    """Coerce SymMat / (n,n) / (N,n,n) input into a (N,n,n) float array."""
    if isinstance(r, SymMat):
        return r.matrix()[None, :, :]
    a = np.asarray(r, dtype=float)
    if a.ndim == 2:
        return a[None, :, :]
    if a.ndim == 3:
        return a
    raise ArgumentError(f"expected matrix batch, got ndim={a.ndim}")
