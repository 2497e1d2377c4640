"""Finite-difference grids on disks and squares.

Both layouts expose sparse first/second derivative operators in Cartesian
coordinates: second-order centered stencils at interior nodes, second-order
one-sided stencils at boundary nodes. The polar layout is cell-centered in r
(no node at the origin); the stencil column "across" the origin is the
antipodal grid node itself, so the closure is exact.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Tuple

import numpy as np
import scipy.sparse as sp

from .errors import ArgumentError


def _d1_matrix(m: int, h: float) -> sp.csr_matrix:
    """1D first derivative: centered interior, 3-point one-sided ends."""
    rows, cols, vals = [], [], []
    for i in range(1, m - 1):
        rows += [i, i]
        cols += [i - 1, i + 1]
        vals += [-0.5 / h, 0.5 / h]
    rows += [0, 0, 0]
    cols += [0, 1, 2]
    vals += [-1.5 / h, 2.0 / h, -0.5 / h]
    rows += [m - 1, m - 1, m - 1]
    cols += [m - 3, m - 2, m - 1]
    vals += [0.5 / h, -2.0 / h, 1.5 / h]
    return sp.csr_matrix((vals, (rows, cols)), shape=(m, m))


def _d2_matrix(m: int, h: float) -> sp.csr_matrix:
    """1D second derivative: centered interior, 4-point one-sided ends."""
    rows, cols, vals = [], [], []
    h2 = h * h
    for i in range(1, m - 1):
        rows += [i, i, i]
        cols += [i - 1, i, i + 1]
        vals += [1.0 / h2, -2.0 / h2, 1.0 / h2]
    rows += [0] * 4
    cols += [0, 1, 2, 3]
    vals += [2.0 / h2, -5.0 / h2, 4.0 / h2, -1.0 / h2]
    rows += [m - 1] * 4
    cols += [m - 4, m - 3, m - 2, m - 1]
    vals += [-1.0 / h2, 4.0 / h2, -5.0 / h2, 2.0 / h2]
    return sp.csr_matrix((vals, (rows, cols)), shape=(m, m))


def _periodic_d1(m: int, h: float) -> sp.csr_matrix:
    rows, cols, vals = [], [], []
    for i in range(m):
        rows += [i, i]
        cols += [(i - 1) % m, (i + 1) % m]
        vals += [-0.5 / h, 0.5 / h]
    return sp.csr_matrix((vals, (rows, cols)), shape=(m, m))


def _periodic_d2(m: int, h: float) -> sp.csr_matrix:
    rows, cols, vals = [], [], []
    h2 = h * h
    for i in range(m):
        rows += [i, i, i]
        cols += [(i - 1) % m, i, (i + 1) % m]
        vals += [1.0 / h2, -2.0 / h2, 1.0 / h2]
    return sp.csr_matrix((vals, (rows, cols)), shape=(m, m))


class Grid:
    """Shared surface: node coordinates, index sets, derivative operators."""

    nodes: np.ndarray            # (N, 2)
    interior_idx: np.ndarray
    boundary_idx: np.ndarray
    boundary_normals: np.ndarray  # unit inner normals at boundary nodes
    Dx: sp.csr_matrix
    Dy: sp.csr_matrix
    Dxx: sp.csr_matrix
    Dxy: sp.csr_matrix
    Dyy: sp.csr_matrix

    @property
    def node_count(self) -> int:
        return self.nodes.shape[0]

    def gradient(self, values: np.ndarray) -> np.ndarray:
        """(N, 2) discrete gradient at every node."""
        return np.stack([self.Dx @ values, self.Dy @ values], axis=-1)

    def hessian(self, values: np.ndarray) -> np.ndarray:
        """(N, 2, 2) discrete Hessian at every node."""
        xx = self.Dxx @ values
        xy = self.Dxy @ values
        yy = self.Dyy @ values
        out = np.empty((values.size, 2, 2))
        out[:, 0, 0] = xx
        out[:, 0, 1] = out[:, 1, 0] = xy
        out[:, 1, 1] = yy
        return out

    def field(self, func_or_values) -> "Field":
        if callable(func_or_values):
            vals = np.array([func_or_values(x) for x in self.nodes], dtype=float)
        else:
            vals = np.asarray(func_or_values, dtype=float).reshape(-1)
            if vals.size != self.node_count:
                raise ArgumentError(
                    f"field length {vals.size} does not match {self.node_count} nodes")
        return Field(self, vals)

    def spacing(self) -> float:
        raise NotImplementedError


@dataclass
class Field:
    """Grid function: one real value per node."""

    grid: Grid
    values: np.ndarray

    def __post_init__(self):
        self.values = np.asarray(self.values, dtype=float).reshape(-1)
        if self.values.size != self.grid.node_count:
            raise ArgumentError("field length does not match grid node count")

    def copy(self) -> "Field":
        return Field(self.grid, self.values.copy())

    def sup_norm(self) -> float:
        return float(np.abs(self.values).max())


class TensorSquare(Grid):
    """Uniform tensor grid on the centered square [-L/2, L/2]^2."""

    layout = "TensorSquare"

    def __init__(self, L: float, nx: int, ny: int):
        if nx < 4 or ny < 4:
            raise ArgumentError("need at least 4 nodes per direction")
        self.L = float(L)
        self.nx, self.ny = int(nx), int(ny)
        xs = np.linspace(-L / 2, L / 2, nx)
        ys = np.linspace(-L / 2, L / 2, ny)
        self.hx = xs[1] - xs[0]
        self.hy = ys[1] - ys[0]
        X, Y = np.meshgrid(xs, ys, indexing="ij")
        self.nodes = np.column_stack([X.ravel(), Y.ravel()])

        ix, iy = np.divmod(np.arange(nx * ny), ny)
        on_edge = (ix == 0) | (ix == nx - 1) | (iy == 0) | (iy == ny - 1)
        self.boundary_idx = np.nonzero(on_edge)[0]
        self.interior_idx = np.nonzero(~on_edge)[0]

        normals = np.zeros((len(self.boundary_idx), 2))
        for row, b in enumerate(self.boundary_idx):
            nvec = np.zeros(2)
            if ix[b] == 0:
                nvec[0] += 1.0
            if ix[b] == nx - 1:
                nvec[0] -= 1.0
            if iy[b] == 0:
                nvec[1] += 1.0
            if iy[b] == ny - 1:
                nvec[1] -= 1.0
            normals[row] = nvec / np.linalg.norm(nvec)
        self.boundary_normals = normals

        Ix = sp.identity(nx, format="csr")
        Iy = sp.identity(ny, format="csr")
        self.Dx = sp.kron(_d1_matrix(nx, self.hx), Iy, format="csr")
        self.Dy = sp.kron(Ix, _d1_matrix(ny, self.hy), format="csr")
        self.Dxx = sp.kron(_d2_matrix(nx, self.hx), Iy, format="csr")
        self.Dyy = sp.kron(Ix, _d2_matrix(ny, self.hy), format="csr")
        self.Dxy = (self.Dx @ self.Dy).tocsr()

    def spacing(self):
        return max(self.hx, self.hy)


class PolarDisk(Grid):
    """Cell-centered polar grid on the disk of radius R.

    Radial nodes sit at r_i = (i + 1/2) h with h = R / (n_r - 1/2), so the
    first ring avoids the origin and the last ring lies exactly on the
    boundary. Stencils at the first ring reach "across" the origin to the
    antipodal node (theta + pi), which is an exact identity, not an
    approximation. n_theta must be even for the antipodal map to land on the
    grid.
    """

    layout = "PolarDisk"

    def __init__(self, R: float, n_r: int, n_theta: int):
        if n_r < 4:
            raise ArgumentError("need at least 4 radial rings")
        if n_theta < 8 or n_theta % 2:
            raise ArgumentError("n_theta must be even and >= 8")
        self.R = float(R)
        self.n_r, self.n_theta = int(n_r), int(n_theta)
        self.h_r = R / (n_r - 0.5)
        self.h_t = 2 * np.pi / n_theta
        self.r = (np.arange(n_r) + 0.5) * self.h_r
        self.theta = np.arange(n_theta) * self.h_t

        rr = np.repeat(self.r, n_theta)
        tt = np.tile(self.theta, n_r)
        self.node_r, self.node_theta = rr, tt
        self.nodes = np.column_stack([rr * np.cos(tt), rr * np.sin(tt)])

        idx = np.arange(n_r * n_theta)
        self.boundary_idx = idx[-n_theta:]
        self.interior_idx = idx[:-n_theta]
        self.boundary_normals = -np.column_stack(
            [np.cos(self.theta), np.sin(self.theta)])

        Dr, Drr = self._radial_operators()
        It = sp.identity(n_theta, format="csr")
        Ir = sp.identity(n_r, format="csr")
        Dt = sp.kron(Ir, _periodic_d1(n_theta, self.h_t), format="csr")
        Dtt = sp.kron(Ir, _periodic_d2(n_theta, self.h_t), format="csr")
        Drt = (Dr @ Dt).tocsr()

        c, s = np.cos(tt), np.sin(tt)
        inv_r = 1.0 / rr

        def D(w):
            return sp.diags(w)

        self.Dx = (D(c) @ Dr - D(s * inv_r) @ Dt).tocsr()
        self.Dy = (D(s) @ Dr + D(c * inv_r) @ Dt).tocsr()
        self.Dxx = (D(c * c) @ Drr - D(2 * s * c * inv_r) @ Drt
                    + D(s * s * inv_r) @ Dr + D(2 * s * c * inv_r ** 2) @ Dt
                    + D(s * s * inv_r ** 2) @ Dtt).tocsr()
        self.Dyy = (D(s * s) @ Drr + D(2 * s * c * inv_r) @ Drt
                    + D(c * c * inv_r) @ Dr - D(2 * s * c * inv_r ** 2) @ Dt
                    + D(c * c * inv_r ** 2) @ Dtt).tocsr()
        self.Dxy = (D(s * c) @ Drr + D((c * c - s * s) * inv_r) @ Drt
                    - D(s * c * inv_r) @ Dr - D((c * c - s * s) * inv_r ** 2) @ Dt
                    - D(s * c * inv_r ** 2) @ Dtt).tocsr()

    def _node(self, i, j):
        return i * self.n_theta + (j % self.n_theta)

    def _radial_operators(self) -> Tuple[sp.csr_matrix, sp.csr_matrix]:
        n_r, n_t, h = self.n_r, self.n_theta, self.h_r
        half = n_t // 2
        rows, cols, vals = [], [], []
        rows2, cols2, vals2 = [], [], []
        for j in range(n_t):
            # first ring: the i-1 column is the antipodal node on the same ring
            node = self._node(0, j)
            ghost = self._node(0, j + half)
            rows += [node, node]
            cols += [ghost, self._node(1, j)]
            vals += [-0.5 / h, 0.5 / h]
            rows2 += [node, node, node]
            cols2 += [ghost, node, self._node(1, j)]
            vals2 += [1.0 / h ** 2, -2.0 / h ** 2, 1.0 / h ** 2]
            for i in range(1, n_r - 1):
                node = self._node(i, j)
                rows += [node, node]
                cols += [self._node(i - 1, j), self._node(i + 1, j)]
                vals += [-0.5 / h, 0.5 / h]
                rows2 += [node, node, node]
                cols2 += [self._node(i - 1, j), node, self._node(i + 1, j)]
                vals2 += [1.0 / h ** 2, -2.0 / h ** 2, 1.0 / h ** 2]
            node = self._node(n_r - 1, j)
            rows += [node, node, node]
            cols += [self._node(n_r - 3, j), self._node(n_r - 2, j), node]
            vals += [0.5 / h, -2.0 / h, 1.5 / h]
            rows2 += [node] * 4
            cols2 += [self._node(n_r - 4, j), self._node(n_r - 3, j),
                      self._node(n_r - 2, j), node]
            vals2 += [-1.0 / h ** 2, 4.0 / h ** 2, -5.0 / h ** 2, 2.0 / h ** 2]
        shape = (n_r * n_t, n_r * n_t)
        return (sp.csr_matrix((vals, (rows, cols)), shape=shape),
                sp.csr_matrix((vals2, (rows2, cols2)), shape=shape))

    def spacing(self):
        return self.h_r
