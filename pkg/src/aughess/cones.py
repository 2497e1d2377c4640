"""Admissibility cones and continuous membership margins.

Margins are continuous functions m(r) with m > 0 exactly on the open cone and
m = 0 on its boundary, so admissibility safeguards and bisection searches can
work against a single scalar.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from math import comb
from typing import Tuple, Union

import numpy as np

from .errors import ArgumentError
from .symmat import as_batch


@dataclass(frozen=True)
class GammaK:
    """Matrices with S_1, ..., S_k all positive."""

    k: int


@dataclass(frozen=True)
class PkCone:
    """Matrices whose every k-fold eigenvalue sum is positive."""

    k: int


@dataclass(frozen=True)
class PositiveCone:
    """Positive definite matrices."""


@dataclass(frozen=True)
class Regularized:
    """Pullback cone {r | r + eps * trace(r) * I in base}."""

    base: "ConeId"
    eps: float

    def __post_init__(self):
        if self.eps < 0:
            raise ArgumentError("regularization eps must be >= 0")


@dataclass(frozen=True)
class ConjugatedGammaK:
    """Intersection cone {r | Q r Q^T in Gamma_k for every Q}."""

    k: int
    conjugators: Tuple[Tuple[Tuple[float, ...], ...], ...] = field(repr=False)

    @staticmethod
    def from_matrices(k, mats) -> "ConjugatedGammaK":
        frozen = tuple(tuple(map(tuple, np.asarray(q, dtype=float))) for q in mats)
        return ConjugatedGammaK(k, frozen)

    def matrices(self):
        return [np.asarray(q, dtype=float) for q in self.conjugators]


ConeId = Union[GammaK, PkCone, PositiveCone, Regularized, ConjugatedGammaK]


def elementary_symmetric_values(lam: np.ndarray) -> np.ndarray:
    """All e_0..e_n of eigenvalue rows, by direct expansion.

    lam has shape (N, n); the result has shape (N, n + 1) with e_0 = 1.
    """
    lam = np.asarray(lam, dtype=float)
    n = lam.shape[-1]
    e = np.zeros(lam.shape[:-1] + (n + 1,))
    e[..., 0] = 1.0
    for i in range(n):
        x = lam[..., i]
        for k in range(min(i + 1, n), 0, -1):
            e[..., k] += x * e[..., k - 1]
    return e


def _ksum_min(lam_sorted: np.ndarray, k: int) -> np.ndarray:
    """Minimum k-fold eigenvalue sum = sum of the k smallest eigenvalues."""
    return lam_sorted[..., :k].sum(axis=-1)


def margin_batch(R, cone: ConeId) -> np.ndarray:
    """Continuous cone margins for a (N, n, n) batch of symmetric matrices."""
    R = as_batch(R)
    n = R.shape[-1]
    if isinstance(cone, Regularized):
        tr = np.trace(R, axis1=-2, axis2=-1)
        shifted = R + cone.eps * tr[:, None, None] * np.eye(n)
        return margin_batch(shifted, cone.base)
    if isinstance(cone, ConjugatedGammaK):
        margins = []
        for q in cone.matrices():
            if q.shape != (n, n):
                raise ArgumentError("conjugator dimension mismatch")
            margins.append(margin_batch(np.einsum("ab,nbc,dc->nad", q, R, q), GammaK(cone.k)))
        return np.min(margins, axis=0)

    lam = np.linalg.eigvalsh(R)
    if isinstance(cone, PositiveCone):
        return lam[..., 0]
    if isinstance(cone, GammaK):
        if not (1 <= cone.k <= n):
            raise ArgumentError(f"GammaK({cone.k}) invalid for n={n}")
        e = elementary_symmetric_values(lam)
        normalized = np.stack(
            [e[..., j] / comb(n, j) for j in range(1, cone.k + 1)], axis=-1
        )
        return normalized.min(axis=-1)
    if isinstance(cone, PkCone):
        if not (1 <= cone.k <= n):
            raise ArgumentError(f"PkCone({cone.k}) invalid for n={n}")
        return _ksum_min(lam, cone.k)
    raise ArgumentError(f"unknown cone {cone!r}")


def cone_margin(r, cone: ConeId) -> float:
    """Scalar margin; > 0 iff r lies in the interior of the cone."""
    return float(margin_batch(r, cone)[0])


def cone_dimension_ok(cone: ConeId, n: int) -> bool:
    if isinstance(cone, GammaK):
        return 1 <= cone.k <= n
    if isinstance(cone, PkCone):
        return 1 <= cone.k <= n
    if isinstance(cone, PositiveCone):
        return True
    if isinstance(cone, Regularized):
        return cone_dimension_ok(cone.base, n)
    if isinstance(cone, ConjugatedGammaK):
        return 1 <= cone.k <= n and all(q.shape == (n, n) for q in cone.matrices())
    return False


def random_orthogonal(rng: np.random.Generator, n: int, size: int) -> np.ndarray:
    """Batch of Haar-ish orthogonal matrices via QR of Gaussians."""
    g = rng.standard_normal((size, n, n))
    q, r = np.linalg.qr(g)
    # fix signs so the distribution does not favor a hemisphere
    d = np.sign(np.einsum("nii->ni", r))
    d[d == 0] = 1.0
    return q * d[:, None, :]


class ConeSampler:
    """Rejection sampler for matrices strictly inside a cone.

    Eigenvalues are drawn from a box, conjugated by random orthogonal matrices,
    and rejected unless the cone margin clears ``margin_floor``.
    """

    def __init__(self, cone: ConeId, n: int, rng: np.random.Generator,
                 eig_box=(-1.0, 3.0), margin_floor=1e-6, max_tries=500):
        if not cone_dimension_ok(cone, n):
            raise ArgumentError(f"cone {cone!r} incompatible with n={n}")
        self.cone = cone
        self.n = n
        self.rng = rng
        self.eig_box = (float(eig_box[0]), float(eig_box[1]))
        self.margin_floor = float(margin_floor)
        self.max_tries = int(max_tries)

    def draw(self, count: int) -> np.ndarray:
        """Return a (count, n, n) batch of accepted samples."""
        out = []
        got = 0
        lo, hi = self.eig_box
        for _ in range(self.max_tries):
            m = max(count - got, 1) * 2
            lam = self.rng.uniform(lo, hi, size=(m, self.n))
            q = random_orthogonal(self.rng, self.n, m)
            r = np.einsum("nij,nj,nkj->nik", q, lam, q)
            r = 0.5 * (r + np.swapaxes(r, -1, -2))
            keep = margin_batch(r, self.cone) >= self.margin_floor
            if keep.any():
                out.append(r[keep])
                got += int(keep.sum())
            if got >= count:
                break
        else:
            raise ArgumentError(
                f"cone sampler failed to draw {count} samples from box {self.eig_box}"
            )
        return np.concatenate(out, axis=0)[:count]
