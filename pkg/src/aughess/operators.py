"""Operator catalog: k-Hessians, quotients, eigenvalue-sum families, and
their cones, values and derivative matrices.

All families are evaluated through a batched ndarray path (shape (N, n, n));
the SymMat API wraps a batch of one. Gradients of the S_k-based families use
the Newton-transform polynomial form T_{k-1}(r), which stays smooth at
repeated eigenvalues; eigenvalue-sum families use the spectral formula
sum_s f_s phi_s otimes phi_s.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from itertools import combinations
from math import comb
from typing import Optional, Tuple

import numpy as np

from .cones import (ConeId, ConjugatedGammaK, GammaK, PkCone, PositiveCone,
                    Regularized, cone_margin, elementary_symmetric_values,
                    margin_batch)
from .errors import AdmissibilityError, ArgumentError, NonsmoothPointError
from .symmat import MAX_DIM, MIN_DIM, SymMat, as_batch, as_symmat

NEG_INF = float("-inf")

# tie tolerance for "active branch uniquely attained" (Mk, FkV)
TIE_TOL = 1e-9


@dataclass(frozen=True)
class OperatorSpec:
    """A catalogued operator F with its cone and structural flags.

    Build instances through the factory functions (``fk``, ``fkl``, ...),
    which assign the cone, the range lower bound a0 and the flags each family
    carries.
    """

    family: str
    n: int
    k: int = 0
    l: int = 0
    alpha: float = 0.0
    conjugators: Tuple = field(default=(), repr=False)
    base: Optional["OperatorSpec"] = None
    eps: float = 0.0
    cone: ConeId = None
    a0: float = 0.0
    homogeneous_degree_one: bool = False
    orthogonally_invariant: bool = True

    def label(self) -> str:
        if self.family == "Fk":
            return f"F_{self.k} (n={self.n})"
        if self.family == "Fkl":
            return f"F_{{{self.k},{self.l}}} (n={self.n})"
        if self.family == "LogDet":
            return f"log det (n={self.n})"
        if self.family == "LogPk":
            return f"log P_{self.k} (n={self.n})"
        if self.family == "TildeFk":
            return f"tilde F_{self.k} (n={self.n})"
        if self.family == "FkNegAlpha":
            return f"F_{{{self.k},-{self.alpha:g}}} (n={self.n})"
        if self.family == "Mk":
            return f"m_{self.k} (n={self.n})"
        if self.family == "FkV":
            return f"F_{{{self.k},V}} (n={self.n}, |V|={len(self.conjugators)})"
        if self.family == "Regularized":
            return f"[{self.base.label()}]^eps={self.eps:g}"
        return self.family


def _check_dim(n):
    if not (MIN_DIM <= n <= MAX_DIM):
        raise ArgumentError(f"dimension {n} outside supported range [{MIN_DIM}, {MAX_DIM}]")


def _check_k(k, n):
    if not (1 <= k <= n):
        raise ArgumentError(f"k={k} out of range for n={n}")


def fk(k: int, n: int) -> OperatorSpec:
    """k-Hessian operator F_k = S_k^{1/k} on Gamma_k."""
    _check_dim(n)
    _check_k(k, n)
    return OperatorSpec("Fk", n, k=k, cone=GammaK(k), a0=0.0,
                        homogeneous_degree_one=True)


def fkl(k: int, l: int, n: int) -> OperatorSpec:
    """Hessian quotient F_{k,l} = (S_k/S_l)^{1/(k-l)} on Gamma_k, 0 <= l < k."""
    _check_dim(n)
    _check_k(k, n)
    if not (0 <= l < k):
        raise ArgumentError(f"need 0 <= l < k, got l={l}, k={k}")
    return OperatorSpec("Fkl", n, k=k, l=l, cone=GammaK(k), a0=0.0,
                        homogeneous_degree_one=True)


def log_det(n: int) -> OperatorSpec:
    """log det on the positive cone; range is all of R (a0 = -inf)."""
    _check_dim(n)
    return OperatorSpec("LogDet", n, cone=PositiveCone(), a0=NEG_INF)


def log_pk(k: int, n: int) -> OperatorSpec:
    """Sum of logs of k-fold eigenvalue sums, on P_k; a0 = -inf."""
    _check_dim(n)
    _check_k(k, n)
    return OperatorSpec("LogPk", n, k=k, cone=PkCone(k), a0=NEG_INF)


def tilde_fk(k: int, n: int) -> OperatorSpec:
    """Normalized product P_k^{1/C(n,k)}, degree-one homogeneous on P_k."""
    _check_dim(n)
    _check_k(k, n)
    return OperatorSpec("TildeFk", n, k=k, cone=PkCone(k), a0=0.0,
                        homogeneous_degree_one=True)


def fk_neg_alpha(k: int, alpha: float, n: int) -> OperatorSpec:
    """Negative-power mean of k-fold eigenvalue sums, on P_k."""
    _check_dim(n)
    _check_k(k, n)
    if alpha <= 0:
        raise ArgumentError("alpha must be positive")
    return OperatorSpec("FkNegAlpha", n, k=k, alpha=float(alpha), cone=PkCone(k),
                        a0=0.0, homogeneous_degree_one=True)


def mk(k: int, n: int) -> OperatorSpec:
    """Degenerate minimum k-fold eigenvalue sum, on P_k."""
    _check_dim(n)
    _check_k(k, n)
    return OperatorSpec("Mk", n, k=k, cone=PkCone(k), a0=0.0,
                        homogeneous_degree_one=True)


def fkv(k: int, conjugators, n: int) -> OperatorSpec:
    """min over Q in V of F_k(Q r Q^T), on the intersection of pulled-back cones."""
    _check_dim(n)
    _check_k(k, n)
    mats = [np.asarray(q, dtype=float) for q in conjugators]
    if not mats:
        raise ArgumentError("FkV needs at least one conjugator")
    for q in mats:
        if q.shape != (n, n):
            raise ArgumentError(f"conjugator shape {q.shape} incompatible with n={n}")
        if abs(np.linalg.det(q)) < 1e-12:
            raise ArgumentError("conjugators must be invertible")
    nontrivial = len(mats) > 1 or not np.allclose(
        mats[0] @ mats[0].T, np.eye(n), atol=1e-12)
    frozen = tuple(tuple(map(tuple, q)) for q in mats)
    return OperatorSpec("FkV", n, k=k, conjugators=frozen,
                        cone=ConjugatedGammaK(k, frozen), a0=0.0,
                        homogeneous_degree_one=True,
                        orthogonally_invariant=not nontrivial)


def regularized(base: OperatorSpec, eps: float) -> OperatorSpec:
    """Elliptic regularization F^eps(r) = F(r + eps * trace(r) * I)."""
    if eps <= 0:
        raise ArgumentError("regularization eps must be positive")
    return OperatorSpec("Regularized", base.n, base=base, eps=float(eps),
                        cone=Regularized(base.cone, eps), a0=base.a0,
                        homogeneous_degree_one=base.homogeneous_degree_one,
                        orthogonally_invariant=base.orthogonally_invariant)


# ----------------------------------------------------------------------------
# elementary symmetric functions and Newton transforms


def elementary_symmetric(r, k: int) -> float:
    """S_k of the eigenvalues of r."""
    m = as_symmat(r)
    if not (1 <= k <= m.n):
        raise ArgumentError(f"k={k} out of range for n={m.n}")
    e = elementary_symmetric_values(m.eigenvalues()[None, :])
    return float(e[0, k])


def _sk_batch(R: np.ndarray, k: int) -> np.ndarray:
    lam = np.linalg.eigvalsh(R)
    return elementary_symmetric_values(lam)[..., k]


def _newton_transform(R: np.ndarray, k: int) -> np.ndarray:
    """T_k(r) with T_0 = I, T_j = S_j I - T_{j-1} r; dS_{k+1}/dr = T_k."""
    n = R.shape[-1]
    eye = np.broadcast_to(np.eye(n), R.shape)
    t = eye.copy()
    if k == 0:
        return t
    s = elementary_symmetric_values(np.linalg.eigvalsh(R))
    for j in range(1, k + 1):
        t = s[..., j, None, None] * eye - t @ R
    return 0.5 * (t + np.swapaxes(t, -1, -2))


def _subsets(n: int, k: int):
    return list(combinations(range(n), k))


def _subset_sums(lam: np.ndarray, k: int) -> np.ndarray:
    """(N, C(n,k)) array of k-fold eigenvalue sums."""
    n = lam.shape[-1]
    subs = _subsets(n, k)
    return np.stack([lam[..., list(s)].sum(axis=-1) for s in subs], axis=-1)


def _subset_membership(n: int, k: int) -> np.ndarray:
    """(C(n,k), n) 0/1 matrix: which eigenvalue enters which subset sum."""
    subs = _subsets(n, k)
    m = np.zeros((len(subs), n))
    for row, s in enumerate(subs):
        m[row, list(s)] = 1.0
    return m


def _spectral_recompose(V: np.ndarray, w: np.ndarray) -> np.ndarray:
    """sum_s w_s phi_s otimes phi_s for batched eigenvectors."""
    g = np.einsum("nis,ns,njs->nij", V, w, V)
    return 0.5 * (g + np.swapaxes(g, -1, -2))


# ----------------------------------------------------------------------------
# batched evaluation


def evaluate_batch(op: OperatorSpec, R) -> np.ndarray:
    """F(r) for a (N, n, n) batch. Assumes the batch is inside op.cone."""
    R = as_batch(R)
    n = op.n
    if R.shape[-1] != n:
        raise ArgumentError(f"operator dimension {n} vs matrix dimension {R.shape[-1]}")
    fam = op.family
    if fam == "Regularized":
        tr = np.trace(R, axis1=-2, axis2=-1)
        return evaluate_batch(op.base, R + op.eps * tr[:, None, None] * np.eye(n))
    if fam == "Fk":
        return _sk_batch(R, op.k) ** (1.0 / op.k)
    if fam == "Fkl":
        lam = np.linalg.eigvalsh(R)
        e = elementary_symmetric_values(lam)
        sl = e[..., op.l] if op.l > 0 else np.ones(R.shape[0])
        return (e[..., op.k] / sl) ** (1.0 / (op.k - op.l))
    if fam == "LogDet":
        lam = np.linalg.eigvalsh(R)
        return np.log(lam).sum(axis=-1)
    lam = np.linalg.eigvalsh(R)
    if fam == "LogPk":
        return np.log(_subset_sums(lam, op.k)).sum(axis=-1)
    if fam == "TildeFk":
        c = comb(n, op.k)
        return np.exp(np.log(_subset_sums(lam, op.k)).sum(axis=-1) / c)
    if fam == "FkNegAlpha":
        sums = _subset_sums(lam, op.k)
        m = sums.min(axis=-1, keepdims=True)
        # (sigma/m)^{-alpha} <= 1, so the sum is in [1, C(n,k)]: overflow-free
        s = ((sums / m) ** (-op.alpha)).sum(axis=-1)
        return m[..., 0] * s ** (-1.0 / op.alpha)
    if fam == "Mk":
        return lam[..., : op.k].sum(axis=-1)
    if fam == "FkV":
        vals = [
            evaluate_batch(fk(op.k, n), np.einsum("ab,nbc,dc->nad", q, R, q))
            for q in (np.asarray(m, dtype=float) for m in op.conjugators)
        ]
        return np.min(vals, axis=0)
    raise ArgumentError(f"unknown family {fam}")


def gradient_batch(op: OperatorSpec, R) -> np.ndarray:
    """F_r = {dF/dr_ij} for a (N, n, n) batch inside op.cone.

    Raises NonsmoothPointError if any element of the batch sits on a tied
    branch of Mk or FkV.
    """
    R = as_batch(R)
    n = op.n
    fam = op.family
    if fam == "Regularized":
        tr = np.trace(R, axis1=-2, axis2=-1)
        s = R + op.eps * tr[:, None, None] * np.eye(n)
        g = gradient_batch(op.base, s)
        t = np.trace(g, axis1=-2, axis2=-1)
        return g + op.eps * t[:, None, None] * np.eye(n)
    if fam == "Fk":
        sk = _sk_batch(R, op.k)
        t = _newton_transform(R, op.k - 1)
        coef = (1.0 / op.k) * sk ** (1.0 / op.k - 1.0)
        return coef[:, None, None] * t
    if fam == "Fkl":
        lam = np.linalg.eigvalsh(R)
        e = elementary_symmetric_values(lam)
        sk, sl = e[..., op.k], (e[..., op.l] if op.l > 0 else np.ones(len(R)))
        tk = _newton_transform(R, op.k - 1)
        tl = _newton_transform(R, op.l - 1) if op.l > 0 else np.zeros_like(R)
        q = sk / sl
        dq = (tk * sl[:, None, None] - sk[:, None, None] * tl) / (sl ** 2)[:, None, None]
        p = 1.0 / (op.k - op.l)
        return p * (q ** (p - 1.0))[:, None, None] * dq
    if fam == "LogDet":
        return np.linalg.inv(R)

    lam, V = np.linalg.eigh(R)
    if fam in ("LogPk", "TildeFk", "FkNegAlpha"):
        sums = _subset_sums(lam, op.k)
        member = _subset_membership(n, op.k)
        if fam == "LogPk":
            per_subset = 1.0 / sums
            w = per_subset @ member
        elif fam == "TildeFk":
            c = comb(n, op.k)
            f = np.exp(np.log(sums).sum(axis=-1) / c)
            w = (f[:, None] / c) * ((1.0 / sums) @ member)
        else:
            m = sums.min(axis=-1, keepdims=True)
            s = ((sums / m) ** (-op.alpha)).sum(axis=-1, keepdims=True)
            f = m * s ** (-1.0 / op.alpha)
            # dF/dlam_s = sum_{S ni s} (F / sigma_S)^{1+alpha}, each term <= 1
            per_subset = (f / sums) ** (1.0 + op.alpha)
            w = per_subset @ member
        return _spectral_recompose(V, w)
    if fam == "Mk":
        if op.k < n:
            scale = 1.0 + np.linalg.norm(R, axis=(-2, -1))
            gap = lam[..., op.k] - lam[..., op.k - 1]
            tied = gap <= TIE_TOL * scale
            if tied.any():
                idx = int(np.argmax(tied))
                raise NonsmoothPointError(
                    f"m_{op.k} gradient at a tied minimum (batch element {idx}, "
                    f"gap {gap[idx]:.3e})",
                    branches=(op.k - 1, op.k),
                )
        w = np.zeros_like(lam)
        w[..., : op.k] = 1.0
        return _spectral_recompose(V, w)
    if fam == "FkV":
        mats = [np.asarray(m, dtype=float) for m in op.conjugators]
        vals = np.stack(
            [
                evaluate_batch(fk(op.k, n), np.einsum("ab,nbc,dc->nad", q, R, q))
                for q in mats
            ],
            axis=0,
        )
        best = vals.min(axis=0)
        scale = 1.0 + np.linalg.norm(R, axis=(-2, -1))
        near = (vals - best[None, :]) <= TIE_TOL * scale[None, :]
        if (near.sum(axis=0) > 1).any():
            idx = int(np.argmax(near.sum(axis=0) > 1))
            tied = [i for i in range(len(mats)) if near[i, idx]]
            raise NonsmoothPointError(
                f"F_kV gradient at tied branches {tied} (batch element {idx})",
                branches=tied,
            )
        active = vals.argmin(axis=0)
        out = np.empty_like(R)
        for i, q in enumerate(mats):
            sel = active == i
            if not sel.any():
                continue
            conj = np.einsum("ab,nbc,dc->nad", q, R[sel], q)
            g = gradient_batch(fk(op.k, n), conj)
            out[sel] = np.einsum("ba,nbc,cd->nad", q, g, q)
        return 0.5 * (out + np.swapaxes(out, -1, -2))
    raise ArgumentError(f"unknown family {fam}")


def trace_of_gradient_batch(op: OperatorSpec, R) -> np.ndarray:
    """The ellipticity trace T(r) = trace(F_r)."""
    return np.trace(gradient_batch(op, R), axis1=-2, axis2=-1)


# ----------------------------------------------------------------------------
# scalar API


def _require_admissible(op: OperatorSpec, r: SymMat) -> None:
    m = cone_margin(r.matrix(), op.cone)
    if not (m > 0.0):
        raise AdmissibilityError(
            f"matrix outside the open cone of {op.label()} (margin {m:.3e})",
            margin=m,
        )


def evaluate(op: OperatorSpec, r) -> float:
    """F(r); raises AdmissibilityError with the margin if r leaves the cone."""
    r = as_symmat(r, op.n)
    _require_admissible(op, r)
    return float(evaluate_batch(op, r)[0])


def gradient(op: OperatorSpec, r) -> SymMat:
    """F_r at a point strictly inside the cone.

    For Mk and FkV the minimum must be uniquely attained; a tie within
    tolerance raises NonsmoothPointError naming the tied branches.
    """
    r = as_symmat(r, op.n)
    _require_admissible(op, r)
    return SymMat.from_matrix(gradient_batch(op, r)[0])


def trace_of_gradient(op: OperatorSpec, r) -> float:
    return float(np.trace(gradient(op, r).matrix()))


def finite_a0(op: OperatorSpec) -> bool:
    """Guarded test for the extended-real range lower bound."""
    return math.isfinite(op.a0)


STANDARD_FAMILIES = (
    "Fk", "Fkl", "LogDet", "LogPk", "TildeFk", "FkNegAlpha", "Mk", "FkV",
    "Regularized",
)
