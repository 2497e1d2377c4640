"""Analytic probes of the estimate-level structures: the Hoelder comparison
function and its exact null identity, sub/supersolution verification, and
discrete derivative sup-norms."""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import List, Optional, Tuple

import numpy as np

from .cones import GammaK, margin_batch
from .errors import ArgumentError
from .grid import Field
from .operators import evaluate_batch, elementary_symmetric_values
from .solver import SolveConfig, DiscreteProblem


@dataclass(frozen=True)
class HoelderProbe:
    """Comparison function Phi = c |x - y|^alpha with alpha = 2 - n/k.

    Requires n/2 < k <= n, so alpha lies in (0, 1] with alpha = 1 exactly at
    k = n. The Hessian of Phi has eigenvalue profile
    alpha c rho^(alpha-2) * (1 - n/k, 1, ..., 1), which annihilates S_k.
    """

    n: int
    k: int
    center: Tuple[float, ...]
    c: float = 1.0

    def __post_init__(self):
        if not (self.n / 2 < self.k <= self.n):
            raise ArgumentError(f"need n/2 < k <= n, got n={self.n}, k={self.k}")
        if self.c <= 0:
            raise ArgumentError("coefficient c must be positive")
        if len(self.center) != self.n:
            raise ArgumentError("center dimension mismatch")

    @property
    def alpha(self) -> float:
        return 2.0 - self.n / self.k

    def hessian(self, x) -> np.ndarray:
        """D^2 Phi, analytic: alpha c rho^(alpha-2) (I + (alpha-2) e x e)."""
        x = np.asarray(x, dtype=float).reshape(self.n)
        d = x - np.asarray(self.center, dtype=float)
        rho = float(np.linalg.norm(d))
        if rho < 1e-6:
            raise ArgumentError("sample point too close to the singularity")
        e = d / rho
        a = self.alpha
        return a * self.c * rho ** (a - 2.0) * (np.eye(self.n) + (a - 2.0) * np.outer(e, e))


@dataclass
class HoelderNullReport:
    probe: HoelderProbe
    samples: int
    worst_rel_null: float
    tolerance: float
    verdict: bool
    values: List[float] = field(default_factory=list)


def hoelder_null_check(probe: HoelderProbe, points, tolerance: float = 1e-9) -> HoelderNullReport:
    """Verify S_k(D^2 Phi) = 0 at each sample point.

    The null value is measured relative to S_k of the matching all-positive
    eigenvalue profile, so the check is scale-free in rho and c.
    """
    pts = np.atleast_2d(np.asarray(points, dtype=float))
    n, k = probe.n, probe.k
    worst = 0.0
    vals = []
    for x in pts:
        h = probe.hessian(x)
        lam = np.linalg.eigvalsh(h)
        sk = float(elementary_symmetric_values(lam[None, :])[0, k])
        scale = float(elementary_symmetric_values(np.abs(lam)[None, :])[0, k])
        level = np.abs(lam).max() ** k
        rel = abs(sk) / max(scale, level, 1e-300)
        vals.append(rel)
        worst = max(worst, rel)
    return HoelderNullReport(probe=probe, samples=len(pts),
                             worst_rel_null=worst, tolerance=tolerance,
                             verdict=bool(worst <= tolerance), values=vals)


# ----------------------------------------------------------------------------
# sub/supersolution verification


@dataclass
class SubSuperPair:
    """Candidate ordered barriers; fields or callables over the grid."""

    sub: object
    sup: object

    def fields(self, grid) -> Tuple[Field, Field]:
        def coerce(f):
            if isinstance(f, Field):
                return f
            return grid.field(f)
        return coerce(self.sub), coerce(self.sup)


@dataclass
class BarrierReport:
    side: str                        # "sub" or "sup"
    interior_margin: float           # min of the signed inequality slack
    boundary_margin: float
    admissible_nodes: int
    inadmissible_nodes: List[int]
    verdict: bool
    delta: float = 0.0


def _barrier_side(cfg: SolveConfig, values: np.ndarray, side: str,
                  delta: float, tol: float) -> BarrierReport:
    prob = DiscreteProblem(cfg)
    grid = cfg.grid
    grad = grid.gradient(values)
    hess = grid.hessian(values)
    ii, bb = grid.interior_idx, grid.boundary_idx
    A = cfg.A.evaluate_batch(grid.nodes[ii], values[ii], grad[ii])
    M = hess[ii] - A
    margins = margin_batch(M, cfg.operator.cone)
    admissible = margins > 0.0
    inadmissible = [int(i) for i in ii[~admissible]]

    Xi = grid.nodes[ii][admissible]
    ui = values[ii][admissible]
    gi = grad[ii][admissible]
    f = evaluate_batch(cfg.operator, M[admissible])
    b = cfg.B.evaluate_batch(Xi, ui, gi) - delta
    g_bnd = np.array([cfg.G.g(x, z, p) for x, z, p in
                      zip(grid.nodes[bb], values[bb], grad[bb])])
    if side == "sub":
        interior = f - b
        boundary = g_bnd
    else:
        interior = b - f
        boundary = -g_bnd
    i_marg = float(interior.min()) if interior.size else float("inf")
    b_marg = float(boundary.min())
    # a subsolution must be admissible where the inequality is claimed; the
    # supersolution inequality is only checked where the operator is defined
    ok = i_marg >= -tol and b_marg >= -tol
    if side == "sub" and inadmissible:
        ok = False
    return BarrierReport(side=side, interior_margin=i_marg,
                         boundary_margin=b_marg,
                         admissible_nodes=int(admissible.sum()),
                         inadmissible_nodes=inadmissible,
                         verdict=bool(ok), delta=delta)


@dataclass
class SubSuperReport:
    sub: BarrierReport
    sup: BarrierReport

    @property
    def verdict(self) -> bool:
        return self.sub.verdict and self.sup.verdict


def verify_subsolution(pair: SubSuperPair, cfg: SolveConfig,
                       delta: float = 0.0, tol: float = 1e-8) -> SubSuperReport:
    """Nodewise F(M_h[.]) vs B and G checks for an ordered barrier pair.

    ``delta`` strengthens the supersolution side to B - delta (the margin the
    degenerate existence argument needs).
    """
    sub_f, sup_f = pair.fields(cfg.grid)
    return SubSuperReport(
        sub=_barrier_side(cfg, sub_f.values, "sub", 0.0, tol),
        sup=_barrier_side(cfg, sup_f.values, "sup", delta, tol),
    )


def derivative_norms(u: Field) -> Tuple[float, float, float]:
    """Discrete sup-norms (M0, M1, M2) using the assembly stencils.

    M2 uses the Frobenius norm of the nodal Hessian.
    """
    g = u.grid
    m0 = float(np.abs(u.values).max())
    m1 = float(np.linalg.norm(g.gradient(u.values), axis=1).max())
    m2 = float(np.linalg.norm(g.hessian(u.values), axis=(1, 2)).max())
    return m0, m1, m2
