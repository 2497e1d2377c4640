"""Damped-Newton homotopy-continuation solver for F(M[u]) = B with oblique
boundary conditions, plus the epsilon-regularization ladder for degenerate
operators.

The homotopy freezes the seed: B_t = t B + (1 - t) F(M_h[u_0]), so the seed
solves the t = 0 problem exactly and continuation marches t to 1. Every
accepted Newton iterate is kept admissible: the step is scaled so the cone
margin at each interior node never falls below half the configured floor.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field as dc_field
from typing import Dict, List, Optional, Tuple, Union

import numpy as np
import scipy.sparse as sp
import scipy.sparse.linalg as spla

from .augmenting import AugMatrixSpec, RhsSpec
from .cones import margin_batch
from .errors import AdmissibilityError, ArgumentError, SeedError
from .grid import Field, Grid
from .operators import (OperatorSpec, evaluate_batch, finite_a0,
                        gradient_batch, regularized)


@dataclass(frozen=True)
class QuadraticSeed:
    """Admissible initial guess u0 = c0 + (eps/2) |x - x0|^2."""

    c0: float
    eps: float
    x0: Tuple[float, float] = (0.0, 0.0)

    def field(self, grid: Grid) -> Field:
        d = grid.nodes - np.asarray(self.x0, dtype=float)
        return Field(grid, self.c0 + 0.5 * self.eps * (d ** 2).sum(axis=1))


@dataclass
class SolveConfig:
    """Everything a solve needs; validated on construction."""

    operator: OperatorSpec
    A: AugMatrixSpec
    B: RhsSpec
    G: object                       # boundary operator: g/gp/gz methods
    grid: Grid
    initial: Union[Field, QuadraticSeed]
    continuation_steps: int = 16
    min_continuation_step: float = 1.0 / 1024.0
    newton_max_iter: int = 30
    residual_tolerance: float = 1e-9
    armijo_slope: float = 1e-4
    max_backtracks: int = 40
    admissibility_floor: float = 1e-8
    eps_schedule: Tuple[float, ...] = ()
    # smooth-minimum exponent used inside each eps rung of a degenerate solve
    # (the approximation m_k = lim F_{k,-alpha} from the degenerate theory);
    # residual kinks otherwise defeat Newton wherever eigenvalues tie
    degenerate_alpha: float = 64.0

    def __post_init__(self):
        fam = self.operator.family
        degenerate = fam in ("Mk", "FkV")
        sched = tuple(float(e) for e in self.eps_schedule)
        if degenerate:
            if not sched:
                raise ArgumentError(
                    f"{fam} is degenerate: SolveConfig needs a positive, strictly "
                    "decreasing eps_schedule")
            if any(e <= 0 for e in sched):
                raise ArgumentError("eps_schedule entries must be positive")
            if any(b >= a for a, b in zip(sched, sched[1:])):
                raise ArgumentError("eps_schedule must be strictly decreasing")
        self.eps_schedule = sched

    def seed_field(self) -> Field:
        if isinstance(self.initial, QuadraticSeed):
            return self.initial.field(self.grid)
        return self.initial.copy()


@dataclass
class NewtonStepRecord:
    t: float
    iterations: int
    residuals: List[float]
    dampings: List[float]
    min_margin: float
    converged: bool


@dataclass
class SolveReport:
    converged: bool
    steps: List[NewtonStepRecord] = dc_field(default_factory=list)
    final_residual: float = float("inf")
    final_margin: float = float("-inf")
    tolerance_used: float = float("nan")
    m0: float = float("nan")
    m1: float = float("nan")
    m2: float = float("nan")
    comparison: Optional[Dict[str, object]] = None
    eps_ladder: List[Dict[str, float]] = dc_field(default_factory=list)
    homotopy: str = "frozen-seed continuation in B"
    failure: str = ""
    margin_floor: float = float("nan")


class DiscreteProblem:
    """Grid-bound assembly of residuals and Jacobians for one operator."""

    def __init__(self, cfg: SolveConfig, operator: Optional[OperatorSpec] = None):
        self.cfg = cfg
        self.op = operator if operator is not None else cfg.operator
        self.grid = cfg.grid
        g = self.grid
        self.ii = g.interior_idx
        self.bb = g.boundary_idx
        self.X = g.nodes
        self.Xb = g.nodes[self.bb]
        self.b0: Optional[np.ndarray] = None
        self.g0: Optional[np.ndarray] = None
        # largest absolute stencil row sum: sets the rounding floor of the
        # residual evaluation (dominant near the polar axis)
        self.stencil_scale = max(
            float(np.abs(m).sum(axis=1).max())
            for m in (g.Dxx, g.Dyy, g.Dxy, g.Dx, g.Dy))

    # -- state ----------------------------------------------------------------

    def state(self, u: np.ndarray):
        g = self.grid
        grad = g.gradient(u)
        hess = g.hessian(u)
        A = self.cfg.A.evaluate_batch(self.X[self.ii], u[self.ii], grad[self.ii])
        M = hess[self.ii] - A
        return grad, M

    def margins(self, u: np.ndarray) -> np.ndarray:
        _, M = self.state(u)
        return margin_batch(M, self.op.cone)

    def freeze_seed(self, u0: np.ndarray, floor: float) -> None:
        """Pin the homotopy base: B_0 = F(M_h[u_0]) on interior rows and the
        seed's boundary mismatch G[u_0] on boundary rows, so (seed, t = 0)
        solves the t = 0 problem exactly."""
        grad, M = self.state(u0)
        m = margin_batch(M, self.op.cone)
        if m.min() < floor:
            raise SeedError(
                f"seed is not admissible: worst interior margin {m.min():.3e} "
                f"< floor {floor:.3e} at node {self.ii[int(m.argmin())]}")
        self.b0 = evaluate_batch(self.op, M)
        gb = grad[self.bb]
        self.g0 = np.array([self.cfg.G.g(x, z, p)
                            for x, z, p in zip(self.Xb, u0[self.bb], gb)])

    def _bt(self, t: float, Xi, ui, gradi) -> np.ndarray:
        b = self.cfg.B.evaluate_batch(Xi, ui, gradi)
        if finite_a0(self.op) and b.min() <= self.op.a0:
            raise AdmissibilityError(
                f"right side B dips to {b.min():.3e}, at or below the operator "
                f"range bound a0 = {self.op.a0}")
        return t * b + (1.0 - t) * self.b0

    def residual(self, u: np.ndarray, t: float, margin_floor: float) -> np.ndarray:
        grad, M = self.state(u)
        m = margin_batch(M, self.op.cone)
        if m.min() < margin_floor:
            i = int(m.argmin())
            raise AdmissibilityError(
                f"inadmissible state: margin {m.min():.3e} at node {self.ii[i]}",
                margin=float(m.min()), node=int(self.ii[i]))
        r = np.zeros_like(u)
        Xi, ui, gradi = self.X[self.ii], u[self.ii], grad[self.ii]
        r[self.ii] = evaluate_batch(self.op, M) - self._bt(t, Xi, ui, gradi)
        gb = grad[self.bb]
        g_now = np.array([self.cfg.G.g(x, z, p)
                          for x, z, p in zip(self.Xb, u[self.bb], gb)])
        r[self.bb] = g_now - (1.0 - t) * self.g0
        return r

    def jacobian(self, u: np.ndarray, t: float) -> sp.csr_matrix:
        g = self.grid
        N = g.node_count
        grad, M = self.state(u)
        Xi, ui, gradi = self.X[self.ii], u[self.ii], grad[self.ii]

        Fr = gradient_batch(self.op, M)
        dpa = self.cfg.A.dp_batch(Xi, ui, gradi)
        dza = self.cfg.A.dz_batch(Xi, ui, gradi)
        dpb = self.cfg.B.dp_batch(Xi, ui, gradi)
        dzb = self.cfg.B.dz_batch(Xi, ui, gradi)

        def full(vals):
            out = np.zeros(N)
            out[self.ii] = vals
            return out

        wxx = full(Fr[:, 0, 0])
        wyy = full(Fr[:, 1, 1])
        wxy = full(2.0 * Fr[:, 0, 1])
        cvec = np.einsum("nij,nijk->nk", Fr, dpa) + t * dpb
        cx = full(cvec[:, 0])
        cy = full(cvec[:, 1])
        c0 = full(np.einsum("nij,nij->n", Fr, dza) + t * dzb)

        D = sp.diags
        J = (D(wxx) @ g.Dxx + D(wyy) @ g.Dyy + D(wxy) @ g.Dxy
             - D(cx) @ g.Dx - D(cy) @ g.Dy - D(c0))

        gpx = np.zeros(N)
        gpy = np.zeros(N)
        gz = np.zeros(N)
        for x, b, z, p in zip(self.Xb, self.bb, u[self.bb], grad[self.bb]):
            gp = np.asarray(self.cfg.G.gp(x, z, p), dtype=float)
            gpx[b], gpy[b] = gp
            gz[b] = self.cfg.G.gz(x, z, p)
        J = J + D(gpx) @ g.Dx + D(gpy) @ g.Dy + D(gz)
        return J.tocsr()


def assemble_residual(cfg: SolveConfig, u: Field, t: float,
                      margin_floor: Optional[float] = None) -> Field:
    """Homotopy residual at continuation parameter t.

    Interior rows carry F(M_h[u]) - B_t, boundary rows carry G; the state must
    clear the admissibility floor (cfg.admissibility_floor by default).
    """
    prob = DiscreteProblem(cfg)
    floor = cfg.admissibility_floor if margin_floor is None else margin_floor
    prob.freeze_seed(cfg.seed_field().values, floor)
    return Field(cfg.grid, prob.residual(u.values, t, floor))


def assemble_jacobian(cfg: SolveConfig, u: Field, t: float) -> sp.csr_matrix:
    """Linearization consistent with assemble_residual to first order."""
    prob = DiscreteProblem(cfg)
    prob.freeze_seed(cfg.seed_field().values, cfg.admissibility_floor)
    _ = prob.residual(u.values, t, cfg.admissibility_floor)
    return prob.jacobian(u.values, t)


def _newton_at_t(prob: DiscreteProblem, cfg: SolveConfig, u: np.ndarray,
                 t: float, floor: float, tol: float) -> Tuple[np.ndarray, NewtonStepRecord]:
    res = prob.residual(u, t, floor)
    rnorm = float(np.abs(res).max())
    record = NewtonStepRecord(t=t, iterations=0, residuals=[rnorm],
                              dampings=[], min_margin=float(prob.margins(u).min()),
                              converged=False)
    for _ in range(cfg.newton_max_iter):
        if rnorm <= tol:
            record.converged = True
            break
        J = prob.jacobian(u, t)
        try:
            lu = spla.splu(J.tocsc())
            delta = lu.solve(-res)
            # one round of iterative refinement: the 1/r^2 stiffness of the
            # polar grid otherwise caps the reachable residual
            delta += lu.solve(-res - J @ delta)
        except RuntimeError:
            break
        if not np.isfinite(delta).all():
            break
        s = 1.0
        accepted = False
        for _ in range(cfg.max_backtracks):
            trial = u + s * delta
            try:
                # admissibility cap: the trial must keep every node above
                # half the floor before the Armijo test even applies
                if prob.margins(trial).min() < 0.5 * floor:
                    s *= 0.5
                    continue
                trial_res = prob.residual(trial, t, 0.5 * floor)
            except AdmissibilityError:
                s *= 0.5
                continue
            trial_norm = float(np.abs(trial_res).max())
            if trial_norm <= (1.0 - cfg.armijo_slope * s) * rnorm:
                u = trial
                res = trial_res
                rnorm = trial_norm
                accepted = True
                break
            s *= 0.5
        record.iterations += 1
        record.residuals.append(rnorm)
        record.dampings.append(s if accepted else 0.0)
        if not accepted:
            break
    else:
        record.converged = rnorm <= tol
    if rnorm <= tol:
        record.converged = True
    record.min_margin = float(prob.margins(u).min())
    return u, record


def _solve_single(cfg: SolveConfig, operator: OperatorSpec, seed: np.ndarray,
                  report: SolveReport) -> Tuple[np.ndarray, bool]:
    prob = DiscreteProblem(cfg, operator)
    floor = cfg.admissibility_floor
    try:
        prob.freeze_seed(seed, floor)
    except SeedError:
        raise
    grad = cfg.grid.gradient(seed)
    b_target = cfg.B.evaluate_batch(prob.X[prob.ii], seed[prob.ii], grad[prob.ii])
    b_scale = float(np.abs(b_target).max())
    # residual entries are O(stencil_scale * u) sums cancelling to O(1), so
    # the sup-residual cannot be driven below the rounding floor of that sum
    rounding_floor = 8.0 * np.finfo(float).eps * prob.stencil_scale \
        * (1.0 + float(np.abs(seed).max()))
    tol = max(cfg.residual_tolerance * (1.0 + b_scale), rounding_floor)
    report.tolerance_used = tol

    u = seed.copy()
    t = 0.0
    dt = 1.0 / cfg.continuation_steps
    while t < 1.0 - 1e-14:
        t_next = min(1.0, t + dt)
        u_next, record = _newton_at_t(prob, cfg, u, t_next, floor, tol)
        report.steps.append(record)
        if record.converged:
            u = u_next
            t = t_next
            if record.iterations <= 2:
                dt = min(2.0 * dt, 1.0 / 4.0)
        else:
            dt *= 0.5
            if dt < cfg.min_continuation_step:
                report.failure = (
                    f"continuation stalled at t = {t:.6f}: step underflow below "
                    f"{cfg.min_continuation_step}")
                return u, False
    res = prob.residual(u, 1.0, 0.5 * floor)
    report.final_residual = float(np.abs(res).max())
    report.final_margin = float(prob.margins(u).min())
    return u, True


def solve(cfg: SolveConfig) -> Tuple[Field, SolveReport]:
    """March the homotopy to t = 1 (through the eps ladder when degenerate).

    Divergence is a report outcome, not an exception; an inadmissible seed
    raises SeedError.
    """
    report = SolveReport(converged=False, margin_floor=cfg.admissibility_floor)
    seed = cfg.seed_field().values

    if cfg.eps_schedule:
        base = cfg.operator
        if base.family == "Mk" and cfg.degenerate_alpha:
            from .operators import fk_neg_alpha
            base = fk_neg_alpha(base.k, cfg.degenerate_alpha, base.n)
            report.homotopy += (
                f"; min operator solved through its smooth approximation "
                f"F_(k,-{cfg.degenerate_alpha:g}) within each eps rung")
        u = seed
        prev = None
        ok = True
        for eps in cfg.eps_schedule:
            op_eps = regularized(base, eps)
            u, ok = _solve_single(cfg, op_eps, u, report)
            if not ok:
                report.failure = f"eps = {eps}: " + report.failure
                break
            if prev is not None:
                diff = float(np.abs(u - prev).max())
                report.eps_ladder.append(
                    {"eps": eps, "diff_sup": diff, "ratio": diff / eps})
            prev = u.copy()
        report.converged = ok
        final = Field(cfg.grid, u)
    else:
        u, ok = _solve_single(cfg, cfg.operator, seed, report)
        report.converged = ok
        final = Field(cfg.grid, u)

    g = cfg.grid
    report.m0 = float(np.abs(final.values).max())
    report.m1 = float(np.linalg.norm(g.gradient(final.values), axis=1).max())
    report.m2 = float(np.linalg.norm(g.hessian(final.values), axis=(1, 2)).max())
    return final, report


@dataclass
class ComparisonFlags:
    sub_ok: bool
    sup_ok: bool
    worst_sub_gap: float
    worst_sup_gap: float
    worst_sub_node: int
    worst_sup_node: int

    @property
    def ok(self) -> bool:
        return self.sub_ok and self.sup_ok


def check_comparison(u: Field, sub: Field, sup: Field,
                     tol: float = 1e-8) -> ComparisonFlags:
    """Nodewise sub <= u <= sup within tol * (1 + |u|_inf)."""
    if sub.grid is not u.grid or sup.grid is not u.grid:
        if sub.values.size != u.values.size or sup.values.size != u.values.size:
            raise ArgumentError("comparison fields must share the grid")
    slack = tol * (1.0 + u.sup_norm())
    sub_gap = sub.values - u.values          # positive where sub exceeds u
    sup_gap = u.values - sup.values
    return ComparisonFlags(
        sub_ok=bool(sub_gap.max() <= slack),
        sup_ok=bool(sup_gap.max() <= slack),
        worst_sub_gap=float(sub_gap.max()),
        worst_sup_gap=float(sup_gap.max()),
        worst_sub_node=int(sub_gap.argmax()),
        worst_sup_node=int(sup_gap.argmax()),
    )
