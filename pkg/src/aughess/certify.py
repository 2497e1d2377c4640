"""Sampled certifiers for the structure conditions an operator must satisfy.

These are falsifiers, not proofs: each condition is checked on a finite batch
of cone samples (plus level-band and norm-ladder constructions for the
asymptotic conditions), and the report records the worst measured violation
together with the tolerance that produced the verdict.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Dict, List, Optional, Tuple

import numpy as np

from .cones import ConeSampler, cone_margin, margin_batch
from .errors import ArgumentError, ConfigError, NonsmoothPointError
from .operators import (OperatorSpec, evaluate_batch, finite_a0, fk_neg_alpha,
                        gradient_batch, mk)
from .symmat import as_batch

CONDITIONS = ("F1", "F2", "F3", "F4", "F5", "F5plus", "F6", "F7",
              "Homogeneity", "TraceBound")


@dataclass
class CertTolerances:
    """Documented defaults for the sampled certifiers."""

    samples: int = 1000
    band: Tuple[float, float] = (0.5, 2.0)           # level band for F5/F6/F7
    f1_floor: float = 1e-9                           # strict positivity floor
    f2_tol: float = 1e-9                             # concavity second difference
    f2_step: float = 1e-4
    f3_gap: float = 0.05                             # finite a0: F must drop below a0+gap
    f3_drop: float = 5.0                             # a0 = -inf: F must drop by this much
    f4_tmax: float = 1e3
    f4_min_growth: float = 5.0                       # required F(t_max r) - F(r) at level 1
    f5_floor: float = 1e-9
    ladder_shells: int = 5
    ladder_base_norm: float = 4.0
    ladder_samples: int = 64
    f5plus_growth: float = 4.0                       # trace must grow by this factor
    f6_decay: float = 0.5                            # E2/(|r| T) must shrink by this factor
    f7_floor: float = 1e-9
    homogeneity_tol: float = 1e-8
    trace_bound_tol: float = 1e-10


@dataclass
class CertReport:
    """Outcome of one condition check.

    The invariant ``verdict == (worst_violation <= tolerance)`` always holds;
    ``witnesses`` lists the worst (matrix, measured value) pairs.
    """

    condition: str
    operator: str
    samples: int
    worst_violation: float
    tolerance: float
    verdict: bool
    witnesses: List[Tuple[np.ndarray, float]] = field(default_factory=list)
    details: Dict[str, float] = field(default_factory=dict)

    @staticmethod
    def from_violations(condition, op, violations, tolerance, R, details=None,
                        n_witness=3):
        violations = np.asarray(violations, dtype=float)
        worst = float(violations.max()) if violations.size else float("-inf")
        order = np.argsort(violations)[::-1][:n_witness]
        witnesses = [(np.array(R[i]), float(violations[i])) for i in order]
        return CertReport(
            condition=condition,
            operator=op.label(),
            samples=int(violations.size),
            worst_violation=worst,
            tolerance=float(tolerance),
            verdict=bool(worst <= tolerance),
            witnesses=witnesses,
            details=dict(details or {}),
        )


def _draw(op: OperatorSpec, sampler: ConeSampler, count: int) -> np.ndarray:
    """Draw, resampling past the rare tied point of a nonsmooth family."""
    for _ in range(8):
        R = sampler.draw(count)
        try:
            gradient_batch(op, R)
        except NonsmoothPointError:
            continue
        except ArgumentError:
            raise
        return R
    raise ConfigError("sampler keeps producing tied branches; widen the eigenvalue box")


def rescale_to_level(op: OperatorSpec, R: np.ndarray, levels: np.ndarray) -> np.ndarray:
    """Scale each sample s*r so that F(s*r) hits the requested level.

    Exact rescale for degree-one homogeneous families, monotone bisection in
    the scale factor otherwise (F(t r) is non-decreasing in t by F1/F1-).
    """
    R = as_batch(R)
    vals = evaluate_batch(op, R)
    if op.homogeneous_degree_one:
        s = levels / vals
        return R * s[:, None, None]
    lo = np.full(len(R), 2.0 ** -40)
    hi = np.full(len(R), 2.0 ** 40)
    for _ in range(80):
        mid = np.sqrt(lo * hi)
        v = evaluate_batch(op, R * mid[:, None, None])
        high = v > levels
        hi = np.where(high, mid, hi)
        lo = np.where(high, lo, mid)
    return R * np.sqrt(lo * hi)[:, None, None]


def band_samples(op: OperatorSpec, sampler: ConeSampler, count: int,
                 band: Tuple[float, float], rng: np.random.Generator) -> np.ndarray:
    """Samples with F(r) in [a, b]."""
    a, b = band
    if finite_a0(op) and a <= op.a0:
        raise ConfigError(f"band low end {a} must exceed a0 = {op.a0}")
    R = _draw(op, sampler, count)
    levels = rng.uniform(a, b, size=count)
    return rescale_to_level(op, R, levels)


def norm_ladder_samples(op: OperatorSpec, sampler: ConeSampler,
                        band: Tuple[float, float], rng: np.random.Generator,
                        shells: int, per_shell: int,
                        base_norm: float) -> List[Tuple[float, np.ndarray]]:
    """Band samples with Frobenius norms on a doubling ladder.

    Each sample is inflated along a random rank-one PSD direction (which stays
    inside every cone in the catalog) and re-scaled back onto the band, so the
    level constraint holds while |r| grows.
    """
    out = []
    base = band_samples(op, sampler, 2 * per_shell, band, rng)
    # keep the bulk: rare near-boundary samples rescale to huge norms and
    # would make the ladder baseline jump around; the rank-one inflation is
    # what supplies large |r|
    norms0 = np.linalg.norm(base, axis=(-2, -1))
    base = base[norms0 <= 4.0 * np.median(norms0)][:per_shell]
    if len(base) < per_shell:
        base = np.concatenate(
            [base, band_samples(op, sampler, per_shell - len(base), band, rng)])
    levels = evaluate_batch(op, base)
    base_norm = max(base_norm,
                    1.1 * float(np.linalg.norm(base, axis=(-2, -1)).max()))
    n = op.n
    phi = rng.standard_normal((per_shell, n))
    phi /= np.linalg.norm(phi, axis=1, keepdims=True)
    Q = np.einsum("ni,nj->nij", phi, phi)
    for j in range(shells):
        target = base_norm * 2.0 ** j
        lo = np.zeros(per_shell)
        hi = np.full(per_shell, 1.0)
        # bracket: grow hi until the on-level norm exceeds the target
        for _ in range(60):
            cand = rescale_to_level(op, base + hi[:, None, None] * Q, levels)
            norms = np.linalg.norm(cand, axis=(-2, -1))
            if (norms >= target).all():
                break
            hi = np.where(norms < target, hi * 2.0, hi)
        else:
            raise ConfigError(
                "norm ladder cannot reach its target: trace inflation saturates "
                f"at |r| ~ {norms.min():.3g} < {target:.3g} (is F5+ false here?)"
            )
        for _ in range(60):
            mid = 0.5 * (lo + hi)
            cand = rescale_to_level(op, base + mid[:, None, None] * Q, levels)
            norms = np.linalg.norm(cand, axis=(-2, -1))
            high = norms > target
            hi = np.where(high, mid, hi)
            lo = np.where(high, lo, mid)
        t = 0.5 * (lo + hi)
        out.append((target, rescale_to_level(op, base + t[:, None, None] * Q, levels)))
    return out


def _e2_batch(op: OperatorSpec, R: np.ndarray) -> np.ndarray:
    """E_2 = F^{ij} r_ik r_jk = <F_r, r^2>."""
    g = gradient_batch(op, R)
    return np.einsum("nij,nij->n", g, R @ R)


def certify_condition(op: OperatorSpec, condition: str, sampler: ConeSampler,
                      tolerances: Optional[CertTolerances] = None,
                      rng: Optional[np.random.Generator] = None) -> CertReport:
    """Check one structure condition on sampled cone points.

    The sampler must draw strictly inside ``op.cone``. Returns a CertReport;
    an unsatisfiable configuration (empty sampler, band below a0) raises
    ConfigError instead.
    """
    if condition not in CONDITIONS:
        raise ArgumentError(f"unknown condition {condition!r}")
    tol = tolerances or CertTolerances()
    rng = rng if rng is not None else sampler.rng
    count = tol.samples
    if count <= 0:
        raise ConfigError("sample count must be positive")

    if condition == "F1":
        R = _draw(op, sampler, count)
        g = gradient_batch(op, R)
        lam_min = np.linalg.eigvalsh(g)[..., 0]
        viol = tol.f1_floor - lam_min
        return CertReport.from_violations(
            condition, op, viol, 0.0, R,
            details={"min_gradient_eigenvalue": float(lam_min.min()),
                     "positivity_floor": tol.f1_floor})

    if condition == "F2":
        R = sampler.draw(count)
        n = op.n
        E = rng.standard_normal((count, n, n))
        E = 0.5 * (E + np.swapaxes(E, -1, -2))
        E /= np.linalg.norm(E, axis=(-2, -1), keepdims=True)
        h = tol.f2_step * (1.0 + np.linalg.norm(R, axis=(-2, -1)))
        # shrink steps that would leave the cone
        for _ in range(60):
            ok = (margin_batch(R + h[:, None, None] * E, op.cone) > 0) & (
                margin_batch(R - h[:, None, None] * E, op.cone) > 0)
            if ok.all():
                break
            h = np.where(ok, h, 0.5 * h)
        fp = evaluate_batch(op, R + h[:, None, None] * E)
        fm = evaluate_batch(op, R - h[:, None, None] * E)
        f0 = evaluate_batch(op, R)
        second = (fp + fm - 2.0 * f0) / h ** 2
        return CertReport.from_violations(
            condition, op, second, tol.f2_tol, R,
            details={"max_second_difference": float(second.max())})

    if condition == "F3":
        R = sampler.draw(count)
        vals = evaluate_batch(op, R)
        range_viol = float((op.a0 - vals).max()) if finite_a0(op) else float("-inf")
        n = op.n
        near_vals = np.empty(count)
        for i in range(count):
            near_vals[i] = _boundary_ray_value(op, R[i], rng)
        if finite_a0(op):
            viol = near_vals - (op.a0 + tol.f3_gap)
            details = {"max_near_boundary_value": float(near_vals.max()),
                       "range_violation": range_viol, "gap": tol.f3_gap}
        else:
            viol = near_vals - (vals - tol.f3_drop)
            details = {"max_near_boundary_drop": float((vals - near_vals).min()),
                       "required_drop": tol.f3_drop}
        viol = np.maximum(viol, range_viol)
        return CertReport.from_violations(condition, op, viol, 0.0, R, details)

    if condition == "F4":
        # rescale to the level F = 1 so slow (logarithmic) growth is measured
        # on the same footing as homogeneous growth
        R = sampler.draw(count)
        level = 1.0 if not finite_a0(op) else max(1.0, op.a0 + 1.0)
        R = rescale_to_level(op, R, np.full(count, level))
        grown = evaluate_batch(op, tol.f4_tmax * R)
        viol = (level + tol.f4_min_growth) - grown
        return CertReport.from_violations(
            condition, op, viol, 0.0, R,
            details={"t_max": tol.f4_tmax, "min_grown_value": float(grown.min()),
                     "required_growth": tol.f4_min_growth})

    if condition == "F5":
        R = band_samples(op, sampler, count, tol.band, rng)
        tr = np.trace(gradient_batch(op, R), axis1=-2, axis2=-1)
        delta0 = float(tr.min())
        viol = tol.f5_floor - tr
        return CertReport.from_violations(
            condition, op, viol, 0.0, R,
            details={"delta0_estimate": delta0,
                     "band_low": tol.band[0], "band_high": tol.band[1]})

    if condition == "F5plus":
        ladder = norm_ladder_samples(op, sampler, tol.band, rng,
                                     tol.ladder_shells, tol.ladder_samples,
                                     tol.ladder_base_norm)
        shell_min = []
        for target, R in ladder:
            tr = np.trace(gradient_batch(op, R), axis1=-2, axis2=-1)
            shell_min.append((target, float(tr.min())))
        growth = shell_min[-1][1] / max(shell_min[0][1], 1e-300)
        viol = np.array([tol.f5plus_growth - growth])
        details = {"trace_growth_ratio": float(growth)}
        for i, (t, v) in enumerate(shell_min):
            details[f"shell_{i}_norm"] = t
            details[f"shell_{i}_min_trace"] = v
        return CertReport.from_violations(
            condition, op, viol, 0.0, ladder[-1][1][:1], details)

    if condition == "F6":
        ladder = norm_ladder_samples(op, sampler, tol.band, rng,
                                     tol.ladder_shells, tol.ladder_samples,
                                     tol.ladder_base_norm)
        ratios = []
        for target, R in ladder:
            tr = np.trace(gradient_batch(op, R), axis1=-2, axis2=-1)
            e2 = _e2_batch(op, R)
            norms = np.linalg.norm(R, axis=(-2, -1))
            ratios.append((target, float((e2 / (norms * tr)).max())))
        decay = ratios[-1][1] / max(ratios[0][1], 1e-300)
        viol = np.array([decay - tol.f6_decay])
        details = {"ratio_decay": float(decay)}
        for i, (t, v) in enumerate(ratios):
            details[f"shell_{i}_norm"] = t
            details[f"shell_{i}_max_ratio"] = v
        return CertReport.from_violations(
            condition, op, viol, 0.0, ladder[-1][1][:1], details)

    if condition == "F7":
        R = band_samples(op, sampler, 4 * count, (tol.band[0], tol.band[1]), rng)
        lam, V = np.linalg.eigh(R)
        has_neg = lam[..., 0] < 0
        if not has_neg.any():
            raise ConfigError(
                "F7 needs samples with a negative eigenvalue; none drawn "
                "(the cone may not contain any)")
        R = R[has_neg][:count]
        lam, V = np.linalg.eigh(R)
        g = gradient_batch(op, R)
        xi = V[..., 0]
        q = np.einsum("ni,nij,nj->n", xi, g, xi)
        tr = np.trace(g, axis1=-2, axis2=-1)
        ratio = q / (1.0 + tr)
        delta = float(ratio.min())
        viol = tol.f7_floor - ratio
        return CertReport.from_violations(
            condition, op, viol, 0.0, R,
            details={"delta0_estimate": delta, "delta1_estimate": delta,
                     "negative_eig_samples": int(len(R))})

    if condition == "Homogeneity":
        R = _draw(op, sampler, count)
        f = evaluate_batch(op, R)
        scale_viol = np.zeros(count)
        for t in (0.5, 2.0, 10.0):
            ft = evaluate_batch(op, t * R)
            scale_viol = np.maximum(
                scale_viol, np.abs(ft - t * f) / (t * (1.0 + np.abs(f))))
        g = gradient_batch(op, R)
        euler = np.abs(np.einsum("nij,nij->n", R, g) - f) / (1.0 + np.abs(f))
        viol = np.maximum(scale_viol, euler)
        return CertReport.from_violations(
            condition, op, viol, tol.homogeneity_tol, R,
            details={"max_scaling_violation": float(scale_viol.max()),
                     "max_euler_violation": float(euler.max())})

    if condition == "TraceBound":
        R = _draw(op, sampler, count)
        f = evaluate_batch(op, R)
        g = gradient_batch(op, R)
        tr = np.trace(g, axis1=-2, axis2=-1)
        rdotg = np.einsum("nij,nij->n", R, g)
        viol = np.full(count, float("-inf"))
        details = {}
        if op.homogeneous_degree_one:
            f_id = float(evaluate_batch(op, np.eye(op.n)[None])[0])
            viol = np.maximum(viol, f_id - tr)
            details["F_at_identity"] = f_id
            details["min_trace"] = float(tr.min())
        if finite_a0(op):
            viol = np.maximum(viol, -rdotg)
            viol = np.maximum(viol, rdotg - (f - op.a0))
            details["max_r_dot_Fr_excess"] = float((rdotg - (f - op.a0)).max())
        return CertReport.from_violations(
            condition, op, viol, tol.trace_bound_tol, R, details)

    raise ArgumentError(f"unhandled condition {condition}")


def _boundary_ray_value(op: OperatorSpec, r: np.ndarray,
                        rng: np.random.Generator) -> float:
    """F evaluated close to the cone boundary along a random exit ray."""
    n = op.n
    for _ in range(16):
        e = rng.standard_normal((n, n))
        e = 0.5 * (e + e.T)
        e /= np.linalg.norm(e)
        t_hi = 1.0
        exited = False
        for _ in range(60):
            if cone_margin(r + t_hi * e, op.cone) <= 0:
                exited = True
                break
            t_hi *= 2.0
        if not exited:
            continue
        t_lo = 0.0
        for _ in range(80):
            mid = 0.5 * (t_lo + t_hi)
            if cone_margin(r + mid * e, op.cone) > 0:
                t_lo = mid
            else:
                t_hi = mid
        # walk toward the crossing while staying strictly inside
        best = None
        for frac in (0.9, 0.99, 0.999, 1.0 - 1e-6, 1.0 - 1e-9):
            cand = r + frac * t_lo * e
            if cone_margin(cand, op.cone) > 0:
                best = cand
        if best is None:
            continue
        return float(evaluate_batch(op, best)[0])
    raise ConfigError("no cone-exiting ray found; the cone may contain all directions")


# ----------------------------------------------------------------------------
# sandwich report for the degenerate minimum operators


@dataclass
class SandwichReport:
    """Empirical bracketing of F_{k,-alpha} against m_k.

    The verified direction is (C(n,k))^{-1/alpha} m_k <= F_{k,-alpha} <= m_k,
    with F increasing in alpha toward m_k; the report records what the samples
    show rather than asserting a printed inequality.
    """

    k: int
    n: int
    alphas: List[float]
    samples: int
    lower_holds: bool              # (C^k_n)^{-1/alpha} m_k <= F
    upper_holds: bool              # F <= m_k
    monotone_increasing: bool
    monotone_decreasing: bool
    limit_alpha: float
    limit_max_rel_gap: float
    table: List[Dict[str, float]] = field(default_factory=list)


def sandwich_check(k: int, alpha_list, sampler: ConeSampler,
                   count: int = 200, limit_alpha: float = 64.0,
                   tol: float = 1e-12) -> SandwichReport:
    """Record F_{k,-alpha}, m_k and the bracketing constants on cone samples."""
    alphas = [float(a) for a in alpha_list]
    if any(b <= a for a, b in zip(alphas, alphas[1:])):
        raise ArgumentError("alpha_list must be strictly increasing")
    n = sampler.n
    R = sampler.draw(count)
    mval = evaluate_batch(mk(k, n), R)
    c = math.comb(n, k)
    vals = {a: evaluate_batch(fk_neg_alpha(k, a, n), R) for a in alphas}
    lower_ok, upper_ok = True, True
    inc, dec = True, True
    table = []
    prev = None
    for a in alphas:
        f = vals[a]
        lower = c ** (-1.0 / a) * mval
        scale = 1.0 + np.abs(mval)
        lower_ok &= bool((f >= lower - tol * scale).all())
        upper_ok &= bool((f <= mval + tol * scale).all())
        if prev is not None:
            inc &= bool((f >= prev - tol * scale).all())
            dec &= bool((f <= prev + tol * scale).all())
        prev = f
        table.append({
            "alpha": a,
            "min_F": float(f.min()),
            "max_F_over_mk": float((f / mval).max()),
            "min_F_over_lower": float((f / lower).min()),
        })
    flim = evaluate_batch(fk_neg_alpha(k, limit_alpha, n), R)
    gap = float((np.abs(flim - mval) / np.abs(mval)).max())
    return SandwichReport(
        k=k, n=n, alphas=alphas, samples=count,
        lower_holds=lower_ok, upper_holds=upper_ok,
        monotone_increasing=inc, monotone_decreasing=dec,
        limit_alpha=limit_alpha, limit_max_rel_gap=gap, table=table)
