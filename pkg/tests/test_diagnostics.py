import numpy as np
import pytest

from aughess.augmenting import ZeroA, constant_rhs
from aughess.diagnostics import (HoelderProbe, SubSuperPair, derivative_norms,
                                 hoelder_null_check, verify_subsolution)
from aughess.errors import ArgumentError
from aughess.grid import TensorSquare
from aughess.operators import fk
from aughess.problems import yamabe_disk
from aughess.solver import QuadraticSeed, SolveConfig, solve
from tests.test_solver import SquareNeumann


def test_probe_validation_and_alpha():
    p = HoelderProbe(n=3, k=2, center=(0, 0, 0))
    assert p.alpha == pytest.approx(0.5)
    assert HoelderProbe(n=4, k=4, center=(0,) * 4).alpha == pytest.approx(1.0)
    with pytest.raises(ArgumentError):
        HoelderProbe(n=4, k=2, center=(0,) * 4)      # k <= n/2
    with pytest.raises(ArgumentError):
        HoelderProbe(n=3, k=4, center=(0,) * 3)
    with pytest.raises(ArgumentError):
        HoelderProbe(n=2, k=2, center=(0, 0), c=-1.0)


def test_hessian_eigenvalue_profile():
    # eigenvalues proportional to (1 - n/k, 1, ..., 1)
    p = HoelderProbe(n=3, k=2, center=(0, 0, 0), c=2.0)
    x = np.array([0.3, -0.4, 0.5])
    lam = np.linalg.eigvalsh(p.hessian(x))
    ratios = lam / lam[-1]
    assert ratios[0] == pytest.approx(1 - 3 / 2)
    assert np.allclose(ratios[1:], 1.0)


@pytest.mark.parametrize("n,k", [(2, 2), (3, 2), (3, 3), (4, 3), (5, 3)])
def test_null_identity_thousand_points(n, k):
    rng = np.random.default_rng(n * 10 + k)
    probe = HoelderProbe(n=n, k=k, center=(0.0,) * n, c=1.7)
    pts = rng.standard_normal((1000, n)) * rng.uniform(0.01, 3.0, (1000, 1))
    pts = pts[np.linalg.norm(pts, axis=1) > 1e-5]
    rep = hoelder_null_check(probe, pts)
    assert rep.verdict
    assert rep.worst_rel_null <= 1e-9


def test_points_near_singularity_rejected():
    probe = HoelderProbe(n=2, k=2, center=(0.0, 0.0))
    with pytest.raises(ArgumentError):
        hoelder_null_check(probe, np.array([[1e-9, 0.0]]))


def test_hand_arithmetic_profiles():
    # n = 3, k = 2: eigenvalues prop to (-1/2, 1, 1); S_2 = -1/2 - 1/2 + 1 = 0
    probe = HoelderProbe(n=3, k=2, center=(0, 0, 0))
    h = probe.hessian([1.0, 0.0, 0.0])
    lam = np.linalg.eigvalsh(h)
    s2 = lam[0] * lam[1] + lam[0] * lam[2] + lam[1] * lam[2]
    assert abs(s2) <= 1e-14 * max(1.0, abs(lam).max() ** 2)


# ----------------------------------------------------------------------------
# derivative norms


def test_derivative_norms_examples():
    g = TensorSquare(2.0, 9, 9)
    assert derivative_norms(g.field(lambda x: 3.0)) == pytest.approx((3.0, 0.0, 0.0), abs=1e-10)
    m0, m1, m2 = derivative_norms(g.field(lambda x: 0.5 * (x @ x)))
    assert m2 == pytest.approx(np.sqrt(2.0), abs=1e-10)   # Frobenius of I
    m0, m1, m2 = derivative_norms(g.field(lambda x: 2.0 * x[0] + x[1]))
    assert m1 == pytest.approx(np.sqrt(5.0), abs=1e-12)
    assert m2 <= 1e-10


# ----------------------------------------------------------------------------
# sub/supersolutions


def quad_config(b_value):
    grid = TensorSquare(2.0, 9, 9)
    return SolveConfig(operator=fk(1, 2), A=ZeroA(2),
                       B=constant_rhs(2, b_value),
                       G=SquareNeumann(grid, phi=-2.0),
                       grid=grid, initial=QuadraticSeed(0.0, 1.0))


def test_quadratic_seed_subsolution():
    # F_1(M[u0]) = eps * n >= B needs eps large enough
    cfg = quad_config(b_value=1.0)
    u0 = QuadraticSeed(0.0, 1.0).field(cfg.grid)       # F_1 = 2 >= 1
    rep = verify_subsolution(SubSuperPair(sub=u0, sup=u0.values + 100.0), cfg)
    assert rep.sub.verdict
    assert rep.sub.interior_margin == pytest.approx(1.0, abs=1e-10)
    weak = QuadraticSeed(0.0, 0.4).field(cfg.grid)     # F_1 = 0.8 < 1
    rep2 = verify_subsolution(SubSuperPair(sub=weak, sup=weak), cfg)
    assert not rep2.sub.verdict


def test_exact_discrete_solution_is_both_barriers():
    # a problem manufactured from a stencil-exact quadratic: equality margins
    cfg = quad_config(b_value=2.0)                      # F_1(M[u0]) = 2 exactly
    u0 = QuadraticSeed(0.0, 1.0).field(cfg.grid)
    grad = cfg.grid.gradient(u0.values)
    exact_phi = {tuple(cfg.grid.nodes[b]): float(cfg.grid.boundary_normals[i] @ grad[b])
                 for i, b in enumerate(cfg.grid.boundary_idx)}
    cfg.G = SquareNeumann(cfg.grid, phi=lambda x: exact_phi[tuple(x)])
    rep = verify_subsolution(SubSuperPair(sub=u0, sup=u0), cfg)
    assert abs(rep.sub.interior_margin) <= 1e-10
    assert abs(rep.sup.interior_margin) <= 1e-10
    assert rep.sub.boundary_margin == pytest.approx(0.0, abs=1e-10)
    assert rep.sup.boundary_margin == pytest.approx(0.0, abs=1e-10)


def test_supersolution_delta_margin():
    cfg = quad_config(b_value=2.0)
    u0 = QuadraticSeed(0.0, 1.0).field(cfg.grid)
    rep = verify_subsolution(SubSuperPair(sub=u0, sup=u0), cfg, delta=0.1)
    # B replaced by B - delta: the equality case now has margin exactly -delta
    assert rep.sup.interior_margin == pytest.approx(-0.1, abs=1e-10)
    rep2 = verify_subsolution(
        SubSuperPair(sub=u0, sup=u0.values + 0.0), cfg, delta=-0.1)
    assert rep2.sup.interior_margin == pytest.approx(0.1, abs=1e-10)


def test_inadmissible_sub_nodes_reported():
    cfg = quad_config(b_value=1.0)
    bad = cfg.grid.field(lambda x: -0.5 * (x @ x))
    rep = verify_subsolution(SubSuperPair(sub=bad, sup=bad.values + 10), cfg)
    assert not rep.sub.verdict
    assert len(rep.sub.inadmissible_nodes) == len(cfg.grid.interior_idx)


def test_solved_field_within_pm_one_barriers():
    prob = yamabe_disk()
    cfg = prob.config(9, 16)
    u, rep = solve(cfg)
    assert rep.converged
    exact = prob.exact_field(cfg.grid)
    pair = SubSuperPair(sub=exact - 1.0, sup=exact + 1.0)
    # the discretization error is O(h^2), so allow that much slack
    srep = verify_subsolution(pair, cfg, tol=5e-2)
    assert srep.verdict
