import numpy as np
import pytest

from aughess.augmenting import EuclideanYamabeA, ZeroA
from aughess.cones import GammaK, PositiveCone
from aughess.errors import ArgumentError, ConstraintError
from aughess.geometry import (Capillarity, CustomBoundaryOp, Disk, Domain2D,
                              Ellipse, Neumann, SemilinearNormalized,
                              SmoothClosed, barrier_value, certify_convexity,
                              curvature_matrix)

DOMAINS = [Disk(1.0), Disk(2.5), Ellipse(2.0, 1.0),
           SmoothClosed(1.0, cos_coeffs=(0.15,), sin_coeffs=(0.0, 0.1))]


@pytest.mark.parametrize("dom", DOMAINS)
def test_normal_and_projection_identities(dom):
    for th in np.linspace(0, 2 * np.pi, 40, endpoint=False):
        x = dom.boundary_point(th)
        nu = dom.normal(x)
        P = dom.projection(x)
        assert np.linalg.norm(nu) == pytest.approx(1.0, abs=1e-12)
        assert np.abs(P @ P - P).max() <= 1e-12
        assert np.abs(P @ nu).max() <= 1e-12
        # inner normal points inside
        assert dom.contains(x + 1e-6 * dom.scale() * nu)


@pytest.mark.parametrize("dom", DOMAINS)
def test_signed_distance_signs(dom):
    assert dom.signed_distance(np.zeros(2)) > 0
    far = np.array([10.0, 10.0])
    assert dom.signed_distance(far) < 0
    x = dom.boundary_point(1.1)
    assert abs(dom.signed_distance(x)) <= 1e-10 * dom.scale()


def test_disk_distance_formula():
    d = Disk(2.0)
    assert d.signed_distance([1.0, 0.0]) == pytest.approx(1.0)
    assert d.signed_distance([0.5, 0.5]) == pytest.approx(2.0 - np.sqrt(0.5))


def test_disk_curvature_and_shape_operator_vs_fd():
    d = Disk(2.0)
    for th in np.linspace(0, 2 * np.pi, 16, endpoint=False):
        assert d.curvature_at_param(th) == pytest.approx(0.5)
        fd = Domain2D._curvature_fd(d, th)
        assert fd == pytest.approx(0.5, abs=1e-8 * 0.5)
        x = d.boundary_point(th)
        sop = d.shape_operator_at_param(th)
        assert np.abs(sop - 0.5 * d.projection(x)).max() <= 1e-10


def test_ellipse_curvature_analytic_vs_fd():
    e = Ellipse(2.0, 1.0)
    for th in np.linspace(0, 2 * np.pi, 24, endpoint=False):
        assert Domain2D._curvature_fd(e, th) == pytest.approx(
            e.curvature_at_param(th), rel=1e-7)


def test_smooth_closed_positive_radius_required():
    with pytest.raises(ArgumentError):
        SmoothClosed(1.0, cos_coeffs=(1.5,))


# ----------------------------------------------------------------------------
# curvature matrix


def test_curvature_matrix_zero_a_is_curvature_projection():
    for R in (1.0, 2.5):
        d = Disk(R)
        a0 = ZeroA(2)
        for th in (0.0, 1.2, 4.0):
            x = d.boundary_point(th)
            K = curvature_matrix(d, a0, x, 0.0, [0.4, -1.0])
            assert np.abs(K - d.projection(x) / R).max() <= 1e-8 / R


def test_curvature_matrix_yamabe_normal_component():
    d = Disk(1.0)
    ay = EuclideanYamabeA(2)
    th = 0.8
    x = d.boundary_point(th)
    nu = d.normal(x)
    tau = d.tangent(th)
    for s in (-0.5, 0.0, 1.3):
        p = s * nu + 0.7 * tau
        K = curvature_matrix(d, ay, x, 0.0, p)
        assert np.abs(K - (1.0 + s) * d.projection(x)).max() <= 1e-10


def test_curvature_matrix_independent_of_p_for_zero_a():
    d = Ellipse(2.0, 1.0)
    a0 = ZeroA(2)
    x = d.boundary_point(0.3)
    k1 = curvature_matrix(d, a0, x, 0.0, [0.0, 0.0])
    k2 = curvature_matrix(d, a0, x, 0.5, [3.0, -2.0])
    assert np.abs(k1 - k2).max() <= 1e-12


def test_curvature_matrix_requires_boundary_point():
    d = Disk(1.0)
    with pytest.raises(ArgumentError):
        curvature_matrix(d, ZeroA(2), [0.5, 0.0], 0.0, [0.0, 0.0])


# ----------------------------------------------------------------------------
# boundary operators


def test_neumann_obliqueness_normalized():
    d = Disk(1.0)
    g = Neumann(d, phi=lambda x, z: 1.0)
    x = d.boundary_point(0.2)
    assert g.obliqueness(x, 0.0, [3.0, 4.0]) == pytest.approx(1.0)
    assert g.g(x, 0.0, d.normal(x) * 2.0) == pytest.approx(1.0)  # 2 - phi


def test_semilinear_tangential_field():
    d = Disk(1.0)
    g = SemilinearNormalized(d, phi=lambda x, z: 0.0,
                             beta_prime=lambda x: 0.5 * np.array([-x[1], x[0]]))
    x = d.boundary_point(0.9)
    assert g.obliqueness(x, 0.0, [1.0, 1.0]) == pytest.approx(1.0)


def test_capillarity_obliqueness_and_concavity():
    d = Disk(1.0)
    g = Capillarity(d, theta=lambda x: 0.5, phi=lambda x, z: 0.1)
    assert g.beta0 == pytest.approx(0.5)
    rng = np.random.default_rng(0)
    x = d.boundary_point(2.2)
    for _ in range(100):
        p = 5.0 * rng.standard_normal(2)
        assert g.obliqueness(x, 0.0, p) >= 1.0 - 0.5 - 1e-10
        # sampled second directional difference in p must be concave
        e = rng.standard_normal(2)
        e /= np.linalg.norm(e)
        h = 1e-3
        second = (g.g(x, 0, p + h * e) + g.g(x, 0, p - h * e)
                  - 2 * g.g(x, 0, p)) / h ** 2
        assert second <= 1e-9


def test_capillarity_theta_bounds():
    d = Disk(1.0)
    with pytest.raises(ConstraintError):
        Capillarity(d, theta=lambda x: 0.0, phi=lambda x, z: 0.0)
    with pytest.raises(ConstraintError):
        Capillarity(d, theta=lambda x: 1.0, phi=lambda x, z: 0.0)


def test_custom_boundary_op_obliqueness_check():
    d = Disk(1.0)
    ok = CustomBoundaryOp(d, g=lambda x, z, p: float(p @ d.normal(x)) - 1.0,
                          gp=lambda x, z, p: d.normal(x))
    assert ok.beta0 > 0.9
    with pytest.raises(ConstraintError):
        CustomBoundaryOp(d, g=lambda x, z, p: float(p @ d.tangent(
            d.nearest_boundary_param(x))),
            gp=lambda x, z, p: d.tangent(d.nearest_boundary_param(x)))


# ----------------------------------------------------------------------------
# convexity certifier


def run_convexity(phi_value, cone=GammaK(2), A=None, seed=5):
    d = Disk(1.0)
    A = A if A is not None else EuclideanYamabeA(2)
    g = Neumann(d, phi=lambda x, z: phi_value)
    rng = np.random.default_rng(seed)
    return certify_convexity(d, A, g, cone, (-1.0, 1.0), rng=rng,
                             boundary_count=48, z_count=4)


def test_yamabe_neumann_phi_one_passes():
    rep = run_convexity(1.0)
    assert rep.verdict
    assert np.isfinite(rep.mu0)
    assert rep.margin_at_mu0 > 0
    assert rep.tangential_agreement


def test_yamabe_neumann_phi_minus_two_fails():
    rep = run_convexity(-2.0)
    assert not rep.verdict
    assert any(not s.feasible for s in rep.samples)
    assert rep.tangential_agreement


def test_zero_a_positive_cone_needs_positive_mu():
    rep = run_convexity(1.0, cone=PositiveCone(), A=ZeroA(2))
    assert rep.verdict
    assert rep.mu0 > 0


def test_gamma1_always_feasible():
    rep = run_convexity(-2.0, cone=GammaK(1))
    # K + mu nu nu has trace c + mu > 0 for large mu, so Gamma_1 passes
    assert rep.verdict
    assert rep.tangential_agreement


def test_tangential_agreement_on_every_sample():
    for phi in (-2.0, -0.5, 1.0):
        rep = run_convexity(phi)
        for s in rep.samples:
            assert s.feasible == s.tangential_in_lower_cone


# ----------------------------------------------------------------------------
# barrier


def test_barrier_values():
    d = Disk(1.0)
    x_b = d.boundary_point(0.0)
    assert barrier_value(d, 1.0, 1.0, x_b) == pytest.approx(0.0)
    x = x_b * 0.75      # distance 1/4
    assert barrier_value(d, 1.0, 1.0, x) == pytest.approx(3.0 / 16.0)


def test_barrier_proviso():
    d = Disk(1.0)
    with pytest.raises(ArgumentError):
        barrier_value(d, 1.0, 1.0, np.zeros(2))      # t*d = 1 > 1/4
    with pytest.raises(ArgumentError):
        barrier_value(d, 1.0, 1.0, [1.5, 0.0])       # outside the domain


def test_barrier_monotone_in_distance():
    d = Disk(1.0)
    t = 1.0
    ds = np.linspace(0.0, 0.25, 20)
    vals = [barrier_value(d, 2.0, t, np.array([1.0 - s, 0.0])) for s in ds]
    assert all(b > a for a, b in zip(vals, vals[1:]))
