import numpy as np
import pytest

from aughess.errors import ArgumentError
from aughess.grid import Field, PolarDisk, TensorSquare


def test_tensor_square_exact_on_quadratics():
    g = TensorSquare(2.0, 9, 11)
    for f, hess in [
        (lambda x: 0.5 * (x @ x), np.eye(2)),
        (lambda x: x[0] * x[1], np.array([[0.0, 1.0], [1.0, 0.0]])),
        (lambda x: x[0] ** 2 - 3 * x[1] ** 2 + x[0], np.diag([2.0, -6.0])),
    ]:
        u = g.field(f).values
        H = g.hessian(u)
        assert np.abs(H - hess).max() <= 1e-10


def test_tensor_square_gradient_exact_on_linears():
    g = TensorSquare(3.0, 8, 8)
    u = g.field(lambda x: 2.0 * x[0] - 0.5 * x[1] + 1.0).values
    grad = g.gradient(u)
    assert np.abs(grad - np.array([2.0, -0.5])).max() <= 1e-12


def test_tensor_square_boundary_normals():
    g = TensorSquare(2.0, 5, 5)
    for row, b in enumerate(g.boundary_idx):
        nu = g.boundary_normals[row]
        assert np.linalg.norm(nu) == pytest.approx(1.0)
        # inner normal points into the square
        inside = g.nodes[b] + 1e-6 * nu
        assert np.abs(inside).max() < 1.0 + 1e-9


def test_polar_disk_layout():
    g = PolarDisk(1.0, 17, 32)
    assert g.node_count == 17 * 32
    assert g.r.min() == pytest.approx(g.h_r / 2)     # no node at the origin
    assert g.r.max() == pytest.approx(1.0)           # boundary ring on r = R
    assert len(g.boundary_idx) == 32
    nu = g.boundary_normals
    assert np.allclose(np.linalg.norm(nu, axis=1), 1.0)
    assert np.allclose(nu, -g.nodes[g.boundary_idx])  # unit disk: nu = -x


def test_polar_disk_rejects_odd_ntheta():
    with pytest.raises(ArgumentError):
        PolarDisk(1.0, 9, 31)


def test_polar_disk_exact_on_radial_quadratics():
    g = PolarDisk(1.5, 17, 32)
    u = g.field(lambda x: 0.5 * (x @ x)).values
    H = g.hessian(u)
    assert np.abs(H - np.eye(2)).max() <= 1e-10
    grad = g.gradient(u)
    assert np.abs(grad - g.nodes).max() <= 1e-10


def test_polar_disk_second_order_on_smooth_fields():
    def error(n_r, n_t):
        g = PolarDisk(1.0, n_r, n_t)
        x, y = g.nodes[:, 0], g.nodes[:, 1]
        u = np.sin(x) * np.sin(y)
        H = g.hessian(u)
        exact = np.empty_like(H)
        exact[:, 0, 0] = exact[:, 1, 1] = -np.sin(x) * np.sin(y)
        exact[:, 0, 1] = exact[:, 1, 0] = np.cos(x) * np.cos(y)
        ii = g.interior_idx
        return np.abs(H[ii] - exact[ii]).max()

    e1, e2 = error(17, 32), error(33, 64)
    assert e1 / e2 == pytest.approx(4.0, abs=0.8)


def test_polar_boundary_radial_derivative_sign():
    # inner-normal derivative of the radial coordinate field is -1 at r = R
    g = PolarDisk(1.0, 17, 32)
    r = np.linalg.norm(g.nodes, axis=1)
    grad = g.gradient(r)
    d_nu = np.einsum("ni,ni->n", grad[g.boundary_idx], g.boundary_normals)
    assert np.abs(d_nu + 1.0).max() <= 1e-10


def test_polar_antipodal_closure_adds_no_axis_error():
    # anisotropic quadratics carry a cos(2 theta) harmonic that local theta
    # stencils resolve only to O(h_t^2), uniformly in r; the across-origin
    # closure must not make the first ring any worse than the bulk
    def ring_errors(n_r, n_t):
        g = PolarDisk(1.0, n_r, n_t)
        u = g.field(lambda x: x[0] ** 2 + 3 * x[1] ** 2).values
        H = g.hessian(u)
        per_node = np.abs(H - np.diag([2.0, 6.0])).max(axis=(1, 2))
        first = per_node[:g.n_theta].max()
        bulk = per_node[g.n_theta:-g.n_theta].max()
        return first, bulk

    f1, b1 = ring_errors(17, 32)
    assert f1 <= b1 * (1.0 + 1e-9)
    f2, b2 = ring_errors(17, 64)
    assert b1 / b2 == pytest.approx(4.0, abs=0.5)   # O(h_t^2) harmonic error


def test_field_validation():
    g = TensorSquare(2.0, 5, 5)
    with pytest.raises(ArgumentError):
        Field(g, np.zeros(7))
    f = g.field(np.zeros(25))
    assert f.sup_norm() == 0.0
    g2 = f.copy()
    g2.values[0] = 1.0
    assert f.values[0] == 0.0
