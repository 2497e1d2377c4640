import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st
from hypothesis.extra.numpy import arrays

from aughess.errors import ArgumentError
from aughess.symmat import SymMat, as_symmat


def test_packing_round_trip():
    a = np.array([[1.0, 2.0, 3.0], [2.0, 5.0, -1.0], [3.0, -1.0, 0.5]])
    m = SymMat.from_matrix(a)
    assert np.array_equal(m.matrix(), a)
    assert m.entries.size == 6


def test_rejects_asymmetric():
    with pytest.raises(ArgumentError):
        SymMat.from_matrix(np.array([[1.0, 2.0], [0.0, 1.0]]))


def test_rejects_bad_dimensions():
    with pytest.raises(ArgumentError):
        SymMat.diag([1.0])          # n = 1 unsupported
    with pytest.raises(ArgumentError):
        SymMat.diag(np.ones(9))     # n = 9 unsupported
    with pytest.raises(ArgumentError):
        SymMat(np.ones(5), 3)       # wrong packed length


def test_immutable():
    m = SymMat.identity(3)
    with pytest.raises(AttributeError):
        m.n = 4
    assert not m.entries.flags.writeable


def test_eigenvalues_sorted_and_orthonormal():
    rng = np.random.default_rng(0)
    a = rng.standard_normal((4, 4))
    m = SymMat.from_matrix(a + a.T)
    w, v = m.eig()
    assert np.all(np.diff(w) >= 0)
    assert np.allclose(v.T @ v, np.eye(4), atol=1e-13)


@settings(max_examples=60, deadline=None)
@given(arrays(np.float64, (3, 3),
              elements=st.floats(-10, 10, allow_nan=False)))
def test_recomposition_invariant(a):
    m = SymMat.from_matrix(a + a.T)
    w, v = m.eig()
    recomposed = v @ np.diag(w) @ v.T
    scale = max(np.linalg.norm(m.matrix()), 1.0)
    assert np.abs(recomposed - m.matrix()).max() <= 1e-12 * scale


def test_trace_and_norm():
    m = SymMat.diag([1.0, 2.0, 3.0])
    assert m.trace() == pytest.approx(6.0)
    assert m.norm() == pytest.approx(np.sqrt(14.0))


def test_algebra_helpers():
    a = SymMat.diag([1.0, 2.0])
    b = SymMat.diag([3.0, -1.0])
    assert np.allclose(a.add(b).matrix(), np.diag([4.0, 1.0]))
    assert np.allclose(a.scale(2.0).matrix(), np.diag([2.0, 4.0]))
    assert np.allclose(a.shift_identity(1.0).matrix(), np.diag([2.0, 3.0]))


def test_as_symmat_coercion():
    m = as_symmat(np.eye(2))
    assert isinstance(m, SymMat)
    assert as_symmat(m) is m
    with pytest.raises(ArgumentError):
        as_symmat(np.eye(2), n=3)
