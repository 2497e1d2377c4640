import numpy as np
import pytest

from aughess.cones import (ConeSampler, GammaK, PkCone, PositiveCone,
                           Regularized, cone_margin, margin_batch)
from aughess.errors import ArgumentError


def test_gamma_k_margin_examples():
    assert cone_margin(np.diag([1.0, 1.0]), GammaK(2)) == pytest.approx(1.0)
    assert cone_margin(np.diag([-1.0, 3.0]), GammaK(2)) == pytest.approx(-3.0)
    assert cone_margin(np.diag([-1.0, 2.0, 2.0]), PkCone(2)) == pytest.approx(1.0)


def test_positive_cone_margin_is_min_eigenvalue():
    r = np.diag([0.3, 2.0, 5.0])
    assert cone_margin(r, PositiveCone()) == pytest.approx(0.3)


def test_gamma_n_matches_positive_cone_signs():
    rng = np.random.default_rng(1)
    for n in (2, 3):
        a = rng.standard_normal((1000, n, n))
        r = 0.5 * (a + np.swapaxes(a, -1, -2))
        mg = margin_batch(r, GammaK(n))
        mp = margin_batch(r, PositiveCone())
        assert np.all(np.sign(mg) == np.sign(mp))


def test_regularized_zero_eps_matches_base():
    rng = np.random.default_rng(2)
    a = rng.standard_normal((200, 3, 3))
    r = 0.5 * (a + np.swapaxes(a, -1, -2))
    base = GammaK(2)
    assert np.allclose(margin_batch(r, Regularized(base, 0.0)),
                       margin_batch(r, base))


def test_regularized_shifts_before_membership():
    r = np.diag([-0.1, 1.0])
    base = PositiveCone()
    assert cone_margin(r, base) < 0
    # r + eps * trace * I = diag(-0.1 + 0.9 eps, 1 + 0.9 eps)
    assert cone_margin(r, Regularized(base, 0.2)) == pytest.approx(-0.1 + 0.18)


def test_regularized_rejects_negative_eps():
    with pytest.raises(ArgumentError):
        Regularized(PositiveCone(), -0.1)


def test_margin_is_zero_on_boundary():
    # S_2 = 0 exactly on the Gamma_2 boundary
    r = np.diag([0.0, 1.0, 2.0])
    m = cone_margin(r, GammaK(3))
    assert m == pytest.approx(0.0)


@pytest.mark.parametrize("cone,n", [
    (GammaK(2), 3), (GammaK(2), 2), (PkCone(2), 3),
    (PositiveCone(), 2), (Regularized(GammaK(2), 0.05), 3),
])
def test_sampler_respects_floor(cone, n):
    rng = np.random.default_rng(3)
    s = ConeSampler(cone, n, rng, margin_floor=1e-6)
    batch = s.draw(100)
    assert batch.shape == (100, n, n)
    assert np.allclose(batch, np.swapaxes(batch, -1, -2))
    assert margin_batch(batch, cone).min() >= 1e-6


def test_sampler_rejects_incompatible_cone():
    with pytest.raises(ArgumentError):
        ConeSampler(GammaK(4), 3, np.random.default_rng(0))
