import numpy as np
import pytest

from aughess.certify import (CertTolerances, certify_condition, band_samples,
                             norm_ladder_samples, rescale_to_level,
                             sandwich_check)
from aughess.cones import ConeSampler, PkCone, PositiveCone
from aughess.errors import ConfigError
from aughess.operators import (evaluate_batch, fk, fkl, fk_neg_alpha, log_det,
                               mk)

RNG_SEED = 11


def make(op, seed=RNG_SEED, box=(-1.0, 3.0)):
    rng = np.random.default_rng(seed)
    return ConeSampler(op.cone, op.n, rng, eig_box=box), rng


TOL = CertTolerances(samples=400)


@pytest.mark.parametrize("op", [fk(2, 2), fk(2, 3), fkl(2, 1, 2), fkl(2, 1, 3)])
@pytest.mark.parametrize("cond", ["F1", "F2", "F5"])
def test_fk_fkl_pass_core_conditions(op, cond):
    sampler, rng = make(op)
    rep = certify_condition(op, cond, sampler, TOL, rng=rng)
    assert rep.verdict, (op.label(), cond, rep.worst_violation)
    assert rep.samples == 400
    assert rep.verdict == (rep.worst_violation <= rep.tolerance)


def test_report_witnesses_are_worst_cases():
    op = fk(2, 3)
    sampler, rng = make(op)
    rep = certify_condition(op, "F1", sampler, TOL, rng=rng)
    assert len(rep.witnesses) == 3
    assert rep.witnesses[0][1] == pytest.approx(rep.worst_violation)


def test_f2_second_differences_tiny():
    op = fk(2, 3)
    sampler, rng = make(op)
    rep = certify_condition(op, "F2", sampler,
                            CertTolerances(samples=1000), rng=rng)
    assert rep.verdict
    assert rep.worst_violation <= 1e-9


def test_f3_f4_for_finite_and_infinite_a0():
    for op in (fk(2, 3), log_det(2)):
        sampler, rng = make(op, box=(0.1, 3.0) if op.family == "LogDet" else (-1.0, 3.0))
        rep3 = certify_condition(op, "F3", sampler, CertTolerances(samples=60), rng=rng)
        assert rep3.verdict, (op.label(), rep3.details)
        rep4 = certify_condition(op, "F4", sampler, CertTolerances(samples=60), rng=rng)
        assert rep4.verdict, (op.label(), rep4.details)


def test_f5_reports_delta0():
    op = fk(2, 3)
    sampler, rng = make(op)
    rep = certify_condition(op, "F5", sampler, TOL, rng=rng)
    # degree-one + concavity give T >= F(I) = sqrt(3) on the whole cone
    assert rep.details["delta0_estimate"] >= np.sqrt(3) - 1e-9


def test_f5plus_separates_fk_from_quotients():
    op = fk(2, 3)
    sampler, rng = make(op)
    assert certify_condition(op, "F5plus", sampler, TOL, rng=rng).verdict
    opq = fkl(2, 1, 3)
    sampler, rng = make(opq)
    rep = certify_condition(opq, "F5plus", sampler, TOL, rng=rng)
    assert not rep.verdict          # trace stays bounded on quotient level sets


def test_f1_strict_fails_for_degenerate_min():
    op = mk(1, 2)
    sampler, rng = make(op, box=(0.05, 3.0))
    rep = certify_condition(op, "F1", sampler, TOL, rng=rng)
    assert not rep.verdict
    assert rep.details["min_gradient_eigenvalue"] == pytest.approx(0.0, abs=1e-12)


def test_f7_estimates_positive_for_fk():
    op = fk(2, 3)
    sampler, rng = make(op)
    rep = certify_condition(op, "F7", sampler, TOL, rng=rng)
    assert rep.verdict
    assert rep.details["delta0_estimate"] > 0


def test_f7_without_negative_eigenvalues_is_config_error():
    op = log_det(2)          # positive cone: no negative eigenvalues exist
    sampler, rng = make(op, box=(0.1, 3.0))
    with pytest.raises(ConfigError):
        certify_condition(op, "F7", sampler, TOL, rng=rng)


def test_homogeneity_and_trace_bound():
    op = fk(2, 3)
    sampler, rng = make(op)
    rep = certify_condition(op, "Homogeneity", sampler, TOL, rng=rng)
    assert rep.verdict
    rep = certify_condition(op, "TraceBound", sampler, TOL, rng=rng)
    assert rep.verdict
    assert rep.details["F_at_identity"] == pytest.approx(np.sqrt(3))
    assert rep.details["min_trace"] >= np.sqrt(3) - 1e-10


def test_mk1_f6_bound_is_exact():
    # E_2 = F^2 <= max(a^2, b^2) with T = 1 for the minimum eigenvalue operator
    op = mk(1, 2)
    sampler, rng = make(op, box=(0.05, 3.0))
    tolr = CertTolerances(samples=200, band=(0.5, 2.0))
    rep = certify_condition(op, "F6", sampler, tolr, rng=rng)
    assert rep.verdict
    R = band_samples(op, sampler, 300, (0.5, 2.0), rng)
    from aughess.operators import gradient_batch
    f = evaluate_batch(op, R)
    g = gradient_batch(op, R)
    tr = np.trace(g, axis1=-2, axis2=-1)
    e2 = np.einsum("nij,nij->n", g, R @ R)
    assert np.abs(tr - 1.0).max() <= 1e-12
    assert (e2 <= max(0.5 ** 2, 2.0 ** 2) + 1e-10).all()
    assert np.abs(e2 - f ** 2).max() <= 1e-10 * (1 + f.max() ** 2)


def test_band_samples_hit_the_band():
    for op in (fk(2, 3), log_det(2)):
        sampler, rng = make(op, box=(0.1, 3.0) if op.family == "LogDet" else (-1.0, 3.0))
        R = band_samples(op, sampler, 100, (0.5, 2.0), rng)
        vals = evaluate_batch(op, R)
        assert vals.min() >= 0.5 - 1e-6
        assert vals.max() <= 2.0 + 1e-6


def test_band_below_a0_rejected():
    sampler, rng = make(fk(2, 3))
    with pytest.raises(ConfigError):
        band_samples(fk(2, 3), sampler, 10, (-1.0, 2.0), rng)


def test_norm_ladder_reaches_targets_on_level():
    op = fk(2, 3)
    sampler, rng = make(op)
    ladder = norm_ladder_samples(op, sampler, (0.5, 2.0), rng,
                                 shells=3, per_shell=16, base_norm=4.0)
    targets = [t for t, _ in ladder]
    assert targets[1] == pytest.approx(2 * targets[0])
    assert targets[2] == pytest.approx(4 * targets[0])
    for target, R in ladder:
        vals = evaluate_batch(op, R)
        norms = np.linalg.norm(R, axis=(-2, -1))
        assert np.abs(norms - target).max() <= 0.05 * target
        assert vals.min() >= 0.5 - 1e-6 and vals.max() <= 2.0 + 1e-6


def test_rescale_to_level_nonhomogeneous():
    op = log_det(2)
    sampler, rng = make(op, box=(0.1, 3.0))
    R = sampler.draw(50)
    out = rescale_to_level(op, R, np.full(50, 1.3))
    assert np.abs(evaluate_batch(op, out) - 1.3).max() <= 1e-9


# ----------------------------------------------------------------------------
# sandwich report


def test_sandwich_direction_and_limit():
    rng = np.random.default_rng(4)
    sampler = ConeSampler(PkCone(1), 2, rng, eig_box=(0.1, 3.0))
    rep = sandwich_check(1, [0.5, 1.0, 2.0, 8.0], sampler, count=150)
    assert rep.lower_holds and rep.upper_holds
    assert rep.monotone_increasing and not rep.monotone_decreasing
    assert rep.limit_max_rel_gap <= 0.05


def test_sandwich_spec_values():
    rng = np.random.default_rng(4)
    # k=1, n=2, r = diag(1,1): F = 1/2, m_1 = 1, bracket C^{-1/alpha} m = 1/2
    r = np.eye(2)[None]
    assert evaluate_batch(fk_neg_alpha(1, 1.0, 2), r)[0] == pytest.approx(0.5)
    assert evaluate_batch(mk(1, 2), r)[0] == pytest.approx(1.0)
    # k=1, n=2, r = diag(1,2)
    r = np.diag([1.0, 2.0])[None]
    assert evaluate_batch(fk_neg_alpha(1, 1.0, 2), r)[0] == pytest.approx(2.0 / 3.0)
    assert evaluate_batch(fk_neg_alpha(1, 2.0, 2), r)[0] == pytest.approx(
        1.25 ** -0.5)


def test_sandwich_requires_increasing_alphas():
    rng = np.random.default_rng(4)
    sampler = ConeSampler(PkCone(1), 2, rng, eig_box=(0.1, 3.0))
    from aughess.errors import ArgumentError
    with pytest.raises(ArgumentError):
        sandwich_check(1, [2.0, 1.0], sampler)
