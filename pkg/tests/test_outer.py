import math

import numpy as np
import pytest

from psumreach import (
    Criterion,
    DimensionMismatch,
    FixedPointConfig,
    InvalidBeta,
    InvalidP,
    NoConvergence,
    PSumSet,
    beta_trace_opt,
    beta_volume_opt,
    fixed_point_step,
    foc_residual,
    fold_minkowski_outer,
    fold_psum_outer,
    pair_outer,
    q_beta,
    spd_det,
    support_psum,
)
from conftest import random_spd

LAM_FIG = [5.0, 0.6, 3.0]


def test_q_beta_symmetric_pair():
    Q = q_beta(np.eye(2), np.eye(2), 3.0, 1.0)
    assert np.allclose(Q, 2.0 * 2.0 ** (1.0 / 3.0) * np.eye(2))


def test_q_beta_validation():
    with pytest.raises(InvalidBeta):
        q_beta(np.eye(2), np.eye(2), 3.0, 0.0)
    with pytest.raises(InvalidBeta):
        q_beta(np.eye(2), np.eye(2), 3.0, -1.0)
    with pytest.raises(InvalidP):
        q_beta(np.eye(2), np.eye(2), 2.0, 1.0)
    with pytest.raises(InvalidP):
        q_beta(np.eye(2), np.eye(2), np.inf, 1.0)
    with pytest.raises(DimensionMismatch):
        q_beta(np.eye(2), np.eye(3), 3.0, 1.0)


def test_beta_trace_values():
    Q1 = 2.0 * np.eye(2)  # trace 4
    Q2 = 0.5 * np.eye(2)  # trace 1
    assert beta_trace_opt(Q1, Q2, 1.0) == pytest.approx(2.0)
    # p=1 optimum trace collapses to (sqrt(tr1) + sqrt(tr2))^2
    Q = q_beta(Q1, Q2, 1.0, 2.0)
    assert np.trace(Q) == pytest.approx(9.0)
    assert beta_trace_opt(Q1, Q2, 3.0) == pytest.approx(4.0 ** 0.75)


def test_beta_trace_minimizes_over_family(rng):
    Q1 = random_spd(rng, 3)
    Q2 = random_spd(rng, 3)
    for p in (1.0, 1.5, 3.0, 10.0):
        b = beta_trace_opt(Q1, Q2, p)
        t_opt = np.trace(q_beta(Q1, Q2, p, b))
        for mult in (0.5, 0.9, 1.1, 2.0):
            assert t_opt <= np.trace(q_beta(Q1, Q2, p, b * mult)) + 1e-12


def test_foc_residual_values():
    assert foc_residual([1.0, 1.0, 1.0], 3.0, 1.0) == pytest.approx(0.0)
    # single unit eigenvalue at p=1: residual tends to +1 as beta -> 0+
    assert foc_residual([1.0], 1.0, 1e-8) == pytest.approx(1.0, abs=1e-6)


def test_foc_unique_sign_change(rng):
    for _ in range(10):
        lam = np.exp(rng.uniform(-2, 2, size=rng.integers(1, 6)))
        p = rng.choice([1.0, 1.5, 2.5, 10.0])
        grid = np.logspace(-6, 6, 1000)
        vals = np.array([foc_residual(lam, p, b) for b in grid])
        signs = np.sign(vals)
        flips = np.sum(signs[:-1] != signs[1:])
        assert flips == 1
        assert signs[0] > 0 and signs[-1] < 0  # decreasing through the root


def test_fixed_point_single_eigenvalue():
    for c in (0.3, 1.0, 4.0):
        for p in (1.0, 1.5, 10.0):
            expect = (1.0 / c) ** (p / (p + 1.0))
            assert fixed_point_step([c], p, 0.9) == pytest.approx(expect)
            assert fixed_point_step([c], p, 3.0) == pytest.approx(expect)


def test_beta_volume_opt_fig_instance():
    Q1 = np.eye(3)
    Q2 = np.diag(LAM_FIG)
    beta, iters, res = beta_volume_opt(Q1, Q2, 1.0)
    assert beta == pytest.approx(0.70728519, abs=2e-6)
    assert abs(res) <= 1e-6
    assert iters >= 1
    # converged point is a fixed point of the map (to well within 10x tol)
    assert abs(fixed_point_step(LAM_FIG, 1.0, beta) - beta) <= 1e-4


def test_beta_volume_opt_no_convergence():
    with pytest.raises(NoConvergence) as ei:
        beta_volume_opt(np.eye(2), np.diag([50.0, 3.0]), 1.0,
                        FixedPointConfig(tolerance=1e-12, max_iterations=2))
    assert ei.value.last_beta is not None
    assert ei.value.residual is not None


def test_config_validation():
    with pytest.raises(InvalidBeta):
        FixedPointConfig(tolerance=0.0)
    with pytest.raises(InvalidBeta):
        FixedPointConfig(max_iterations=0)
    with pytest.raises(InvalidBeta):
        FixedPointConfig(beta0=-1.0)


def test_relative_tolerance_mode(rng):
    Q1 = random_spd(rng, 2)
    Q2 = random_spd(rng, 2)
    b_abs, _, _ = beta_volume_opt(Q1, Q2, 1.5, FixedPointConfig(tolerance=1e-8))
    b_rel, _, _ = beta_volume_opt(Q1, Q2, 1.5,
                                  FixedPointConfig(tolerance=1e-8, relative=True))
    assert b_rel == pytest.approx(b_abs, rel=1e-6)


def test_pair_outer_exact_and_bound_modes(rng):
    Q1 = random_spd(rng, 3)
    Q2 = random_spd(rng, 3)
    r2 = pair_outer(Q1, Q2, 2.0)
    assert r2.mode == "exact"
    assert np.allclose(r2.shape, Q1 + Q2, atol=1e-10, rtol=1e-10)
    rinf = pair_outer(Q1, Q2, np.inf)
    assert rinf.mode == "conservative-bound"
    assert np.allclose(rinf.shape, Q1 + Q2)


def test_pair_outer_trace_permutation(rng):
    Q1 = random_spd(rng, 3)
    Q2 = random_spd(rng, 3)
    for p in (1.0, 1.5, 10.0):
        a = pair_outer(Q1, Q2, p, Criterion.MIN_TRACE)
        b = pair_outer(Q2, Q1, p, Criterion.MIN_TRACE)
        assert b.beta == pytest.approx(1.0 / a.beta, rel=1e-12)
        assert np.allclose(a.shape, b.shape, rtol=1e-12, atol=1e-12)


def test_pair_outer_scale_equivariance(rng):
    Q1 = random_spd(rng, 2)
    Q2 = random_spd(rng, 2)
    for crit in (Criterion.MIN_TRACE, Criterion.MIN_VOLUME):
        base = pair_outer(Q1, Q2, 1.5, crit)
        for c in (0.1, 7.0):
            scaled = pair_outer(c * Q1, c * Q2, 1.5, crit)
            assert scaled.beta == pytest.approx(base.beta, rel=1e-9)
            assert np.allclose(scaled.shape, c * base.shape, rtol=1e-9)


def test_volume_beta_beats_trace_beta_on_volume(rng):
    for _ in range(10):
        d = int(rng.integers(2, 5))
        Q1 = random_spd(rng, d)
        Q2 = random_spd(rng, d)
        p = float(rng.choice([1.0, 1.5, 2.5, 10.0]))
        rv = pair_outer(Q1, Q2, p, Criterion.MIN_VOLUME)
        rt = pair_outer(Q1, Q2, p, Criterion.MIN_TRACE)
        assert spd_det(rv.shape) <= spd_det(rt.shape) * (1.0 + 1e-9)


def test_pair_outer_contains_psum(rng):
    # spot containment; the acceptance suite runs the full 500-instance sweep
    for _ in range(20):
        d = int(rng.integers(2, 4))
        Q1 = random_spd(rng, d)
        Q2 = random_spd(rng, d)
        p = float(rng.choice([1.0, 1.5, 2.5, 3.0, 10.0]))
        S = PSumSet(p=p, translation=np.zeros(d), shapes=[Q1, Q2])
        for crit in (Criterion.MIN_TRACE, Criterion.MIN_VOLUME):
            Q = pair_outer(Q1, Q2, p, crit).shape
            for _ in range(50):
                y = rng.standard_normal(d)
                y /= np.linalg.norm(y)
                assert math.sqrt(y @ Q @ y) >= support_psum(S, y) - 1e-9


def test_conditioning_warning():
    r = pair_outer(np.eye(2), np.diag([1e13, 1.0]), 1.0, Criterion.MIN_TRACE)
    assert len(r.warnings) == 1
    ok = pair_outer(np.eye(2), np.diag([2.0, 1.0]), 1.0, Criterion.MIN_VOLUME)
    assert ok.warnings == ()


def test_fold_single_shape_is_exact():
    S = PSumSet(p=1.5, translation=[1.0, -1.0], shapes=[np.diag([4.0, 1.0])])
    r = fold_psum_outer(S)
    assert r.mode == "exact"
    assert r.provenance == "single"
    assert np.allclose(r.shape, np.diag([4.0, 1.0]))
    assert np.allclose(r.center, [1.0, -1.0])


def test_fold_accumulates_iterations(rng):
    shapes = [random_spd(rng, 2) for _ in range(4)]
    S = PSumSet(p=1.5, translation=np.zeros(2), shapes=shapes)
    r = fold_psum_outer(S, Criterion.MIN_VOLUME)
    assert r.provenance == "left-to-right"
    assert r.iterations >= 3  # at least one iteration per pairwise stage


def test_fold_minkowski_reach_step_volume():
    # three summands of a 2-step reach set; published volume 14.6765
    F = np.array([[1.0, 0.3], [0.0, 1.0]])
    G = np.array([[0.3, 0.045], [0.0, 0.3]])
    U2 = (1.0 + math.cos(2.0) ** 2) * np.diag([10.0, 0.1])
    blocks = [
        (F @ F @ F.T @ F.T, np.zeros(2)),
        (F @ G @ U2 @ G.T @ F.T, np.zeros(2)),
        (G @ U2 @ G.T, np.zeros(2)),
    ]
    r = fold_minkowski_outer(blocks, Criterion.MIN_VOLUME)
    vol = math.pi * math.sqrt(spd_det(r.shape))
    assert vol == pytest.approx(14.6765, rel=1e-3)
    assert np.allclose(r.center, np.zeros(2))


def test_fold_minkowski_validation():
    with pytest.raises(DimensionMismatch):
        fold_minkowski_outer([])


def test_second_derivative_positive_at_optimum(rng):
    # log det Q(beta) is locally strictly convex at the returned stationary point
    h = 1e-4
    for _ in range(20):
        d = int(rng.integers(2, 5))
        Q1 = random_spd(rng, d)
        Q2 = random_spd(rng, d)
        p = float(rng.choice([1.0, 1.5, 2.5, 3.0, 10.0]))
        beta, _, _ = beta_volume_opt(Q1, Q2, p)

        def f(b):
            return math.log(spd_det(q_beta(Q1, Q2, p, b)))

        second = (f(beta + h) - 2.0 * f(beta) + f(beta - h)) / h ** 2
        assert second > 0.0
