import numpy as np
import pytest

from psumreach import (
    DimensionMismatch,
    NotPositiveDefinite,
    cholesky,
    gen_eigenvalues,
    spd_det,
    spd_inverse,
    spd_sqrt,
    spectral_norm,
    symmetrize,
)
from conftest import random_spd


def test_cholesky_hand_factorization():
    L = cholesky(np.array([[4.0, 2.0], [2.0, 5.0]]))
    assert np.allclose(L, [[2.0, 0.0], [1.0, 2.0]])


def test_cholesky_identity():
    assert np.allclose(cholesky(np.eye(3)), np.eye(3))


def test_cholesky_rejects_indefinite():
    with pytest.raises(NotPositiveDefinite):
        cholesky(np.array([[2.0, 1.0], [1.0, -1.0]]))


def test_cholesky_reassembly(rng):
    for d in (2, 3, 5, 10):
        M = random_spd(rng, d)
        L = cholesky(M)
        assert np.linalg.norm(L @ L.T - M) <= 1e-10 * np.linalg.norm(M)
        assert np.all(np.diag(L) > 0)


def test_spd_det_values():
    assert spd_det(np.array([[4.0, 2.0], [2.0, 5.0]])) == pytest.approx(16.0, rel=1e-10)
    assert spd_det(np.eye(4)) == pytest.approx(1.0)
    assert spd_det(np.diag([20.0, 0.2])) == pytest.approx(4.0, rel=1e-10)


def test_spd_inverse_values():
    assert np.allclose(spd_inverse(np.diag([4.0, 9.0])), np.diag([0.25, 1.0 / 9.0]))
    assert np.allclose(spd_inverse(np.eye(3)), np.eye(3))
    M = np.array([[4.0, 2.0], [2.0, 5.0]])
    expect = np.array([[5.0 / 16.0, -1.0 / 8.0], [-1.0 / 8.0, 1.0 / 4.0]])
    assert np.allclose(spd_inverse(M), expect)


def test_spd_inverse_roundtrip(rng):
    for d in (2, 3, 5):
        M = random_spd(rng, d)
        assert np.linalg.norm(M @ spd_inverse(M) - np.eye(d)) <= 1e-9


def test_gen_eigenvalues_examples(rng):
    assert np.allclose(gen_eigenvalues(np.eye(2), np.diag([2.0, 3.0])), [2.0, 3.0])
    assert np.allclose(gen_eigenvalues(np.diag([4.0, 1.0]), np.diag([2.0, 3.0])), [0.5, 3.0])
    Q = random_spd(rng, 4)
    assert np.allclose(gen_eigenvalues(Q, Q), np.ones(4))


def test_gen_eigenvalues_product_is_det_ratio(rng):
    for d in (2, 3, 5):
        Q1 = random_spd(rng, d)
        Q2 = random_spd(rng, d)
        lam = gen_eigenvalues(Q1, Q2)
        assert np.all(lam > 0)
        assert np.all(np.diff(lam) >= 0)  # ascending
        ratio = spd_det(Q2) / spd_det(Q1)
        assert np.prod(lam) == pytest.approx(ratio, rel=1e-8)


def test_gen_eigenvalues_swap_reciprocal(rng):
    for d in (2, 3, 5):
        Q1 = random_spd(rng, d)
        Q2 = random_spd(rng, d)
        fwd = gen_eigenvalues(Q1, Q2)
        bwd = gen_eigenvalues(Q2, Q1)
        assert np.allclose(fwd, 1.0 / bwd[::-1], rtol=1e-8)


def test_gen_eigenvalues_errors():
    with pytest.raises(DimensionMismatch):
        gen_eigenvalues(np.eye(2), np.eye(3))
    with pytest.raises(NotPositiveDefinite):
        gen_eigenvalues(np.eye(2), np.diag([1.0, -1.0]))


def test_spd_sqrt_values():
    assert np.allclose(spd_sqrt(np.diag([4.0, 9.0])), np.diag([2.0, 3.0]))
    assert np.allclose(spd_sqrt(np.eye(3)), np.eye(3))
    assert np.allclose(spd_sqrt(np.array([[5.0, 4.0], [4.0, 5.0]])),
                       [[2.0, 1.0], [1.0, 2.0]])


def test_spd_sqrt_squares_back(rng):
    for d in (2, 3, 6):
        M = random_spd(rng, d)
        R = spd_sqrt(M)
        assert np.linalg.norm(R @ R - M) <= 1e-9 * np.linalg.norm(M)


def test_spd_sqrt_scalar_scaling(rng):
    M = random_spd(rng, 4)
    for c in (0.25, 2.0, 100.0):
        assert np.allclose(spd_sqrt(c * M), np.sqrt(c) * spd_sqrt(M), atol=1e-10, rtol=1e-10)


def test_spectral_norm_values():
    assert spectral_norm(np.diag([3.0, 4.0])) == pytest.approx(4.0)
    assert spectral_norm(np.zeros((2, 2))) == 0.0
    assert spectral_norm(np.array([[0.0, 1.0], [1.0, 0.0]])) == pytest.approx(1.0)


def test_symmetrize_gate():
    # harmless asymmetry is averaged away
    M = np.array([[1.0, 1e-10], [0.0, 1.0]])
    S = symmetrize(M)
    assert np.allclose(S, S.T)
    # material asymmetry is an error
    with pytest.raises(NotPositiveDefinite):
        symmetrize(np.array([[1.0, 0.5], [0.0, 1.0]]))
    with pytest.raises(DimensionMismatch):
        symmetrize(np.ones((2, 3)))
