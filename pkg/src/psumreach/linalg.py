"""Dense SPD matrix kernels.

Everything here operates on small (d <= ~50) symmetric positive definite
matrices represented as plain numpy arrays. Inputs are symmetrized on entry;
asymmetry beyond SYM_RTOL relative is rejected, below it silently averaged
away (products like F Q F^T accumulate harmless asymmetry).
"""

import numpy as np
import scipy.linalg

from .errors import DimensionMismatch, NotPositiveDefinite

# module tolerances, overridable by callers that need looser/tighter checks
SYM_RTOL = 1e-8
EIG_FLOOR = 0.0  # eigenvalues must be strictly above this to count as SPD


def symmetrize(M, rtol=SYM_RTOL):
    """Return (M + M^T)/2, rejecting matrices that are materially asymmetric."""
    M = np.asarray(M, dtype=float)
    if M.ndim != 2 or M.shape[0] != M.shape[1]:
        raise DimensionMismatch(f"expected a square matrix, got shape {M.shape}")
    if not np.all(np.isfinite(M)):
        raise NotPositiveDefinite("matrix has non-finite entries")
    scale = np.linalg.norm(M)
    asym = np.linalg.norm(M - M.T)
    if scale > 0 and asym > rtol * scale:
        raise NotPositiveDefinite(
            f"matrix is asymmetric beyond tolerance: ||M-M^T||/||M|| = {asym/scale:.3e}"
        )
    return 0.5 * (M + M.T)


def cholesky(M):
    """Lower-triangular L with M = L L^T."""
    S = symmetrize(M)
    try:
        return np.linalg.cholesky(S)
    except np.linalg.LinAlgError as exc:
        raise NotPositiveDefinite(f"Cholesky failed: {exc}") from exc


def spd_det(M):
    """Determinant via the Cholesky diagonal (positive by construction)."""
    L = cholesky(M)
    return float(np.prod(np.diag(L)) ** 2)


def spd_inverse(M):
    """Inverse of an SPD matrix, returned symmetric."""
    L = cholesky(M)
    ident = np.eye(L.shape[0])
    Linv = scipy.linalg.solve_triangular(L, ident, lower=True)
    return symmetrize(Linv.T @ Linv, rtol=1.0)


def gen_eigenvalues(Q1, Q2):
    """Eigenvalues of Q1^{-1} Q2, ascending.

    Computed as the (real, positive) spectrum of the congruent symmetric
    matrix L^{-1} Q2 L^{-T} where Q1 = L L^T.
    """
    Q1 = np.asarray(Q1, dtype=float)
    Q2 = np.asarray(Q2, dtype=float)
    if Q1.shape != Q2.shape:
        raise DimensionMismatch(f"shape mismatch: {Q1.shape} vs {Q2.shape}")
    L = cholesky(Q1)
    S2 = symmetrize(Q2)
    W = scipy.linalg.solve_triangular(L, S2, lower=True)
    W = scipy.linalg.solve_triangular(L, W.T, lower=True)
    lam = np.linalg.eigvalsh(0.5 * (W + W.T))
    if np.any(lam <= EIG_FLOOR):
        raise NotPositiveDefinite("second operand is not positive definite")
    return np.sort(lam)


def spd_sqrt(M):
    """Principal square root via symmetric eigendecomposition."""
    S = symmetrize(M)
    w, V = np.linalg.eigh(S)
    if np.any(w <= EIG_FLOOR):
        raise NotPositiveDefinite("matrix is not positive definite")
    R = (V * np.sqrt(w)) @ V.T
    return 0.5 * (R + R.T)


def spectral_norm(M):
    """Largest |eigenvalue| of a symmetric matrix."""
    # loose asymmetry gate: differences of symmetric matrices can have tiny
    # norm, making a strict relative test meaningless
    S = symmetrize(np.asarray(M, dtype=float), rtol=0.5)
    if S.size == 0:
        return 0.0
    return float(np.max(np.abs(np.linalg.eigvalsh(S))))
