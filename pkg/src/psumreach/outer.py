"""Outer ellipsoids of p-sums: the beta family, both optimality criteria,
and pairwise folding to n-ary sums.

For a pair of centered ellipsoids E(0,Q1), E(0,Q2) and p in [1,inf) \\ {2},
every beta > 0 gives a valid outer shape

    Q(beta) = (1 + 1/beta)^{1/p} Q1 + (1 + beta)^{1/p} Q2.

The minimum-trace choice is closed-form; the minimum-volume choice is the
unique positive root of the stationarity condition of log det Q(beta), found
by a cone-preserving fixed-point iteration on the eigenvalues of Q1^{-1} Q2.
p = 2 needs no approximation (the 2-sum is exactly E(0, Q1+Q2)); p = inf is
bounded conservatively by the same matrix via the inclusion chain.
"""

import enum
import math
from dataclasses import dataclass

import numpy as np

from .errors import (
    DimensionMismatch,
    InvalidBeta,
    InvalidP,
    NoConvergence,
    NotPositiveDefinite,
)
from .geometry import PSumSet
from .linalg import gen_eigenvalues, symmetrize


class Criterion(enum.Enum):
    MIN_TRACE = "trace"
    MIN_VOLUME = "volume"


@dataclass
class FixedPointConfig:
    tolerance: float = 1e-5
    max_iterations: int = 200
    beta0: float = 1.0
    relative: bool = False  # compare |db| against tolerance * |beta| instead

    def __post_init__(self):
        if self.tolerance <= 0:
            raise InvalidBeta("tolerance must be positive")
        if self.max_iterations < 1:
            raise InvalidBeta("max_iterations must be >= 1")
        if self.beta0 <= 0:
            raise InvalidBeta("beta0 must be positive")


@dataclass
class OuterResult:
    """One outer ellipsoid: shape matrix plus how it was obtained.

    mode is "optimal" for the parameterized optimum, "exact" for p=2,
    "conservative-bound" for p=inf. For folds, iterations accumulates over
    the pairwise stages and provenance records the fold order.
    """

    shape: np.ndarray
    criterion: Criterion
    beta: float = None
    iterations: int = 0
    foc_residual: float = None
    mode: str = "optimal"
    center: np.ndarray = None
    provenance: str = "pair"
    warnings: tuple = ()


def _check_p_finite(p):
    p = float(p)
    if math.isinf(p) or p < 1.0 or p == 2.0:
        raise InvalidP(f"p must lie in [1, inf) excluding 2, got {p}")
    return p


def _check_beta(beta):
    beta = float(beta)
    if not (beta > 0.0) or math.isinf(beta) or math.isnan(beta):
        raise InvalidBeta(f"beta must be a positive real, got {beta}")
    return beta


def q_beta(Q1, Q2, p, beta):
    """Outer shape (1 + 1/beta)^{1/p} Q1 + (1 + beta)^{1/p} Q2."""
    p = _check_p_finite(p)
    beta = _check_beta(beta)
    Q1 = symmetrize(Q1)
    Q2 = symmetrize(Q2)
    if Q1.shape != Q2.shape:
        raise DimensionMismatch(f"shape mismatch: {Q1.shape} vs {Q2.shape}")
    return (1.0 + 1.0 / beta) ** (1.0 / p) * Q1 + (1.0 + beta) ** (1.0 / p) * Q2


def beta_trace_opt(Q1, Q2, p):
    """Minimum-trace beta: (trace Q1 / trace Q2)^{p/(1+p)}."""
    p = _check_p_finite(p)
    t1 = float(np.trace(symmetrize(Q1)))
    t2 = float(np.trace(symmetrize(Q2)))
    return (t1 / t2) ** (p / (1.0 + p))


def foc_residual(lambdas, p, beta):
    """Stationarity of log det Q(beta): sum_i (1 - beta^{1+1/p} lam_i) / (1 + beta^{1/p} lam_i).

    Strictly decreasing in beta; its unique positive root is the
    minimum-volume beta.
    """
    p = _check_p_finite(p)
    beta = _check_beta(beta)
    lam = np.asarray(lambdas, dtype=float)
    if np.any(lam <= 0):
        raise InvalidP("eigenvalue ratios must be positive")
    z = beta ** (1.0 / p)
    return float(np.sum((1.0 - beta * z * lam) / (1.0 + z * lam)))


def fixed_point_step(lambdas, p, beta):
    """One application of the minimum-volume fixed-point map

    g(beta) = ( sum 1/(1 + beta^{1/p} lam_i) / sum lam_i/(1 + beta^{1/p} lam_i) )^{p/(p+1)}

    whose fixed point solves foc_residual = 0.
    """
    p = _check_p_finite(p)
    beta = _check_beta(beta)
    lam = np.asarray(lambdas, dtype=float)
    if np.any(lam <= 0):
        raise InvalidP("eigenvalue ratios must be positive")
    z = beta ** (1.0 / p)
    den = 1.0 + z * lam
    ratio = np.sum(1.0 / den) / np.sum(lam / den)
    return float(ratio ** (p / (p + 1.0)))


# exit when successive iterates agree to cfg.tolerance AND the stationarity
# residual is below this fraction of it (0.1 * 1e-5 = 1e-6 at defaults)
FOC_EXIT_FACTOR = 0.1


def _sums_at(lam, z):
    """(sum 1/(1+z*lam_i), sum lam_i/(1+z*lam_i)); plain loop beats numpy
    dispatch overhead at the d <= 5 sizes this library lives at."""
    s0 = 0.0
    s1 = 0.0
    for l in lam:
        inv = 1.0 / (1.0 + z * l)
        s0 += inv
        s1 += l * inv
    return s0, s1


def _volume_beta(lam, p, cfg):
    """Validation-free fixed-point loop over positive eigenvalue ratios.

    The residual at beta is s0 - beta * z * s1, reusing the sums that drive
    the next step, so each iterate costs one pass over lam.
    """
    ip = 1.0 / p
    expo = p / (p + 1.0)
    foc_tol = FOC_EXIT_FACTOR * cfg.tolerance
    beta = float(cfg.beta0)
    s0, s1 = _sums_at(lam, beta ** ip)
    res = math.inf
    for n in range(1, cfg.max_iterations + 1):
        beta_next = (s0 / s1) ** expo
        z = beta_next ** ip
        s0, s1 = _sums_at(lam, z)
        res = s0 - beta_next * z * s1
        step_tol = cfg.tolerance * (beta_next if cfg.relative else 1.0)
        if abs(beta_next - beta) < step_tol and abs(res) <= foc_tol:
            return beta_next, n, res
        beta = beta_next
    raise NoConvergence(
        f"fixed point did not converge in {cfg.max_iterations} iterations "
        f"(last beta {beta:.6g}, residual {res:.3e})",
        last_beta=beta,
        residual=res,
    )


def beta_volume_opt(Q1, Q2, p, cfg=None):
    """Minimum-volume beta by fixed-point iteration.

    Returns (beta, iterations, residual). Iterates until successive betas
    differ by less than cfg.tolerance and the first-order residual is below
    FOC_EXIT_FACTOR * tolerance; raises NoConvergence when max_iterations
    is exhausted first.
    """
    cfg = cfg or FixedPointConfig()
    p = _check_p_finite(p)
    lam = gen_eigenvalues(Q1, Q2)
    return _volume_beta(lam.tolist(), p, cfg)


def _eig_ratios(Q1, Q2):
    """Eigenvalues of Q1^{-1} Q2 for already-symmetric operands, as a list."""
    try:
        L = np.linalg.cholesky(Q1)
    except np.linalg.LinAlgError as exc:
        raise NotPositiveDefinite(f"Cholesky failed: {exc}") from exc
    W = np.linalg.solve(L, Q2)
    W = np.linalg.solve(L, W.T)
    lam = np.linalg.eigvalsh(0.5 * (W + W.T))
    if lam[0] <= 0.0:
        raise NotPositiveDefinite("second operand is not positive definite")
    return lam.tolist()


def _pair_shape(Q1, Q2, p, criterion, cfg):
    """Optimal-branch pair fold for symmetric operands and finite p != 2.

    Returns (shape, beta, iterations, residual, warnings)."""
    lam = _eig_ratios(Q1, Q2)
    warns = ()
    if lam[-1] / lam[0] > 1e12:
        warns = ("eigenvalue spread of the pair exceeds 1e12; result may be ill-conditioned",)
    if criterion is Criterion.MIN_TRACE:
        beta = (float(np.trace(Q1)) / float(np.trace(Q2))) ** (p / (1.0 + p))
        iters, res = 0, None
    else:
        beta, iters, res = _volume_beta(lam, p, cfg)
    shape = (1.0 + 1.0 / beta) ** (1.0 / p) * Q1 + (1.0 + beta) ** (1.0 / p) * Q2
    return shape, beta, iters, res, warns


def pair_outer(Q1, Q2, p, criterion=Criterion.MIN_VOLUME, cfg=None):
    """Outer ellipsoid shape for E(0,Q1) +_p E(0,Q2).

    p = 2 returns Q1 + Q2 exactly; p = inf returns Q1 + Q2 as a conservative
    bound (the inf-sum is inside the 2-sum). Otherwise the shape is Q(beta*)
    at the requested criterion's optimum.
    """
    cfg = cfg or FixedPointConfig()
    Q1 = symmetrize(Q1)
    Q2 = symmetrize(Q2)
    if Q1.shape != Q2.shape:
        raise DimensionMismatch(f"shape mismatch: {Q1.shape} vs {Q2.shape}")
    p = float(p)
    if p == 2.0:
        return OuterResult(shape=Q1 + Q2, criterion=criterion, mode="exact")
    if math.isinf(p):
        return OuterResult(shape=Q1 + Q2, criterion=criterion, mode="conservative-bound")
    if p < 1.0:
        raise InvalidP(f"p must lie in [1, inf], got {p}")
    shape, beta, iters, res, warns = _pair_shape(Q1, Q2, p, criterion, cfg)
    return OuterResult(
        shape=shape,
        criterion=criterion,
        beta=beta,
        iterations=iters,
        foc_residual=res,
        warnings=warns,
    )


class _FoldTotals:
    """Running bookkeeping across pairwise fold stages."""

    def __init__(self):
        self.iterations = 0
        self.beta = None
        self.residual = None
        self.mode = None
        self.warnings = ()


def _fold_shapes(shapes, p, criterion, cfg):
    """Sequential left-to-right pairwise fold of pre-symmetrized shapes."""
    acc = shapes[0]
    tot = _FoldTotals()
    p = float(p)
    exact = p == 2.0
    conservative = math.isinf(p)
    if not (exact or conservative) and p < 1.0:
        raise InvalidP(f"p must lie in [1, inf], got {p}")
    for Q in shapes[1:]:
        if acc.shape != Q.shape:
            raise DimensionMismatch(f"shape mismatch: {acc.shape} vs {Q.shape}")
        if exact or conservative:
            acc = acc + Q
            tot.mode = "exact" if exact else "conservative-bound"
            continue
        acc, beta, iters, res, warns = _pair_shape(acc, Q, p, criterion, cfg)
        tot.iterations += iters
        tot.beta = beta
        tot.residual = res
        tot.mode = "optimal"
        tot.warnings = tot.warnings + tuple(w for w in warns if w not in tot.warnings)
    return acc, tot


def fold_psum_outer(S, criterion=Criterion.MIN_VOLUME, cfg=None):
    """Outer ellipsoid of a PSumSet by left-to-right pairwise folding."""
    cfg = cfg or FixedPointConfig()
    if len(S.shapes) == 1:
        return OuterResult(
            shape=S.shapes[0],
            criterion=criterion,
            mode="exact",
            center=S.translation.copy(),
            provenance="single",
        )
    # PSumSet shapes are symmetrized at construction
    acc, tot = _fold_shapes(S.shapes, S.p, criterion, cfg)
    return OuterResult(
        shape=acc,
        criterion=criterion,
        beta=tot.beta,
        iterations=tot.iterations,
        foc_residual=tot.residual,
        mode=tot.mode,
        center=S.translation.copy(),
        provenance="left-to-right",
        warnings=tot.warnings,
    )


def fold_minkowski_outer(blocks, criterion=Criterion.MIN_VOLUME, cfg=None):
    """Outer ellipsoid of a Minkowski sum of (shape, center) blocks (p = 1 fold).

    The result's center is the sum of the block centers.
    """
    cfg = cfg or FixedPointConfig()
    if len(blocks) == 0:
        raise DimensionMismatch("need at least one block")
    shapes = [symmetrize(Q) for Q, _ in blocks]
    center = np.sum([np.asarray(c, dtype=float) for _, c in blocks], axis=0)
    if len(shapes) == 1:
        return OuterResult(
            shape=shapes[0],
            criterion=criterion,
            mode="exact",
            center=center,
            provenance="single",
        )
    acc, tot = _fold_shapes(shapes, 1.0, criterion, cfg)
    return OuterResult(
        shape=acc,
        criterion=criterion,
        beta=tot.beta,
        iterations=tot.iterations,
        foc_residual=tot.residual,
        mode=tot.mode,
        center=center,
        provenance="left-to-right",
        warnings=tot.warnings,
    )
