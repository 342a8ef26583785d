"""Ellipsoids, Firey p-sums, and support-function calculus.

An ellipsoid E(q, Q) = {q + Q^{1/2} u : ||u|| <= 1} has support function
h(y) = <q, y> + sqrt(y^T Q y). A p-sum of centered ellipsoids combines
supports as h = (sum h_i^p)^{1/p} (max of supports at p = inf); higher p
gives a smaller set. PSumSet stores one common translation plus the centered
shape matrices so the p-th powers are always taken of nonnegative numbers.
"""

import math
from dataclasses import dataclass, field

import numpy as np

from .errors import (
    DegenerateImage,
    DimensionMismatch,
    InvalidP,
    NotPositiveDefinite,
    UnsupportedP,
)
from .linalg import cholesky, spd_det, spd_inverse, symmetrize


def _check_shape(Q):
    Q = symmetrize(Q)
    cholesky(Q)  # raises NotPositiveDefinite if not SPD
    return Q


@dataclass
class Ellipsoid:
    """Ellipsoid with center q and SPD shape matrix Q."""

    center: np.ndarray
    shape: np.ndarray

    def __post_init__(self):
        self.center = np.asarray(self.center, dtype=float).reshape(-1)
        self.shape = _check_shape(self.shape)
        if self.center.shape[0] != self.shape.shape[0]:
            raise DimensionMismatch(
                f"center length {self.center.shape[0]} vs shape dim {self.shape.shape[0]}"
            )

    @property
    def dim(self):
        return self.shape.shape[0]


@dataclass
class QuadraticForm:
    """Ellipsoid as {x : x^T A x + 2 b^T x + c <= 0} with A SPD."""

    A: np.ndarray
    b: np.ndarray
    c: float

    def __post_init__(self):
        self.A = _check_shape(self.A)
        self.b = np.asarray(self.b, dtype=float).reshape(-1)
        self.c = float(self.c)
        if self.b.shape[0] != self.A.shape[0]:
            raise DimensionMismatch("b length does not match A")
        # nonempty interior: b^T A^{-1} b - c > 0
        if self.b @ spd_inverse(self.A) @ self.b - self.c <= 0:
            raise NotPositiveDefinite("quadratic form has empty interior")


@dataclass
class PSumSet:
    """Translation c plus a p-sum of centered ellipsoids E(0, Q_i)."""

    p: float
    translation: np.ndarray
    shapes: list = field(default_factory=list)

    def __post_init__(self):
        self.p = float(self.p)
        if math.isnan(self.p) or self.p < 1.0:
            raise InvalidP(f"p must be >= 1 (inf allowed), got {self.p}")
        self.translation = np.asarray(self.translation, dtype=float).reshape(-1)
        if len(self.shapes) == 0:
            raise DimensionMismatch("p-sum needs at least one shape")
        self.shapes = [_check_shape(Q) for Q in self.shapes]
        d = self.translation.shape[0]
        for Q in self.shapes:
            if Q.shape[0] != d:
                raise DimensionMismatch("all shapes must match the translation dimension")

    @property
    def dim(self):
        return self.translation.shape[0]


@dataclass
class MinkowskiExpression:
    """Ordered 1-sum (Minkowski sum) of p-sum blocks; support is the sum of block supports."""

    blocks: list

    def __post_init__(self):
        if len(self.blocks) == 0:
            raise DimensionMismatch("Minkowski expression needs at least one block")
        d = self.blocks[0].dim
        for b in self.blocks:
            if b.dim != d:
                raise DimensionMismatch("all blocks must share a dimension")

    @property
    def dim(self):
        return self.blocks[0].dim

    def support(self, y):
        return float(sum(support_psum(b, y) for b in self.blocks))


def support_ellipsoid(E, y):
    """h(y) = <q, y> + sqrt(y^T Q y); y need not be unit."""
    y = np.asarray(y, dtype=float).reshape(-1)
    if y.shape[0] != E.dim:
        raise DimensionMismatch("direction dimension mismatch")
    return float(E.center @ y + math.sqrt(max(y @ E.shape @ y, 0.0)))


def _shape_supports(S, y):
    """sqrt(y^T Q_i y) for every shape, as an array."""
    vals = np.array([y @ Q @ y for Q in S.shapes])
    return np.sqrt(np.maximum(vals, 0.0))


def support_psum(S, y):
    """Support function of a PSumSet at direction y."""
    y = np.asarray(y, dtype=float).reshape(-1)
    if y.shape[0] != S.dim:
        raise DimensionMismatch("direction dimension mismatch")
    h = _shape_supports(S, y)
    off = float(S.translation @ y)
    if math.isinf(S.p):
        return off + float(np.max(h))
    if S.p == 1.0:
        return off + float(np.sum(h))
    # scale by the max so large p cannot overflow
    hmax = float(np.max(h))
    if hmax == 0.0:
        return off
    r = h / hmax
    return off + hmax * float(np.sum(r ** S.p)) ** (1.0 / S.p)


def support_point(S, y):
    """Boundary point of the p-sum where the supporting hyperplane has normal y.

    Gradient of the support function: for T(y) = (sum h_i^p)^{1/p},
    grad T = T^{1-p} * sum h_i^{p-2} Q_i y, then add the translation.
    """
    if math.isinf(S.p):
        raise UnsupportedP("boundary points via support gradient need finite p")
    y = np.asarray(y, dtype=float).reshape(-1)
    if y.shape[0] != S.dim:
        raise DimensionMismatch("direction dimension mismatch")
    if not np.any(y):
        raise DimensionMismatch("direction must be nonzero")
    h = _shape_supports(S, y)
    hmax = float(np.max(h))
    r = h / hmax
    T = float(np.sum(r ** S.p)) ** (1.0 / S.p)  # support / hmax
    grad = np.zeros_like(y)
    for ri, Q in zip(r, S.shapes):
        grad += ri ** (S.p - 2.0) * (Q @ y) / hmax
    grad *= T ** (1.0 - S.p)
    return S.translation + grad


def volume(E):
    """Lebesgue volume pi^{d/2}/Gamma(d/2+1) * sqrt(det Q)."""
    d = E.dim
    ball = math.pi ** (d / 2.0) / math.gamma(d / 2.0 + 1.0)
    return ball * math.sqrt(spd_det(E.shape))


def to_quadratic_form(E):
    """E(q, Q) -> (A, b, c) with A = Q^{-1}, b = -Q^{-1} q, c = q^T Q^{-1} q - 1."""
    A = spd_inverse(E.shape)
    b = -A @ E.center
    c = float(E.center @ A @ E.center) - 1.0
    return QuadraticForm(A=A, b=b, c=c)


def from_quadratic_form(F):
    """(A, b, c) -> E(q, Q) with Q = A^{-1}, q = -Q b."""
    Q = spd_inverse(F.A)
    q = -Q @ F.b
    return Ellipsoid(center=q, shape=Q)


def linear_map(A, S):
    """Image of a PSumSet under an invertible linear map (shape -> A Q A^T)."""
    A = np.asarray(A, dtype=float)
    if A.shape[1] != S.dim:
        raise DimensionMismatch("map width does not match set dimension")
    mapped = []
    for Q in S.shapes:
        img = A @ Q @ A.T
        try:
            mapped.append(_check_shape(img))
        except NotPositiveDefinite as exc:
            raise DegenerateImage(f"mapped shape is not SPD: {exc}") from exc
    return PSumSet(p=S.p, translation=A @ S.translation, shapes=mapped)
