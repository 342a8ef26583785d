"""Brute-force verification oracles.

Nothing here is needed to compute an outer ellipsoid; these operations
independently re-derive or certify what the fast paths claim: a dense grid
argmin for the volume-optimal beta, direction-sampled containment
certificates, and a Khachiyan minimum-volume enclosing ellipsoid over
sampled p-sum boundary points (standing in for a semidefinite baseline).
"""

import math
from dataclasses import dataclass

import numpy as np

from .errors import DegeneratePointSet, DimensionMismatch, InvalidP
from .geometry import Ellipsoid, support_point
from .metrics import SphereSampler
from .outer import foc_residual

GRID_LO = 1e-6
GRID_HI = 1e6
GRID_POINTS = 10_001


@dataclass
class ContainmentReport:
    directions_tested: int
    min_margin: float
    worst_direction: np.ndarray
    tolerance: float

    @property
    def passed(self):
        return self.min_margin >= -self.tolerance


def grid_beta_argmin(lambdas, p, grid=None):
    """Volume-optimal beta by dense grid search over log det Q(beta).

    log det Q(beta) = sum_i log((1+1/beta)^{1/p} + (1+beta)^{1/p} lam_i) up to
    a beta-independent constant. The grid argmin is refined once by bisection
    on the sign change of the first-order residual around it.
    """
    p = float(p)
    if math.isinf(p) or p < 1.0 or p == 2.0:
        raise InvalidP(f"p must lie in [1, inf) excluding 2, got {p}")
    lam = np.asarray(lambdas, dtype=float)
    if np.any(lam <= 0):
        raise InvalidP("eigenvalue ratios must be positive")
    if grid is None:
        grid = np.logspace(math.log10(GRID_LO), math.log10(GRID_HI), GRID_POINTS)
    grid = np.asarray(grid, dtype=float)
    a = (1.0 + 1.0 / grid) ** (1.0 / p)
    b = (1.0 + grid) ** (1.0 / p)
    obj = np.sum(np.log(a[:, None] + b[:, None] * lam[None, :]), axis=1)
    i = int(np.argmin(obj))
    lo = grid[max(i - 1, 0)]
    hi = grid[min(i + 1, len(grid) - 1)]
    f_lo = foc_residual(lam, p, lo)
    f_hi = foc_residual(lam, p, hi)
    if f_lo <= 0.0 or f_hi >= 0.0:
        # residual did not change sign inside the bracket (argmin at a grid
        # edge); fall back to the raw grid point
        return float(grid[i])
    for _ in range(200):
        mid = math.sqrt(lo * hi)
        if foc_residual(lam, p, mid) > 0.0:
            lo = mid
        else:
            hi = mid
        if hi - lo <= 1e-12 * hi:
            break
    return float(math.sqrt(lo * hi))


def check_containment(outer, inner_support, sampler, tol=1e-9):
    """Sampled certificate that `outer` contains the set with support
    `inner_support`: containment holds iff h_outer >= h_inner everywhere."""
    dirs = sampler.directions()
    if dirs.shape[1] != outer.dim:
        raise DimensionMismatch("sampler dimension does not match the ellipsoid")
    quad = np.einsum("ij,jk,ik->i", dirs, outer.shape, dirs)
    h_out = dirs @ outer.center + np.sqrt(np.maximum(quad, 0.0))
    h_in = np.array([inner_support(s) for s in dirs])
    margins = h_out - h_in
    i = int(np.argmin(margins))
    return ContainmentReport(
        directions_tested=len(dirs),
        min_margin=float(margins[i]),
        worst_direction=dirs[i].copy(),
        tolerance=tol,
    )


def _mvee_fixed_center(Z, tol, max_iterations):
    """Minimum-volume ellipsoid with center pinned at the origin.

    Solves max log det M subject to z' M z <= 1 (linear constraints in M) by
    log-barrier path following with damped Newton steps. The barrier duality
    gap bounds the volume ratio by exp(m/(2t)), so pushing t to m/tol
    certifies the volume within (1+tol) of optimal; first-order ascent cannot
    certify that tightly on near-degenerate boundary samples, which is why
    this path exists. Returns the shape matrix Q = M^{-1}.
    """
    m, d = Z.shape
    scale = float(np.max(np.linalg.norm(Z, axis=1)))
    if not (scale > 0.0 and math.isfinite(scale)):
        raise DegeneratePointSet("points collapse onto the center")
    Zs = Z / scale
    pairs = [(i, i) for i in range(d)]
    pairs += [(i, j) for i in range(d) for j in range(i + 1, d)]
    k = len(pairs)
    A = np.empty((m, k))
    for col, (i, j) in enumerate(pairs):
        A[:, col] = Zs[:, i] ** 2 if i == j else 2.0 * Zs[:, i] * Zs[:, j]
    basis = []
    for i, j in pairs:
        B = np.zeros((d, d))
        B[i, j] = B[j, i] = 1.0
        basis.append(B)

    def unpack(theta):
        M = np.zeros((d, d))
        for col, (i, j) in enumerate(pairs):
            M[i, j] = M[j, i] = theta[col]
        return M

    def pack_gradient(S):
        g = np.empty(k)
        for col, (i, j) in enumerate(pairs):
            g[col] = S[i, i] if i == j else 2.0 * S[i, j]
        return g

    def is_pd(M):
        try:
            np.linalg.cholesky(M)
            return True
        except np.linalg.LinAlgError:
            return False

    # phase 1: multiplicative design ascent for a warm start. It reaches
    # moderate accuracy in a few hundred sweeps but its tail stalls on
    # near-degenerate samples, so it only seeds the barrier phase.
    u = np.full(m, 1.0 / m)
    eps = math.inf
    sweeps = min(5000, max_iterations)
    for _ in range(sweeps):
        X = Zs.T @ (Zs * u[:, None])
        try:
            w = np.sum((Zs @ np.linalg.inv(X)) * Zs, axis=1)
        except np.linalg.LinAlgError as exc:
            raise DegeneratePointSet(f"degenerate design moment matrix: {exc}") from exc
        eps = float(np.max(w)) / d - 1.0
        if eps <= 1e-3:
            break
        u *= w / d
    # strictly feasible start; the extra slack keeps barrier terms finite and
    # costs at most eps/10 + 1e-12 in the volume gap accounting
    M0 = np.linalg.inv(X) / (d * (1.0 + 1.1 * eps + 1e-12))
    theta = np.array([M0[i, j] for i, j in pairs])
    if eps <= 0.5 * tol:
        return np.linalg.inv(unpack(theta) / scale**2)

    # phase 2: log-barrier path following from the matching path parameter.
    # Design duality bounds the warm start's volume gap by ~d*eps, so the
    # central point at t0 = m/(d*eps) is nearby and Newton stays damped.
    t = m / (d * max(eps, tol))
    t_final = m / tol
    total = 0
    while True:
        for _ in range(200):
            if total >= max_iterations:
                break
            total += 1
            M = unpack(theta)
            Minv = np.linalg.inv(M)
            s = 1.0 - A @ theta
            g = -t * pack_gradient(Minv) + A.T @ (1.0 / s)
            MB = [Minv @ B for B in basis]
            K = np.empty((k, k))
            for a in range(k):
                for b in range(a, k):
                    K[a, b] = K[b, a] = float(np.trace(MB[a] @ MB[b]))
            H = t * K + (A / s[:, None] ** 2).T @ A
            try:
                delta = np.linalg.solve(H, -g)
            except np.linalg.LinAlgError:
                delta = np.linalg.solve(H + 1e-12 * np.trace(H) * np.eye(k), -g)
            lam2 = float(-g @ delta)
            if lam2 <= 0.0:
                # Hessian conditioning floor; current iterate is feasible
                break
            lam = math.sqrt(lam2)
            step = 1.0 if lam <= 0.25 else 1.0 / (1.0 + lam)
            for _ in range(80):
                cand = theta + step * delta
                if np.all(A @ cand < 1.0) and is_pd(unpack(cand)):
                    break
                step *= 0.5
            else:
                break
            theta = cand
            if lam <= 1e-5:
                break
        if t >= t_final or total >= max_iterations:
            break
        t = min(t * 10.0, t_final)
    M = unpack(theta) / scale**2
    return np.linalg.inv(M)


def mvee_khachiyan(points, tol=1e-7, max_iterations=100_000, center=None):
    """Minimum-volume enclosing ellipsoid of a finite point set.

    Without `center`: Khachiyan barycentric-coordinate ascent on the lifted
    points (x, 1) with Wolfe-Atwood away steps (decrease steps on interior
    points), which converge linearly rather than sublinearly. The returned
    ellipsoid is inflated by the final maximum Mahalanobis excess so every
    input point is contained exactly, not just within (1+tol).

    With `center`: the ellipsoid is constrained to that center and computed
    by a barrier method whose duality gap certifies the volume within
    (1+tol) of the best centered ellipsoid. For centrally symmetric point
    sets the centered optimum is the true enclosing optimum, and the ascent
    path stalls on exactly those inputs, so callers that know the symmetry
    center should pass it.
    """
    P = np.asarray(points, dtype=float)
    if P.ndim != 2:
        raise DegeneratePointSet("points must be an (n, d) array")
    n, d = P.shape
    if n < d + 1:
        raise DegeneratePointSet(f"need at least {d + 1} points, got {n}")
    if np.linalg.matrix_rank(P - P.mean(axis=0), tol=1e-12) < d:
        raise DegeneratePointSet("points do not span the space")
    if center is not None:
        center = np.asarray(center, dtype=float)
        if center.shape != (d,):
            raise DimensionMismatch("center dimension does not match the points")
        shape = _mvee_fixed_center(P - center, tol, max_iterations)
        shape = 0.5 * (shape + shape.T)
        return _inflate_to_contain(P, center, shape)
    Q = np.column_stack([P, np.ones(n)])  # lifted
    m = d + 1
    u = np.full(n, 1.0 / n)
    for _ in range(max_iterations):
        X = Q.T @ (Q * u[:, None])
        try:
            Xinv = np.linalg.inv(X)
        except np.linalg.LinAlgError as exc:
            raise DegeneratePointSet(f"degenerate weight configuration: {exc}") from exc
        w = np.einsum("ij,jk,ik->i", Q, Xinv, Q)
        j_up = int(np.argmax(w))
        eps_up = w[j_up] / m - 1.0
        active = u > 0.0
        w_act = np.where(active, w, np.inf)
        j_dn = int(np.argmin(w_act))
        eps_dn = 1.0 - w[j_dn] / m
        if max(eps_up, eps_dn) <= tol:
            break
        if eps_up >= eps_dn:
            lam = (w[j_up] - m) / (m * (w[j_up] - 1.0))
            u *= 1.0 - lam
            u[j_up] += lam
        else:
            # away step, capped so the weight stays nonnegative
            cap = u[j_dn] / max(1.0 - u[j_dn], 1e-300)
            if w[j_dn] > 1.0 + 1e-14:
                lam = min((m - w[j_dn]) / (m * (w[j_dn] - 1.0)), cap)
            else:
                lam = cap
            u *= 1.0 + lam
            u[j_dn] -= lam
            u[j_dn] = max(u[j_dn], 0.0)
    center = P.T @ u
    cov = P.T @ (P * u[:, None]) - np.outer(center, center)
    shape = d * cov
    shape = 0.5 * (shape + shape.T)
    return _inflate_to_contain(P, center, shape)


def _inflate_to_contain(P, center, shape):
    # exact containment: inflate by the worst quadratic-form value
    try:
        Sinv = np.linalg.inv(shape)
    except np.linalg.LinAlgError as exc:
        raise DegeneratePointSet(f"flat enclosing ellipsoid: {exc}") from exc
    diff = P - center
    worst = float(np.max(np.einsum("ij,jk,ik->i", diff, Sinv, diff)))
    if worst > 1.0:
        shape = shape * worst
    return Ellipsoid(center=center, shape=shape)


def psum_mvee_reference(S, n_dirs=720, tol=1e-7, seed=0):
    """Loewner-John reference ellipsoid of a p-sum from sampled boundary points.

    Finite p: boundary points come from the support-function gradient in
    n_dirs directions (plus reflections; centered p-sums are symmetric).
    p = inf: the set is the convex hull of the summand ellipsoids, so
    per-summand boundary points are used instead.
    """
    sampler = SphereSampler(dim=S.dim, count=n_dirs, seed=seed)
    dirs = sampler.directions()
    pts = []
    if math.isinf(S.p):
        for y in dirs:
            for Q in S.shapes:
                h = math.sqrt(max(y @ Q @ y, 0.0))
                pts.append(S.translation + (Q @ y) / h)
    else:
        for y in dirs:
            pts.append(support_point(S, y))
    pts = np.asarray(pts)
    centered = pts - S.translation
    pts = np.vstack([pts, S.translation - centered])  # reflections
    # the reflected cloud is centrally symmetric, so its enclosing optimum
    # is centered at the translation; pass it for the certified path
    return mvee_khachiyan(pts, tol=tol, center=S.translation)
