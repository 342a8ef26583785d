"""Approximation-quality measures for outer ellipsoids.

The Hausdorff distance between an outer ellipsoid and the exact set it
contains equals sup over unit directions of the support gap. The sup is
approximated from below by sampling (the reported number is a lower
estimate); a closed-form upper bound for a Minkowski sum of ellipsoids is
||Qhat^{1/2} - sum M_k^{1/2}||_2.
"""

import math
import warnings
from dataclasses import dataclass

import numpy as np
import scipy.stats

from .errors import DimensionMismatch, NotOuter
from .geometry import Ellipsoid, volume
from .linalg import spd_sqrt, spectral_norm
from .outer import Criterion

# sampling defaults: equally spaced angles in the plane, scrambled
# low-discrepancy points mapped to the sphere above it
DEFAULT_COUNT_2D = 3600
DEFAULT_COUNT_ND = 10_000


@dataclass
class SphereSampler:
    """Deterministic unit-direction sampler."""

    dim: int
    count: int = None
    seed: int = 0

    def __post_init__(self):
        if self.dim < 2:
            raise DimensionMismatch("sampler needs dimension >= 2")
        if self.count is None:
            self.count = DEFAULT_COUNT_2D if self.dim == 2 else DEFAULT_COUNT_ND

    @property
    def scheme(self):
        return "uniform-angle" if self.dim == 2 else "quasi-random"

    def directions(self):
        """(count, dim) array of unit vectors; nested as count grows."""
        if self.dim == 2:
            theta = 2.0 * math.pi * np.arange(self.count) / self.count
            return np.column_stack([np.cos(theta), np.sin(theta)])
        sob = scipy.stats.qmc.Sobol(d=self.dim, scramble=True, seed=self.seed)
        with warnings.catch_warnings():
            # power-of-two balance warning is irrelevant for sup estimation
            warnings.simplefilter("ignore", UserWarning)
            u = sob.random(self.count)
        # inverse-normal map sends the unit cube to isotropic Gaussians
        z = scipy.stats.norm.ppf(np.clip(u, 1e-12, 1.0 - 1e-12))
        nrm = np.linalg.norm(z, axis=1, keepdims=True)
        nrm[nrm == 0.0] = 1.0
        return z / nrm


def _support_outer(E, dirs):
    quad = np.einsum("ij,jk,ik->i", dirs, E.shape, dirs)
    return dirs @ E.center + np.sqrt(np.maximum(quad, 0.0))


def hausdorff_sampled(outer, exact_support, sampler):
    """max over sampled unit directions of h_outer - h_exact (lower estimate).

    Raises NotOuter if any sampled gap is below -1e-8: the "outer" set does
    not actually contain the exact one.
    """
    dirs = sampler.directions()
    if dirs.shape[1] != outer.dim:
        raise DimensionMismatch("sampler dimension does not match the ellipsoid")
    h_out = _support_outer(outer, dirs)
    h_ex = np.array([exact_support(s) for s in dirs])
    gaps = h_out - h_ex
    worst = float(np.min(gaps))
    if worst < -1e-8:
        raise NotOuter(f"support gap {worst:.3e} at a sampled direction")
    return float(np.max(gaps))


def hausdorff_upper_bound(Qhat, Ms):
    """||Qhat^{1/2} - sum_k M_k^{1/2}||_2, an upper bound on the Hausdorff
    distance between the outer ellipsoid E(0,Qhat) and the Minkowski sum of
    the E(0,M_k)."""
    Qhat = np.asarray(Qhat, dtype=float)
    total = np.zeros_like(Qhat)
    for M in Ms:
        M = np.asarray(M, dtype=float)
        if M.shape != Qhat.shape:
            raise DimensionMismatch("block dimension mismatch")
        total += spd_sqrt(M)
    return spectral_norm(spd_sqrt(Qhat) - total)


def report(tube):
    """Per-step records of volume, trace, beta, iterations, residual,
    Hausdorff upper bound, and timing, per criterion.

    The bound is exact-form when every summand block is a single ellipsoid;
    otherwise each block is first replaced by its stage-1 outer ellipsoid and
    the record is labeled a heuristic bound.
    """
    records = []
    for step in tube.steps:
        rec = {"t": step.t, "center": step.center.tolist()}
        all_single = all(len(b.shapes) == 1 for b in step.blocks)
        for crit in (Criterion.MIN_TRACE, Criterion.MIN_VOLUME):
            r = step.mtoe if crit is Criterion.MIN_TRACE else step.mvoe
            if r is None:
                continue
            E = Ellipsoid(center=step.center, shape=r.shape)
            if all_single:
                ms = [b.shapes[0] for b in step.blocks]
                bound_kind = "bound"
            else:
                ms = step.block_outers.get(crit.value, [])
                bound_kind = "heuristic-bound"
            entry = {
                "volume": volume(E),
                "trace": float(np.trace(r.shape)),
                "beta": r.beta,
                "iterations": r.iterations,
                "foc_residual": r.foc_residual,
                "mode": r.mode,
                "hausdorff_upper": hausdorff_upper_bound(r.shape, ms) if ms else None,
                "hausdorff_kind": bound_kind,
                "time_s": step.timing.get(crit.value),
            }
            rec[crit.value] = entry
        records.append(rec)
    return records
