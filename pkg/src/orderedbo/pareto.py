"""Pareto dominance, non-dominated archives, and hypervolume indicators.

All objectives are maximized.  Hypervolume is measured with respect to a
reference point ``r``: the Lebesgue measure of the union of axis-aligned
boxes ``[r, p]`` over archive points ``p``, where coordinates of ``p``
below ``r`` are clipped to ``r`` (such points simply contribute nothing).
Exact computation supports two and three objectives; higher dimensions
raise :class:`UnsupportedDimensionError`.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import NamedTuple

import numpy as np

__all__ = [
    "DimensionError",
    "EmptyArchiveError",
    "UnsupportedDimensionError",
    "ParetoArchive",
    "McHypervolume",
    "dominates",
    "non_dominated_mask",
    "pareto_front",
    "hypervolume",
    "hypervolume_mc",
    "hvi",
]


class DimensionError(ValueError):
    """Objective vectors with mismatched or invalid dimensions."""


class EmptyArchiveError(ValueError):
    """An operation that requires at least one point got none."""


class UnsupportedDimensionError(ValueError):
    """Exact hypervolume is only implemented for K in {1, 2, 3}."""


def _as_points(points, name: str = "points") -> np.ndarray:
    pts = np.asarray(points, dtype=float)
    if pts.ndim == 1:
        pts = pts.reshape(1, -1)
    if pts.ndim != 2:
        raise DimensionError(f"{name} must be a 2-D array, got shape {pts.shape}")
    if not np.all(np.isfinite(pts)):
        raise ValueError(f"{name} must be finite")
    return pts


def dominates(a, b) -> bool:
    """Strict Pareto dominance: ``a >= b`` everywhere and ``a > b`` somewhere."""
    a = np.asarray(a, dtype=float)
    b = np.asarray(b, dtype=float)
    if a.shape != b.shape or a.ndim != 1:
        raise DimensionError(f"mismatched objective vectors: {a.shape} vs {b.shape}")
    return bool(np.all(a >= b) and np.any(a > b))


def non_dominated_mask(points) -> np.ndarray:
    """Boolean mask of points not strictly dominated by any other point.

    Duplicates are all retained (they do not dominate each other).
    """
    pts = _as_points(points)
    n = pts.shape[0]
    if n == 0:
        return np.zeros(0, dtype=bool)
    ge = np.all(pts[:, None, :] >= pts[None, :, :], axis=-1)
    gt = np.any(pts[:, None, :] > pts[None, :, :], axis=-1)
    dominated = np.any(ge & gt, axis=0)
    return ~dominated


@dataclass(frozen=True)
class ParetoArchive:
    """A deduplicated set of mutually non-dominated points plus a reference.

    ``points`` has shape (n, K) and may be empty with shape (0, K).
    Rows are stored in canonical lexicographic order so that archives built
    from permutations of the same input compare equal.
    """

    points: np.ndarray
    reference: np.ndarray
    _k: int = field(init=False, repr=False)

    def __post_init__(self):
        pts = _as_points(self.points)
        ref = np.asarray(self.reference, dtype=float)
        if ref.ndim != 1:
            raise DimensionError("reference must be a 1-D point")
        if pts.size and pts.shape[1] != ref.shape[0]:
            raise DimensionError(
                f"points have {pts.shape[1]} objectives, reference has {ref.shape[0]}")
        if pts.size:
            mask = non_dominated_mask(pts)
            if not mask.all():
                raise ValueError("archive points must be mutually non-dominated")
            if np.unique(pts, axis=0).shape[0] != pts.shape[0]:
                raise ValueError("archive points must be unique")
            order = np.lexsort(pts.T[::-1])
            pts = pts[order]
        else:
            pts = pts.reshape(0, ref.shape[0])
        object.__setattr__(self, "points", pts)
        object.__setattr__(self, "reference", ref)
        object.__setattr__(self, "_k", ref.shape[0])

    @property
    def n_objectives(self) -> int:
        return self._k

    def __len__(self) -> int:
        return self.points.shape[0]


def pareto_front(points, reference=None) -> ParetoArchive:
    """Filter ``points`` down to the non-dominated, deduplicated archive.

    Parameters
    ----------
    points : array-like, shape (n, K)
        Candidate objective vectors; n must be at least 1.
    reference : array-like, shape (K,), optional
        Reference point attached to the archive.  Defaults to the origin.
    """
    pts = _as_points(points)
    if pts.shape[0] == 0:
        raise EmptyArchiveError("cannot build a Pareto front from zero points")
    pts = np.unique(pts, axis=0)
    pts = pts[non_dominated_mask(pts)]
    if reference is None:
        reference = np.zeros(pts.shape[1])
    return ParetoArchive(points=pts, reference=reference)


def _clip_translate(points: np.ndarray, ref: np.ndarray) -> np.ndarray:
    # shift so the reference sits at the origin; clamp below to zero
    return np.maximum(points - ref, 0.0)


def _hv2d(q: np.ndarray) -> float:
    """Exact area of the union of origin-anchored boxes [0, q_i] in 2-D.

    Scans points in canonical (x desc, y desc) order; each point adds the
    horizontal strip above the running y maximum.  The fixed scan order
    makes the floating-point sum permutation-invariant.
    """
    if q.shape[0] == 0:
        return 0.0
    order = np.lexsort((-q[:, 1], -q[:, 0]))
    q = q[order]
    ymax = 0.0
    area = 0.0
    for x, y in q:
        if y > ymax:
            area += x * (y - ymax)
            ymax = y
    return float(area)


def _hv3d(q: np.ndarray) -> float:
    """Exact volume of the union of origin-anchored boxes in 3-D.

    Sweeps z from high to low; the slab between consecutive z levels has
    cross-section equal to the 2-D union area of the xy-projections of all
    points at or above that level.
    """
    if q.shape[0] == 0:
        return 0.0
    order = np.lexsort((-q[:, 1], -q[:, 0], -q[:, 2]))
    q = q[order]
    z = q[:, 2]
    vol = 0.0
    for i in range(q.shape[0]):
        z_lo = z[i + 1] if i + 1 < q.shape[0] else 0.0
        dz = z[i] - z_lo
        if dz > 0.0:
            vol += dz * _hv2d(q[: i + 1, :2])
    return float(vol)


def hypervolume(archive: ParetoArchive) -> float:
    """Exact hypervolume of ``archive`` w.r.t. its reference point."""
    k = archive.n_objectives
    if k > 3:
        raise UnsupportedDimensionError(
            f"exact hypervolume supports K <= 3, got K={k}")
    q = _clip_translate(archive.points, archive.reference)
    if k == 1:
        return float(q[:, 0].max()) if q.shape[0] else 0.0
    if k == 2:
        return _hv2d(q)
    return _hv3d(q)


class McHypervolume(NamedTuple):
    estimate: float
    standard_error: float


def hypervolume_mc(archive: ParetoArchive, n_samples: int, seed: int) -> McHypervolume:
    """Unbiased Monte Carlo estimate of the hypervolume with standard error.

    Draws uniform points inside the bounding box spanned by the reference
    and the archive's coordinate-wise maxima and counts the fraction lying
    below at least one archive point.
    """
    if n_samples <= 0:
        raise ValueError("n_samples must be positive")
    q = _clip_translate(archive.points, archive.reference)
    if q.shape[0] == 0:
        return McHypervolume(0.0, 0.0)
    hi = q.max(axis=0)
    box = float(np.prod(hi))
    if box == 0.0:
        return McHypervolume(0.0, 0.0)
    rng = np.random.default_rng(seed)
    hits = 0
    chunk = max(1, min(n_samples, 2_000_000 // max(1, q.shape[0])))
    done = 0
    while done < n_samples:
        m = min(chunk, n_samples - done)
        u = rng.random((m, q.shape[1])) * hi
        covered = np.any(np.all(u[:, None, :] <= q[None, :, :], axis=-1), axis=-1)
        hits += int(covered.sum())
        done += m
    frac = hits / n_samples
    est = box * frac
    se = box * float(np.sqrt(frac * (1.0 - frac) / n_samples))
    return McHypervolume(est, se)


def hvi(candidate, archive: ParetoArchive) -> float:
    """Hypervolume improvement of adding ``candidate`` to ``archive``.

    Always non-negative; exactly zero when the candidate's clipped box is
    already covered by the archive.
    """
    cand = np.asarray(candidate, dtype=float)
    if cand.ndim != 1 or cand.shape[0] != archive.n_objectives:
        raise DimensionError(
            f"candidate has shape {cand.shape}, expected ({archive.n_objectives},)")
    if not np.all(np.isfinite(cand)):
        raise ValueError("candidate must be finite")
    base = hypervolume(archive)
    k = archive.n_objectives
    if k > 3:
        raise UnsupportedDimensionError(
            f"exact hypervolume supports K <= 3, got K={k}")
    q = _clip_translate(
        np.vstack([archive.points, cand[None, :]]) if len(archive) else cand[None, :],
        archive.reference)
    if k == 1:
        joint = float(q[:, 0].max())
    elif k == 2:
        joint = _hv2d(q)
    else:
        joint = _hv3d(q)
    return max(joint - base, 0.0)
