"""Accelerated point-cloud queries used during model construction.

A k-d tree narrows the candidates, but every reported distance is then
recomputed with plain numpy arithmetic, so results match a brute-force
all-pairs sweep bit for bit (the tree's internal metric differs from
vectorized hypot by ULPs, which would otherwise leak into the answers).
"""

from __future__ import annotations

import numpy as np
from scipy.spatial import cKDTree

from .errors import DuplicatePointError

# relative candidate-radius inflation covering tree-vs-numpy ULP differences
_SLACK = 1e-9


def _pair_distances(xy, ii, jj):
    return np.hypot(xy[jj, 0] - xy[ii, 0], xy[jj, 1] - xy[ii, 1])


def nearest_distances(xy: np.ndarray) -> np.ndarray:
    """Distance from every point to its nearest other point."""
    xy = np.asarray(xy, dtype=float)
    if len(xy) < 2:
        raise ValueError("need at least two points")
    tree = cKDTree(xy)
    d_tree, _ = tree.query(xy, k=2)
    radius = d_tree[:, 1] * (1.0 + _SLACK)
    ii, jj = _ball_pairs(tree, xy, radius, directed=True)
    d = _pair_distances(xy, ii, jj)
    if np.any(d == 0.0):
        k = int(np.flatnonzero(d == 0.0)[0])
        raise DuplicatePointError(
            f"points {int(ii[k])} and {int(jj[k])} coincide at {tuple(xy[ii[k]])}"
        )
    d_min = np.full(len(xy), np.inf)
    np.minimum.at(d_min, ii, d)
    return d_min


def _ball_pairs(tree, xy, radii, directed=False):
    """(i, j) pairs with tree-distance(i, j) <= radii[i]; i != j."""
    balls = tree.query_ball_point(xy, r=radii)
    counts = np.fromiter((len(b) for b in balls), dtype=np.int64, count=len(balls))
    ii = np.repeat(np.arange(len(balls)), counts)
    jj = (
        np.concatenate([np.asarray(b, dtype=np.int64) for b in balls])
        if counts.sum()
        else np.empty(0, np.int64)
    )
    keep = ii != jj
    ii, jj = ii[keep], jj[keep]
    if directed:
        return ii, jj
    lo = np.minimum(ii, jj)
    hi = np.maximum(ii, jj)
    pairs = np.unique(np.stack([lo, hi], axis=1), axis=0)
    return pairs[:, 0], pairs[:, 1]


def candidate_pairs(xy: np.ndarray, radii: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
    """All unordered pairs (i < j) with distance <= max(radii[i], radii[j]).

    Superset of any per-pair predicate using endpoint radii; callers apply
    their own (strict) filter on the returned pairs using numpy distances.
    """
    xy = np.asarray(xy, dtype=float)
    radii = np.asarray(radii, dtype=float) * (1.0 + _SLACK)
    tree = cKDTree(xy)
    return _ball_pairs(tree, xy, radii, directed=False)
