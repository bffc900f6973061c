"""Horizon assignment and bond graph construction.

Every point gets its own interaction radius h = lam * d_min, so the lattice
adapts to local mesh density. A pair becomes a bond when its distance is
strictly inside at least one endpoint horizon; the bond then carries its own
effective horizon: the mean of the two endpoint horizons when both cover the
bond length, otherwise the covering one. Bonds crossing preexisting slots
are removed before anything else happens, which models zero-width cuts
without meshing them.
"""

from __future__ import annotations

import logging
from dataclasses import dataclass, field

import numpy as np

from .errors import ConfigError, NoBondError
from .neighbors import candidate_pairs

log = logging.getLogger(__name__)


@dataclass
class BondSet:
    """Struct-of-arrays bond graph. One entry per unordered point pair."""

    i: np.ndarray
    j: np.ndarray
    length: np.ndarray
    bond_horizon: np.ndarray
    alpha: np.ndarray = field(default=None)
    omega: np.ndarray = field(default=None)
    s0: np.ndarray = field(default=None)
    broken: np.ndarray = field(default=None)

    def __post_init__(self):
        m = len(self.i)
        if self.alpha is None:
            self.alpha = np.ones(m)
        if self.omega is None:
            self.omega = np.ones(m)
        if self.broken is None:
            self.broken = np.zeros(m, dtype=bool)

    def __len__(self):
        return len(self.i)

    def adjacency(self, n_points: int) -> list[list[int]]:
        """Bond indices incident to each point; both endpoints reference the bond."""
        adj = [[] for _ in range(n_points)]
        for k, (a, b) in enumerate(zip(self.i, self.j)):
            adj[a].append(k)
            adj[b].append(k)
        return adj


def assign_horizons(d_min: np.ndarray, lam: float) -> np.ndarray:
    """Per-point horizon radius, lam times the nearest-point distance."""
    if lam < 1.0:
        raise ConfigError(f"non-local factor must be >= 1, got {lam}")
    return lam * np.asarray(d_min, dtype=float)


def bond_horizon(h_a, h_b, l_ab):
    """Effective horizon of a bond from its endpoint horizons.

    Mean of the two when both exceed the bond length, else the covering
    (larger) one. Symmetric in the endpoints. Scalar or array arguments.
    """
    h_a = np.asarray(h_a, dtype=float)
    h_b = np.asarray(h_b, dtype=float)
    l_ab = np.asarray(l_ab, dtype=float)
    cover_a = h_a > l_ab
    cover_b = h_b > l_ab
    if not np.all(cover_a | cover_b):
        bad = np.flatnonzero(~(cover_a | cover_b))
        raise NoBondError(
            f"neither horizon covers the pair distance for {bad.size} pair(s) "
            f"(first at index {int(bad[0])})"
        )
    h = np.where(cover_a & cover_b, 0.5 * (h_a + h_b), np.maximum(h_a, h_b))
    return float(h) if h.ndim == 0 else h


def build_bonds(xy: np.ndarray, horizons: np.ndarray) -> BondSet:
    """Deduplicated bond graph: one bond per pair with distance < max horizon.

    Coverage is strict (< not <=), so a pair sitting exactly on a horizon is
    not bonded. Bonds are sorted by (i, j) so downstream runs are
    deterministic regardless of search order.
    """
    xy = np.asarray(xy, dtype=float)
    horizons = np.asarray(horizons, dtype=float)
    ii, jj = candidate_pairs(xy, horizons)
    d = np.hypot(xy[jj, 0] - xy[ii, 0], xy[jj, 1] - xy[ii, 1])
    keep = d < np.maximum(horizons[ii], horizons[jj])
    ii, jj, d = ii[keep], jj[keep], d[keep]
    order = np.lexsort((jj, ii))
    ii, jj, d = ii[order], jj[order], d[order]
    h = bond_horizon(horizons[ii], horizons[jj], d) if len(ii) else np.empty(0)
    bonds = BondSet(i=ii, j=jj, length=d, bond_horizon=np.asarray(h))
    isolated = isolated_points(bonds, len(xy))
    if len(isolated):
        log.warning(
            "%d point(s) have no bonds and will be held fixed by the solver: %s",
            len(isolated),
            isolated.tolist()[:10],
        )
    return bonds


def isolated_points(bonds: BondSet, n_points: int) -> np.ndarray:
    connected = np.zeros(n_points, dtype=bool)
    connected[bonds.i] = True
    connected[bonds.j] = True
    return np.flatnonzero(~connected)


def _cross(ox, oy, ax, ay, bx, by):
    return (ax - ox) * (by - oy) - (ay - oy) * (bx - ox)


def segments_intersect(p, q, a, b, tol: float = 1e-12):
    """Whether segment sets (p[k], q[k]) intersect the single segment (a, b).

    Endpoint touching counts. Collinearity is decided by point-to-line
    distance below ``tol`` (meters). ``p`` and ``q`` are (M, 2) arrays.
    """
    p = np.atleast_2d(np.asarray(p, dtype=float))
    q = np.atleast_2d(np.asarray(q, dtype=float))
    a = np.asarray(a, dtype=float)
    b = np.asarray(b, dtype=float)

    len_ab = float(np.hypot(*(b - a)))
    len_pq = np.hypot(q[:, 0] - p[:, 0], q[:, 1] - p[:, 1])
    # cross products scale with segment length; tol is a distance
    d1 = _cross(a[0], a[1], b[0], b[1], p[:, 0], p[:, 1])
    d2 = _cross(a[0], a[1], b[0], b[1], q[:, 0], q[:, 1])
    d3 = _cross(p[:, 0], p[:, 1], q[:, 0], q[:, 1], a[0], a[1])
    d4 = _cross(p[:, 0], p[:, 1], q[:, 0], q[:, 1], b[0], b[1])
    t1 = tol * max(len_ab, 1e-300)
    t2 = tol * np.maximum(len_pq, 1e-300)

    proper = (
        ((d1 > t1) & (d2 < -t1) | (d1 < -t1) & (d2 > t1))
        & ((d3 > t2) & (d4 < -t2) | (d3 < -t2) & (d4 > t2))
    )

    def on_segment(sx, sy, ex, ey, px, py):
        return (
            (px >= np.minimum(sx, ex) - tol)
            & (px <= np.maximum(sx, ex) + tol)
            & (py >= np.minimum(sy, ey) - tol)
            & (py <= np.maximum(sy, ey) + tol)
        )

    touch = (
        (np.abs(d1) <= t1) & on_segment(a[0], a[1], b[0], b[1], p[:, 0], p[:, 1])
        | (np.abs(d2) <= t1) & on_segment(a[0], a[1], b[0], b[1], q[:, 0], q[:, 1])
        | (np.abs(d3) <= t2) & on_segment(p[:, 0], p[:, 1], q[:, 0], q[:, 1], a[0], a[1])
        | (np.abs(d4) <= t2) & on_segment(p[:, 0], p[:, 1], q[:, 0], q[:, 1], b[0], b[1])
    )
    return proper | touch


def remove_slot_bonds(bonds: BondSet, xy: np.ndarray, slots, tol: float = 1e-12) -> BondSet:
    """Drop every bond whose segment intersects any slot segment."""
    if not slots:
        return bonds
    xy = np.asarray(xy, dtype=float)
    p = xy[bonds.i]
    q = xy[bonds.j]
    hit = np.zeros(len(bonds), dtype=bool)
    for (x1, y1), (x2, y2) in slots:
        hit |= segments_intersect(p, q, (x1, y1), (x2, y2), tol=tol)
    keep = ~hit
    if hit.any():
        log.info("removed %d bond(s) crossing %d slot(s)", int(hit.sum()), len(slots))
    return BondSet(
        i=bonds.i[keep],
        j=bonds.j[keep],
        length=bonds.length[keep],
        bond_horizon=bonds.bond_horizon[keep],
        alpha=bonds.alpha[keep],
        omega=bonds.omega[keep],
        s0=None if bonds.s0 is None else bonds.s0[keep],
        broken=bonds.broken[keep],
    )
