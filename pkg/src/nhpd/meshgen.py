"""Deterministic irregular triangle meshes for scenarios and tests.

Points are laid out on a jittered hexagonal lattice (plus an exact boundary
ring or frame) and triangulated with Delaunay; the jitter keeps node
spacing irregular the way a mesh generator would, while the seed makes the
result reproducible. Platen and edge groups are attached as physical node
sets so load cases can bind to them by name.
"""

from __future__ import annotations

import numpy as np
from scipy.spatial import Delaunay

from .mesh import Mesh


def _hex_lattice(spacing, x0, x1, y0, y1):
    dy = spacing * np.sqrt(3.0) / 2.0
    rows = []
    y = y0
    row = 0
    while y <= y1 + 1e-12:
        off = 0.5 * spacing if row % 2 else 0.0
        xs = np.arange(x0 + off, x1 + 1e-12, spacing)
        rows.append(np.stack([xs, np.full_like(xs, y)], axis=1))
        y += dy
        row += 1
    return np.concatenate(rows) if rows else np.empty((0, 2))


def _triangulate(points, groups):
    tri = Delaunay(points)
    triangles = tri.simplices.astype(np.int64)
    # qhull does not promise counterclockwise simplices
    p0, p1, p2 = (points[triangles[:, k]] for k in range(3))
    area2 = (p1[:, 0] - p0[:, 0]) * (p2[:, 1] - p0[:, 1]) - (p2[:, 0] - p0[:, 0]) * (
        p1[:, 1] - p0[:, 1]
    )
    flipped = area2 < 0.0
    triangles[flipped] = triangles[flipped][:, [0, 2, 1]]
    n = len(points)
    return Mesh(
        node_ids=np.arange(1, n + 1, dtype=np.int64),
        coords=points.copy(),
        tri_ids=np.arange(1, len(triangles) + 1, dtype=np.int64),
        triangles=triangles,
        groups={k: np.asarray(sorted(v), dtype=np.int64) for k, v in groups.items()},
    )


def disk_mesh(
    radius: float = 0.05,
    spacing: float = 0.002,
    seed: int = 0,
    jitter: float = 0.25,
    platen_half_angle_deg: float = 8.0,
) -> Mesh:
    """Irregular disk with "top"/"bottom" platen arcs and a "domain" group.

    ``spacing`` sets the nominal point distance; ``jitter`` is the random
    offset amplitude as a fraction of it.
    """
    rng = np.random.default_rng(seed)
    n_boundary = max(12, int(round(2.0 * np.pi * radius / spacing)))
    theta = 2.0 * np.pi * np.arange(n_boundary) / n_boundary
    ring = radius * np.stack([np.cos(theta), np.sin(theta)], axis=1)

    interior = _hex_lattice(
        spacing, -radius, radius + spacing, -radius, radius + spacing
    )
    interior = interior + rng.uniform(-jitter * spacing, jitter * spacing, interior.shape)
    r = np.hypot(interior[:, 0], interior[:, 1])
    interior = interior[r < radius - 0.55 * spacing]

    points = np.concatenate([ring, interior])
    half = np.deg2rad(platen_half_angle_deg)
    ang = np.arctan2(points[:, 1], points[:, 0])
    on_ring = np.arange(n_boundary)
    top = on_ring[np.abs(ang[on_ring] - np.pi / 2.0) <= half]
    bottom = on_ring[np.abs(ang[on_ring] + np.pi / 2.0) <= half]
    mesh = _triangulate(points, {"domain": range(len(points)), "top": top, "bottom": bottom})
    return mesh


def square_mesh(
    side: float = 1.0,
    spacing: float = 0.1,
    seed: int = 0,
    jitter: float = 0.25,
) -> Mesh:
    """Irregular unit-style square with edge groups left/right/top/bottom."""
    rng = np.random.default_rng(seed)
    n_edge = max(2, int(round(side / spacing)))
    ticks = np.linspace(0.0, side, n_edge + 1)
    frame = []
    for t in ticks:
        frame += [(t, 0.0), (t, side)]
    for t in ticks[1:-1]:
        frame += [(0.0, t), (side, t)]
    frame = np.array(sorted(set(frame)))

    interior = _hex_lattice(spacing, spacing * 0.6, side - spacing * 0.55, spacing * 0.6, side - spacing * 0.55)
    interior = interior + rng.uniform(-jitter * spacing, jitter * spacing, interior.shape)
    inside = (
        (interior[:, 0] > 0.4 * spacing)
        & (interior[:, 0] < side - 0.4 * spacing)
        & (interior[:, 1] > 0.4 * spacing)
        & (interior[:, 1] < side - 0.4 * spacing)
    )
    points = np.concatenate([frame, interior[inside]])

    idx = np.arange(len(points))
    tol = 1e-12
    groups = {
        "domain": idx,
        "left": idx[np.abs(points[:, 0]) < tol],
        "right": idx[np.abs(points[:, 0] - side) < tol],
        "bottom": idx[np.abs(points[:, 1]) < tol],
        "top": idx[np.abs(points[:, 1] - side) < tol],
    }
    return _triangulate(points, groups)
