import numpy as np
import pytest

from nhpd import mechanics
from nhpd.bonds import BondSet, assign_horizons, build_bonds
from nhpd.materials import Material
from nhpd.model import Model, freeze_critical_stretches
from nhpd.neighbors import nearest_distances

MSH22_TRIANGLE = """$MeshFormat
2.2 0 8
$EndMeshFormat
$Nodes
3
1 0 0 0
2 1 0 0
3 0 1 0
$EndNodes
$Elements
1
1 2 2 0 0 1 2 3
$EndElements
"""

MSH22_SQUARE = """$MeshFormat
2.2 0 8
$EndMeshFormat
$PhysicalNames
2
1 7 "left"
2 9 "domain"
$EndPhysicalNames
$Nodes
4
1 0 0 0
2 1 0 0
3 1 1 0
4 0 1 0
$EndNodes
$Elements
3
1 2 2 9 0 1 2 3
2 2 2 9 0 1 3 4
3 1 2 7 0 1 4
$EndElements
"""

MSH41_TRIANGLE = """$MeshFormat
4.1 0 8
$EndMeshFormat
$PhysicalNames
2
0 5 "corner"
2 1 "domain"
$EndPhysicalNames
$Entities
1 0 1 0
10 0 0 0 1 5
1 0 0 0 1 1 0 1 1 0
$EndEntities
$Nodes
2 3 1 3
0 10 0 1
1
0 0 0
2 1 0 2
2
3
1 0 0
0 1 0
$EndNodes
$Elements
2 2 1 2
0 10 15 1
1 1
2 1 2 1
2 1 2 3
$EndElements
"""


def simple_material(**kw):
    defaults = dict(E=1.0, nu=0.25, Ft=1.0, thickness=1.0, plane="stress")
    defaults.update(kw)
    return Material(**defaults)


def make_model(xy, volume=None, material=None, lam=3.0, groups=None, horizons=None):
    """Hand-built model: bonds, length corrections and factors, no correction."""
    xy = np.asarray(xy, dtype=float)
    n = len(xy)
    volume = np.ones(n) if volume is None else np.asarray(volume, dtype=float)
    material = material or simple_material()
    d_min = nearest_distances(xy)
    h = assign_horizons(d_min, lam) if horizons is None else np.asarray(horizons, dtype=float)
    b = build_bonds(xy, h)
    b.alpha = mechanics.bond_length_corrections(b, n)
    k_n, k_t, k_th = mechanics.stiffness_factors(material, b.bond_horizon, b.length)
    model = Model(
        material=material,
        lam=lam,
        xy=xy,
        volume=volume,
        d_min=d_min,
        horizon=h,
        bonds=b,
        groups={k: np.asarray(v, dtype=np.int64) for k, v in (groups or {}).items()},
        k_n=np.atleast_1d(np.asarray(k_n, dtype=float)),
        k_t=np.atleast_1d(np.asarray(k_t, dtype=float)),
        k_th=np.atleast_1d(np.asarray(k_th, dtype=float)),
    )
    freeze_critical_stretches(model)
    return model


@pytest.fixture
def rng():
    return np.random.default_rng(42)


def random_cloud(rng, n, span=1.0, min_sep=1e-3):
    """Random points with a minimum separation (rejection-free jittered grid)."""
    side = int(np.ceil(np.sqrt(n)))
    g = np.stack(np.meshgrid(np.arange(side), np.arange(side)), axis=-1).reshape(-1, 2)
    g = g[rng.permutation(len(g))[:n]].astype(float)
    g += rng.uniform(0.15, 0.85, g.shape)
    return g * (span / side)
