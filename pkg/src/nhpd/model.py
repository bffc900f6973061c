"""Model container and the preparation pipeline.

Order matters: bonds are built from horizons, slot-crossing bonds removed,
length corrections computed on the final graph, spring factors cached, the
energy correction iterated, and only then the critical stretches frozen.
The correction therefore sees slot faces exactly like free boundaries, and
the critical stretches bake in the final correction weights.
"""

from __future__ import annotations

import logging
from dataclasses import dataclass, field

import numpy as np

from . import bonds as bonds_mod
from . import correction as correction_mod
from . import damage as damage_mod
from . import mechanics
from .errors import ConfigError
from .materials import Material
from .mesh import Mesh, lump_volumes
from .neighbors import nearest_distances

log = logging.getLogger(__name__)


@dataclass
class Model:
    """Point cloud plus bond graph, ready for correction and solving."""

    material: Material
    lam: float
    xy: np.ndarray
    volume: np.ndarray
    d_min: np.ndarray
    horizon: np.ndarray
    bonds: bonds_mod.BondSet
    groups: dict[str, np.ndarray] = field(default_factory=dict)
    k_n: np.ndarray = None
    k_t: np.ndarray = None
    k_th: np.ndarray = None
    correction_report: correction_mod.CorrectionReport = None

    @property
    def n_points(self) -> int:
        return len(self.volume)

    @property
    def n_dofs(self) -> int:
        return 3 * self.n_points

    def group(self, name: str) -> np.ndarray:
        try:
            return self.groups[name]
        except KeyError:
            raise ConfigError(
                f"unknown physical group {name!r}; mesh has {sorted(self.groups)}"
            ) from None

    def isolated_points(self) -> np.ndarray:
        return bonds_mod.isolated_points(self.bonds, self.n_points)


def build_model(
    mesh: Mesh,
    material: Material,
    lam: float,
    slots=(),
    correction_settings: correction_mod.CorrectionSettings | None = None,
    correct: bool = True,
    drop_volume_free: bool = False,
) -> Model:
    """Full preparation pipeline from a parsed mesh to a solvable model."""
    xy, volume, groups = lump_volumes(mesh, material.thickness, drop_volume_free)
    d_min = nearest_distances(xy)
    horizon = bonds_mod.assign_horizons(d_min, lam)
    b = bonds_mod.build_bonds(xy, horizon)
    b = bonds_mod.remove_slot_bonds(b, xy, slots)
    b.alpha = mechanics.bond_length_corrections(b, len(xy))
    k_n, k_t, k_th = mechanics.stiffness_factors(material, b.bond_horizon, b.length)

    model = Model(
        material=material,
        lam=lam,
        xy=xy,
        volume=volume,
        d_min=d_min,
        horizon=horizon,
        bonds=b,
        groups=groups,
        k_n=np.asarray(k_n, dtype=float),
        k_t=np.asarray(k_t, dtype=float),
        k_th=np.asarray(k_th, dtype=float),
    )
    log.info(
        "model: %d points, %d bonds (lam = %g, %.1f bonds/point)",
        model.n_points,
        len(b),
        lam,
        2.0 * len(b) / max(model.n_points, 1),
    )
    if correct:
        model.correction_report = correction_mod.run_correction(model, correction_settings)
    freeze_critical_stretches(model)
    return model


def freeze_critical_stretches(model: Model) -> None:
    """Cache per-bond critical stretches with the current (final) weights."""
    b = model.bonds
    e0 = damage_mod.critical_energy_density(model.material)
    if len(b):
        b.s0 = damage_mod.critical_stretch(
            e0, b.omega, b.alpha, model.k_n, b.length,
            model.volume[b.i], model.volume[b.j],
        )
    else:
        b.s0 = np.empty(0)
