"""Quasi-static 2D fracture on irregular point lattices with per-point horizons."""

from .bonds import BondSet, assign_horizons, bond_horizon, build_bonds, remove_slot_bonds
from .config import RunConfig, adjusted_strength, load_config, strength_ratio
from .correction import CorrectionSettings, run_correction
from .errors import NhpdError
from .materials import Material
from .mesh import Mesh, lump_volumes, parse_msh, parse_msh_file, write_msh
from .model import Model, build_model
from .neighbors import nearest_distances
from .solver import BoundaryRule, LoadProgram, PointLoadRule, QuasiStatic, RunHistory, run

__all__ = [
    "BondSet",
    "BoundaryRule",
    "CorrectionSettings",
    "LoadProgram",
    "Material",
    "Mesh",
    "Model",
    "NhpdError",
    "PointLoadRule",
    "QuasiStatic",
    "RunConfig",
    "RunHistory",
    "adjusted_strength",
    "assign_horizons",
    "bond_horizon",
    "build_bonds",
    "build_model",
    "load_config",
    "lump_volumes",
    "nearest_distances",
    "parse_msh",
    "parse_msh_file",
    "remove_slot_bonds",
    "run",
    "run_correction",
    "strength_ratio",
    "write_msh",
]

__version__ = "0.1.0"
