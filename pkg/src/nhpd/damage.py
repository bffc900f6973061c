"""Energy-density failure criterion and the per-point damage field.

A bond snaps completely and irreversibly once its stretch reaches the
critical stretch derived from the tensile strength: the stretch at which
the bond's share of the strain energy density reaches the critical density
of a uniaxial tension test at that strength. Only the normal stretch can
trigger failure; shear and rotation never do, and compression (negative
stretch) never breaks anything.
"""

from __future__ import annotations

import logging

import numpy as np

from .errors import ModelError, SingularMaterialError
from .materials import Material

log = logging.getLogger(__name__)


def critical_energy_density(material: Material) -> float:
    """Strain energy density at failure under uniaxial tension at Ft."""
    ft, e_mod, nu = material.Ft, material.E, material.nu
    if material.plane == "stress":
        if nu in (1.0, -1.0):
            raise SingularMaterialError("plane stress critical density singular at |nu| = 1")
        return ft**2 / (2.0 * e_mod * (1.0 - nu**2))
    if nu == 0.5:
        raise SingularMaterialError("plane strain critical density singular at nu = 0.5")
    return ft**2 * (1.0 - nu**2) * (1.0 - nu) ** 2 / (2.0 * e_mod * (1.0 - 2.0 * nu))


def critical_stretch(e0, omega, alpha, k_n, length, vol_i, vol_j):
    """Bond stretch at which its energy dedication reaches e0.

    Symmetric in the endpoints. Scalar or array arguments.
    """
    denom = omega * alpha * vol_i * vol_j * k_n * length
    denom = np.asarray(denom, dtype=float)
    if np.any(denom <= 0.0):
        bad = np.flatnonzero(np.atleast_1d(denom) <= 0.0)
        raise ModelError(
            f"non-positive stiffness product for {bad.size} bond(s); "
            "critical stretch undefined"
        )
    s0 = np.sqrt(e0 * (np.asarray(vol_i) + np.asarray(vol_j)) / denom)
    return float(s0) if s0.ndim == 0 else s0


def energy_dedication(s, omega, alpha, k_n, length, vol_i, vol_j):
    """Stretch-only energy density a bond dedicates to either endpoint."""
    return omega * alpha * vol_i * vol_j * k_n * length * s**2 / (vol_i + vol_j)


def breakage_margins(s, s0):
    """Ranking value s - s0; a bond is eligible to break when it is >= 0."""
    return s - s0


def point_damage(bonds, n_points: int) -> np.ndarray:
    """Weighted fraction of broken bonds at every point, in [0, 1].

    Weights are the product of the bond's correction factors. Points with no
    bonds at all are reported fully damaged with a warning.
    """
    w = bonds.omega * bonds.alpha
    intact = w * (~bonds.broken)
    den = np.bincount(bonds.i, weights=w, minlength=n_points)
    den += np.bincount(bonds.j, weights=w, minlength=n_points)
    num = np.bincount(bonds.i, weights=intact, minlength=n_points)
    num += np.bincount(bonds.j, weights=intact, minlength=n_points)
    phi = np.ones(n_points)
    has_bonds = den > 0.0
    phi[has_bonds] = 1.0 - num[has_bonds] / den[has_bonds]
    if np.any(~has_bonds):
        log.warning(
            "%d point(s) have no bonds; damage reported as 1", int((~has_bonds).sum())
        )
    return np.clip(phi, 0.0, 1.0)
