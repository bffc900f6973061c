"""Beam-like bond kinematics, spring factors, energies and 6x6 stiffness.

Each point carries three degrees of freedom (ux, uy, rotation). A bond
behaves like a short shear-deformable beam between its endpoints: an axial
stretch s, a shear measure gamma that mixes transverse sliding with the mean
end rotation, and a relative rotation theta. Forces are linear in these
measures while the bond is intact, and the elemental stiffness is the exact
Hessian of the bond energy, so finite differences of the energy reproduce it.

Scalar functions build the small matrices explicitly; *_all variants are the
vectorized equivalents used for whole-model evaluation and must agree with
the scalar path bit-for-bit up to float reassociation.
"""

from __future__ import annotations

import numpy as np

from .errors import (
    DegenerateBondError,
    NegativeRotationalStiffnessError,
    SingularMaterialError,
)
from .materials import Material


def direction_cosines(xy_a, xy_b):
    dx = xy_b[0] - xy_a[0]
    dy = xy_b[1] - xy_a[1]
    l = float(np.hypot(dx, dy))
    if l == 0.0:
        raise DegenerateBondError(f"bond endpoints coincide at {tuple(xy_a)}")
    return dx / l, dy / l, l


def rotation_matrix(xy_a, xy_b) -> np.ndarray:
    """6x6 global-to-local frame rotation; orthonormal by construction."""
    a, b, _ = direction_cosines(xy_a, xy_b)
    r = np.zeros((6, 6))
    for k in (0, 3):
        r[k, k] = a
        r[k, k + 1] = b
        r[k + 1, k] = -b
        r[k + 1, k + 1] = a
    r[2, 2] = 1.0
    r[5, 5] = 1.0
    return r


def kinematic_matrix(l_ab: float) -> np.ndarray:
    """3x6 map from local end displacements to (s, gamma, theta)."""
    if l_ab <= 0.0:
        raise DegenerateBondError(f"bond length must be positive, got {l_ab}")
    return (
        np.array(
            [
                [-1.0, 0.0, 0.0, 1.0, 0.0, 0.0],
                [0.0, -1.0, l_ab / 2.0, 0.0, 1.0, l_ab / 2.0],
                [0.0, 0.0, -l_ab, 0.0, 0.0, l_ab],
            ]
        )
        / l_ab
    )


def stiffness_factors(material: Material, h_bond, l_ab):
    """Normal, shear and rotational spring factors (k_n, k_t, k_theta).

    k_n depends on the bond horizon cubed, the shear/rotation factors on the
    horizon and the bond length. Poisson ratios that would make the
    shear/rotation factor negative are rejected rather than clamped, since a
    negative factor destroys positive semidefiniteness.
    """
    h = np.asarray(h_bond, dtype=float)
    l = np.asarray(l_ab, dtype=float)
    e_mod, nu, t = material.E, material.nu, material.thickness
    if material.plane == "stress":
        if nu == 1.0:
            raise SingularMaterialError("plane stress with nu = 1 is singular")
        c = 6.0 * e_mod / (np.pi * t * h**3 * (1.0 - nu))
        d = e_mod * (1.0 - 3.0 * nu) / (6.0 * np.pi * t * h * (1.0 - nu**2))
        if nu > 1.0 / 3.0:
            raise NegativeRotationalStiffnessError(
                f"plane stress with nu = {nu} > 1/3 gives a negative "
                "shear/rotational spring factor; not supported"
            )
    else:
        if nu == 0.5:
            raise SingularMaterialError("plane strain with nu = 0.5 is singular")
        c = 6.0 * e_mod / (np.pi * t * h**3 * (1.0 - 2.0 * nu) * (1.0 + nu))
        d = e_mod * (1.0 - 4.0 * nu) / (6.0 * np.pi * t * h * (1.0 - 2.0 * nu) * (1.0 + nu))
        if nu > 0.25:
            raise NegativeRotationalStiffnessError(
                f"plane strain with nu = {nu} > 1/4 gives a negative "
                "shear/rotational spring factor; not supported"
            )
    k_n = c
    k_t = 12.0 * d / l**2
    k_th = d / l
    if np.ndim(h_bond) == 0 and np.ndim(l_ab) == 0:
        return float(k_n), float(k_t), float(k_th)
    return k_n, k_t, k_th


def length_correction(l_ab, l_amin, l_amax, l_bmin, l_bmax):
    """Weight favoring short bonds within each endpoint neighborhood.

    Mean of two exponentials of the normalized bond length at either
    endpoint; equals 1 when the bond is the shortest at both. An endpoint
    whose bonds all share one length contributes 1.
    """
    l_ab = np.asarray(l_ab, dtype=float)

    def term(lmin, lmax):
        lmin = np.asarray(lmin, dtype=float)
        lmax = np.asarray(lmax, dtype=float)
        span = lmax - lmin
        with np.errstate(divide="ignore", invalid="ignore"):
            e = np.exp((lmin - l_ab) / span)
        return np.where(span == 0.0, 1.0, e)

    alpha = 0.5 * (term(l_amin, l_amax) + term(l_bmin, l_bmax))
    return float(alpha) if alpha.ndim == 0 else alpha


def bond_length_corrections(bonds, n_points: int) -> np.ndarray:
    """Per-bond length correction from per-point min/max incident lengths."""
    lmin = np.full(n_points, np.inf)
    lmax = np.full(n_points, -np.inf)
    for ends in (bonds.i, bonds.j):
        np.minimum.at(lmin, ends, bonds.length)
        np.maximum.at(lmax, ends, bonds.length)
    return length_correction(
        bonds.length, lmin[bonds.i], lmax[bonds.i], lmin[bonds.j], lmax[bonds.j]
    )


def bond_deformation(u_a, u_b, xy_a, xy_b):
    """(s, gamma, theta) of one bond from the two end dof triples."""
    r = rotation_matrix(xy_a, xy_b)
    _, _, l = direction_cosines(xy_a, xy_b)
    bt = kinematic_matrix(l)
    u = np.concatenate([np.asarray(u_a, dtype=float), np.asarray(u_b, dtype=float)])
    return bt @ (r @ u)


def bond_forces(deformation, k_n, k_t, k_th, alpha, omega):
    """Force densities (f_n, f_t, m_theta); linear while unbroken."""
    s, gamma, theta = deformation
    w = omega * alpha
    return np.array([w * k_n * s, w * k_t * gamma, w * k_th * theta])


def element_stiffness(xy_a, xy_b, k_n, k_t, k_th, alpha, omega, vol_a, vol_b) -> np.ndarray:
    """6x6 bond stiffness on [uxA, uyA, mA, uxB, uyB, mB]; symmetric PSD."""
    r = rotation_matrix(xy_a, xy_b)
    _, _, l = direction_cosines(xy_a, xy_b)
    bt = kinematic_matrix(l)
    ld = np.diag([l * k_n, l * k_t, k_th])
    pref = omega * alpha * vol_a * vol_b
    return pref * (r.T @ bt.T @ ld @ bt @ r)


def bond_energy(u_a, u_b, xy_a, xy_b, k_n, k_t, k_th, alpha, omega, vol_a, vol_b) -> float:
    """Quadratic bond energy; zero on rigid modes, never negative for d >= 0."""
    k = element_stiffness(xy_a, xy_b, k_n, k_t, k_th, alpha, omega, vol_a, vol_b)
    u = np.concatenate([np.asarray(u_a, dtype=float), np.asarray(u_b, dtype=float)])
    return 0.5 * float(u @ k @ u)


# ---------------------------------------------------------------------------
# vectorized whole-model paths


def deformations_all(u: np.ndarray, xy: np.ndarray, bonds):
    """(s, gamma, theta) arrays for every bond given the flat dof vector."""
    i, j = bonds.i, bonds.j
    a = (xy[j, 0] - xy[i, 0]) / bonds.length
    b = (xy[j, 1] - xy[i, 1]) / bonds.length
    dux = u[3 * j] - u[3 * i]
    duy = u[3 * j + 1] - u[3 * i + 1]
    m_i = u[3 * i + 2]
    m_j = u[3 * j + 2]
    s = (a * dux + b * duy) / bonds.length
    gamma = (-b * dux + a * duy) / bonds.length + 0.5 * (m_i + m_j)
    theta = m_j - m_i
    return s, gamma, theta


def energy_weights(bonds, k_n, k_t, k_th):
    """Diagonal local weights (l*k_n, l*k_t, k_theta) for energy sums."""
    return bonds.length * k_n, bonds.length * k_t, k_th


def total_energy(u, xy, bonds, k_n, k_t, k_th, volume) -> float:
    """Sum of bond energies over unbroken bonds."""
    s, gamma, theta = deformations_all(u, xy, bonds)
    w1, w2, w3 = energy_weights(bonds, k_n, k_t, k_th)
    pref = bonds.omega * bonds.alpha * volume[bonds.i] * volume[bonds.j]
    e = 0.5 * pref * (w1 * s**2 + w2 * gamma**2 + w3 * theta**2)
    return float(e[~bonds.broken].sum())


def stiffness_blocks(xy, bonds, k_n, k_t, k_th, volume) -> np.ndarray:
    """(M, 6, 6) stiffness blocks for all bonds, broken or not."""
    m = len(bonds)
    l = bonds.length
    a = (xy[bonds.j, 0] - xy[bonds.i, 0]) / l
    b = (xy[bonds.j, 1] - xy[bonds.i, 1]) / l

    bt = np.zeros((m, 3, 6))
    inv_l = 1.0 / l
    bt[:, 0, 0] = -inv_l
    bt[:, 0, 3] = inv_l
    bt[:, 1, 1] = -inv_l
    bt[:, 1, 4] = inv_l
    bt[:, 1, 2] = 0.5
    bt[:, 1, 5] = 0.5
    bt[:, 2, 2] = -1.0
    bt[:, 2, 5] = 1.0

    w = np.stack(energy_weights(bonds, k_n, k_t, k_th), axis=1)
    k_loc = np.einsum("mri,mr,mrj->mij", bt, w, bt)

    r = np.zeros((m, 6, 6))
    for k in (0, 3):
        r[:, k, k] = a
        r[:, k, k + 1] = b
        r[:, k + 1, k] = -b
        r[:, k + 1, k + 1] = a
    r[:, 2, 2] = 1.0
    r[:, 5, 5] = 1.0

    pref = bonds.omega * bonds.alpha * volume[bonds.i] * volume[bonds.j]
    k_glob = np.einsum("mri,mrs,msj->mij", r, k_loc, r)
    return pref[:, None, None] * k_glob
