"""Iterative per-bond energy correction.

Irregular points and non-uniform horizons make the raw lattice too stiff in
some spots and too soft in others, especially near free boundaries. The fix
is a scalar weight per bond, iterated until the lattice reproduces the
classical strain energy density under two uniform strain probes (an affine
x stretch and an affine y stretch, rotations zero). The weights are frozen
once the total per-pass change drops below the stop threshold and never
change again during the load stepping.

The published form of the per-bond ratio divides the probe strain by a
trial energy density, which is dimensionally inconsistent and makes the
result depend on the probe magnitude. The default here uses target energy
over trial energy instead, which is dimensionless and probe-invariant; the
literal form stays available as mode "strain-literal" for comparison.
"""

from __future__ import annotations

import logging
from dataclasses import dataclass, field

import numpy as np

from .errors import (
    ConfigError,
    CorrectionDivergenceError,
    CorrectionNonConvergence,
    CorrectionSingularityError,
    SingularMaterialError,
)
from .materials import Material
from .mechanics import energy_weights

log = logging.getLogger(__name__)

MODES = ("energy", "strain-literal")


@dataclass
class CorrectionSettings:
    probe_strain: float = 1e-3
    tolerance: float = 1e-3
    max_iterations: int = 100
    mode: str = "energy"

    def __post_init__(self):
        if self.probe_strain <= 0.0:
            raise ConfigError(f"probe_strain must be positive, got {self.probe_strain}")
        if self.tolerance <= 0.0:
            raise ConfigError(f"tolerance must be positive, got {self.tolerance}")
        if self.max_iterations < 1:
            raise ConfigError(f"max_iterations must be >= 1, got {self.max_iterations}")
        if self.mode not in MODES:
            raise ConfigError(f"correction mode must be one of {MODES}, got {self.mode!r}")


@dataclass
class CorrectionReport:
    iterations: int
    changes: list[float] = field(default_factory=list)
    omega_min: float = 1.0
    omega_max: float = 1.0

    @property
    def residual(self) -> float:
        return self.changes[-1] if self.changes else 0.0


def target_energy_density(material: Material, eps: float) -> float:
    """Classical strain energy density under a uniform normal strain eps."""
    e_mod, nu = material.E, material.nu
    if material.plane == "stress":
        if nu in (1.0, -1.0):
            raise SingularMaterialError("plane stress energy density singular at |nu| = 1")
        return e_mod * eps**2 / (2.0 * (1.0 - nu**2))
    if nu == 0.5:
        raise SingularMaterialError("plane strain energy density singular at nu = 0.5")
    return e_mod * (1.0 - nu) * eps**2 / (2.0 * (1.0 + nu) * (1.0 - 2.0 * nu))


def probe_bond_measures(xy, bonds, eps: float, axis: str):
    """(s, gamma) per bond under the affine probe along ``axis``.

    For u_x = eps*x the bond picks up s = a^2 eps, gamma = -a b eps;
    for u_y = eps*y, s = b^2 eps, gamma = a b eps. Rotations stay zero, so
    the relative-rotation measure vanishes identically.
    """
    a = (xy[bonds.j, 0] - xy[bonds.i, 0]) / bonds.length
    b = (xy[bonds.j, 1] - xy[bonds.i, 1]) / bonds.length
    if axis == "x":
        return a * a * eps, -a * b * eps
    if axis == "y":
        return b * b * eps, a * b * eps
    raise ValueError(f"axis must be 'x' or 'y', got {axis!r}")


def trial_energy_densities(xy, bonds, k_n, k_t, volume, eps: float, axis: str, omega=None):
    """Per-point trial strain energy density under one probe.

    Every bond contributes a quarter of its energy-per-endpoint-volume to
    each endpoint (the bond energy is shared by two points). Points with no
    bonds report zero.
    """
    if omega is None:
        omega = bonds.omega
    s, gamma = probe_bond_measures(xy, bonds, eps, axis)
    base = bonds.length * k_n * s**2 + bonds.length * k_t * gamma**2
    q = 0.25 * bonds.alpha * base
    n = len(volume)
    e_trial = np.bincount(bonds.i, weights=omega * q * volume[bonds.j], minlength=n)
    e_trial += np.bincount(bonds.j, weights=omega * q * volume[bonds.i], minlength=n)
    return e_trial


def correction_pass(xy, bonds, omega, e_trial_x, e_trial_y, target: float, eps: float, mode: str):
    """One sweep of the multiplicative weight update.

    Returns the updated weights and the summed absolute change. The ratio
    per endpoint is target/trial ("energy" mode) or eps/trial
    ("strain-literal" mode). A zero trial density at an endpoint is only an
    error when the bond actually needs that axis (nonzero direction cosine).
    """
    a = (xy[bonds.j, 0] - xy[bonds.i, 0]) / bonds.length
    b = (xy[bonds.j, 1] - xy[bonds.i, 1]) / bonds.length
    numerator = target if mode == "energy" else eps

    def axis_term(cos, e_i, e_j, axis):
        needs = cos != 0.0
        zero_end = (e_i == 0.0) | (e_j == 0.0)
        bad = needs & zero_end
        if np.any(bad):
            k = int(np.flatnonzero(bad)[0])
            pt = bonds.i[k] if e_i[k] == 0.0 else bonds.j[k]
            raise CorrectionSingularityError(
                f"zero trial energy density along {axis} at point {int(pt)}, "
                "needed by one of its bonds"
            )
        with np.errstate(divide="ignore", invalid="ignore"):
            p = 0.5 * (numerator / e_i + numerator / e_j)
            term = (cos / p) ** 2
        return np.where(needs, term, 0.0)

    tx = axis_term(a, e_trial_x[bonds.i], e_trial_x[bonds.j], "x")
    ty = axis_term(b, e_trial_y[bonds.i], e_trial_y[bonds.j], "y")
    omega_new = omega / np.sqrt(tx + ty)
    change = float(np.abs(omega_new - omega).sum())
    return omega_new, change


def run_correction(model, settings: CorrectionSettings | None = None) -> CorrectionReport:
    """Iterate weight updates until the stop threshold, then freeze.

    Mutates ``model.bonds.omega`` in place. Raises on divergence (change sum
    growing more than tenfold over five passes) and on hitting the iteration
    cap, in both cases carrying the residual trace.
    """
    settings = settings or CorrectionSettings()
    xy, bonds, volume = model.xy, model.bonds, model.volume
    eps = settings.probe_strain
    target = target_energy_density(model.material, eps)
    omega = bonds.omega.copy()
    changes: list[float] = []

    for _ in range(settings.max_iterations):
        e_x = trial_energy_densities(xy, bonds, model.k_n, model.k_t, volume, eps, "x", omega)
        e_y = trial_energy_densities(xy, bonds, model.k_n, model.k_t, volume, eps, "y", omega)
        omega, change = correction_pass(
            xy, bonds, omega, e_x, e_y, target, eps, settings.mode
        )
        changes.append(change)
        if not np.isfinite(change):
            raise CorrectionDivergenceError(
                f"non-finite change sum at pass {len(changes)}", trace=changes
            )
        if len(changes) > 5 and change > 10.0 * changes[-6]:
            raise CorrectionDivergenceError(
                f"change sum grew from {changes[-6]:.3e} to {change:.3e} over 5 passes",
                trace=changes,
            )
        if change < settings.tolerance:
            break
    else:
        raise CorrectionNonConvergence(
            f"correction did not reach {settings.tolerance:.1e} within "
            f"{settings.max_iterations} passes (last change {changes[-1]:.3e})",
            trace=changes,
        )

    bonds.omega[:] = omega
    report = CorrectionReport(
        iterations=len(changes),
        changes=changes,
        omega_min=float(omega.min()) if len(omega) else 1.0,
        omega_max=float(omega.max()) if len(omega) else 1.0,
    )
    log.info(
        "correction converged in %d pass(es), residual %.3e, omega in [%.4f, %.4f]",
        report.iterations,
        report.residual,
        report.omega_min,
        report.omega_max,
    )
    return report
