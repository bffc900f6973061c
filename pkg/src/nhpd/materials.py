"""Elastic material description shared by every module."""

from __future__ import annotations

from dataclasses import dataclass

from .errors import ConfigError

PLANE_MODES = ("stress", "strain")


@dataclass(frozen=True)
class Material:
    """Linear elastic constants plus tensile strength and thickness.

    ``plane`` selects the 2D reduction ("stress" or "strain"). The open
    interval bounds on nu keep every stiffness denominator finite.
    """

    E: float
    nu: float
    Ft: float
    thickness: float = 1.0
    plane: str = "stress"

    def __post_init__(self):
        if self.E <= 0.0:
            raise ConfigError(f"material.E must be positive, got {self.E}")
        if not -1.0 < self.nu < 0.5:
            raise ConfigError(f"material.nu must lie in (-1, 0.5), got {self.nu}")
        if self.Ft <= 0.0:
            raise ConfigError(f"material.Ft must be positive, got {self.Ft}")
        if self.thickness <= 0.0:
            raise ConfigError(f"material.thickness must be positive, got {self.thickness}")
        if self.plane not in PLANE_MODES:
            raise ConfigError(f"material.plane must be one of {PLANE_MODES}, got {self.plane!r}")

    def scaled_strength(self, factor: float) -> "Material":
        return Material(self.E, self.nu, self.Ft * factor, self.thickness, self.plane)
