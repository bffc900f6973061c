"""Run configuration: YAML ingestion, validation, effective-config snapshot.

Every run directory gets a fully resolved copy of its configuration
(defaults filled in, paths made absolute) so that replaying the snapshot
reproduces the run bit for bit.
"""

from __future__ import annotations

import os
from dataclasses import asdict, dataclass, field

import yaml

from .correction import CorrectionSettings
from .errors import ConfigError
from .materials import Material
from .solver import BoundaryRule, LoadProgram, PointLoadRule


@dataclass
class OutputSettings:
    directory: str = "out"
    field_interval: int = 0
    reference_load: float | None = None


@dataclass
class SweepSettings:
    lambdas: list[float] = field(default_factory=list)
    adjust_strength: bool = True
    reference_lambda: float = 3.0
    scale_increments: bool = False


@dataclass
class RunConfig:
    mesh: str
    material: Material
    lam: float
    correction: CorrectionSettings
    program: LoadProgram
    slots: list = field(default_factory=list)
    output: OutputSettings = field(default_factory=OutputSettings)
    sweep: SweepSettings = field(default_factory=SweepSettings)

    def effective_dict(self) -> dict:
        return {
            "mesh": self.mesh,
            "material": {
                "E": self.material.E,
                "nu": self.material.nu,
                "Ft": self.material.Ft,
                "thickness": self.material.thickness,
                "plane": self.material.plane,
            },
            "model": {
                "lambda": self.lam,
                "correction": asdict(self.correction),
            },
            "slots": [[list(p), list(q)] for p, q in self.slots],
            "boundaries": [asdict(b) for b in self.program.boundaries],
            "loads": [asdict(l) for l in self.program.loads],
            "program": {
                "steps": self.program.steps,
                "batch_size": self.program.batch_size,
                "energy_tolerance": self.program.energy_tolerance,
                "max_newton_iterations": self.program.max_newton_iterations,
                "max_break_rounds": self.program.max_break_rounds,
            },
            "monitor": {
                "group": self.program.monitor_group,
                "dof": self.program.monitor_dof,
            },
            "output": asdict(self.output),
            "sweep": asdict(self.sweep),
        }

    def save(self, path):
        with open(path, "w", encoding="utf-8") as fh:
            yaml.safe_dump(self.effective_dict(), fh, sort_keys=False)


def _as_float(value, name):
    try:
        return float(value)
    except (TypeError, ValueError):
        raise ConfigError(f"{name} must be a number, got {value!r}") from None


def _as_int(value, name):
    try:
        return int(value)
    except (TypeError, ValueError):
        raise ConfigError(f"{name} must be an integer, got {value!r}") from None


def _section(data, name, required=True):
    block = data.get(name)
    if block is None:
        if required:
            raise ConfigError(f"missing config section {name!r}")
        return {}
    if not isinstance(block, dict):
        raise ConfigError(f"config section {name!r} must be a mapping")
    return block


def _require(block, section, key):
    if key not in block:
        raise ConfigError(f"missing config key {section}.{key}")
    return block[key]


def load_config(path) -> RunConfig:
    """Load and validate a YAML run configuration.

    Relative paths inside the file resolve against the file's directory.
    """
    with open(path, "r", encoding="utf-8") as fh:
        try:
            data = yaml.safe_load(fh)
        except yaml.YAMLError as exc:
            raise ConfigError(f"cannot parse {path}: {exc}") from None
    if not isinstance(data, dict):
        raise ConfigError(f"{path} does not contain a configuration mapping")
    base = os.path.dirname(os.path.abspath(path))
    return config_from_dict(data, base)


def config_from_dict(data: dict, base: str) -> RunConfig:
    mesh = data.get("mesh")
    if not mesh:
        raise ConfigError("missing config key 'mesh'")
    mesh = os.path.normpath(os.path.join(base, mesh)) if not os.path.isabs(mesh) else mesh

    mat = _section(data, "material")
    material = Material(
        E=_as_float(_require(mat, "material", "E"), "material.E"),
        nu=_as_float(_require(mat, "material", "nu"), "material.nu"),
        Ft=_as_float(_require(mat, "material", "Ft"), "material.Ft"),
        thickness=_as_float(mat.get("thickness", 1.0), "material.thickness"),
        plane=str(mat.get("plane", "stress")),
    )

    model_block = _section(data, "model")
    lam_raw = model_block.get("lambda", model_block.get("lam"))
    if lam_raw is None:
        raise ConfigError("missing config key model.lambda")
    lam = _as_float(lam_raw, "model.lambda")
    if lam < 1.0:
        raise ConfigError(f"model.lambda must be >= 1, got {lam}")

    corr_block = model_block.get("correction") or {}
    correction = CorrectionSettings(
        probe_strain=_as_float(corr_block.get("probe_strain", 1e-3), "correction.probe_strain"),
        tolerance=_as_float(corr_block.get("tolerance", 1e-3), "correction.tolerance"),
        max_iterations=_as_int(corr_block.get("max_iterations", 100), "correction.max_iterations"),
        mode=str(corr_block.get("mode", "energy")),
    )

    slots = []
    for k, seg in enumerate(data.get("slots") or []):
        try:
            (x1, y1), (x2, y2) = seg
        except (TypeError, ValueError):
            raise ConfigError(f"slots[{k}] must be [[x1, y1], [x2, y2]]") from None
        slots.append(
            (
                (_as_float(x1, f"slots[{k}].x1"), _as_float(y1, f"slots[{k}].y1")),
                (_as_float(x2, f"slots[{k}].x2"), _as_float(y2, f"slots[{k}].y2")),
            )
        )

    boundaries = []
    for k, blk in enumerate(data.get("boundaries") or []):
        if not isinstance(blk, dict):
            raise ConfigError(f"boundaries[{k}] must be a mapping")
        boundaries.append(
            BoundaryRule(
                group=str(_require(blk, f"boundaries[{k}]", "group")),
                dof=str(_require(blk, f"boundaries[{k}]", "dof")),
                increment=_as_float(
                    _require(blk, f"boundaries[{k}]", "increment"),
                    f"boundaries[{k}].increment",
                ),
            )
        )
    loads = []
    for k, blk in enumerate(data.get("loads") or []):
        if not isinstance(blk, dict):
            raise ConfigError(f"loads[{k}] must be a mapping")
        loads.append(
            PointLoadRule(
                group=str(_require(blk, f"loads[{k}]", "group")),
                dof=str(_require(blk, f"loads[{k}]", "dof")),
                increment=_as_float(
                    _require(blk, f"loads[{k}]", "increment"), f"loads[{k}].increment"
                ),
            )
        )

    prog_block = _section(data, "program")
    monitor = _section(data, "monitor", required=False)
    program = LoadProgram(
        steps=_as_int(_require(prog_block, "program", "steps"), "program.steps"),
        boundaries=boundaries,
        loads=loads,
        batch_size=_as_int(prog_block.get("batch_size", 10), "program.batch_size"),
        energy_tolerance=_as_float(
            prog_block.get("energy_tolerance", 1e-4), "program.energy_tolerance"
        ),
        max_newton_iterations=_as_int(
            prog_block.get("max_newton_iterations", 50), "program.max_newton_iterations"
        ),
        max_break_rounds=_as_int(
            prog_block.get("max_break_rounds", 10_000), "program.max_break_rounds"
        ),
        monitor_group=monitor.get("group"),
        monitor_dof=monitor.get("dof"),
    )

    out_block = _section(data, "output", required=False)
    directory = out_block.get("directory", "out")
    if not os.path.isabs(directory):
        directory = os.path.normpath(os.path.join(base, directory))
    ref = out_block.get("reference_load")
    output = OutputSettings(
        directory=directory,
        field_interval=_as_int(out_block.get("field_interval", 0), "output.field_interval"),
        reference_load=None if ref is None else _as_float(ref, "output.reference_load"),
    )

    sweep_block = _section(data, "sweep", required=False)
    lambdas = [
        _as_float(v, f"sweep.lambdas[{k}]")
        for k, v in enumerate(sweep_block.get("lambdas") or [])
    ]
    for v in lambdas:
        if v < 1.0:
            raise ConfigError(f"sweep.lambdas entries must be >= 1, got {v}")
    sweep = SweepSettings(
        lambdas=lambdas,
        adjust_strength=bool(sweep_block.get("adjust_strength", True)),
        reference_lambda=_as_float(
            sweep_block.get("reference_lambda", 3.0), "sweep.reference_lambda"
        ),
        scale_increments=bool(sweep_block.get("scale_increments", False)),
    )

    return RunConfig(
        mesh=mesh,
        material=material,
        lam=lam,
        correction=correction,
        program=program,
        slots=slots,
        output=output,
        sweep=sweep,
    )


def strength_ratio(lam: float) -> float:
    """Effective-to-input strength ratio as a function of the non-local factor."""
    return (3.0 * lam - 1.0) / 8.0


def adjusted_strength(base_ft: float, lam: float, reference_lambda: float = 3.0) -> float:
    """Input strength giving the same effective strength as ``base_ft`` at the reference."""
    return base_ft * strength_ratio(reference_lambda) / strength_ratio(lam)
