"""Command line driver: info, correct, run and sweep subcommands.

Every run writes into its own directory: the effective configuration
snapshot, the correction trace, the step history as CSV and field files at
the configured cadence. Exit codes are per error category (see errors.py).
"""

from __future__ import annotations

import argparse
import contextlib
import logging
import os
import sys

import yaml

from . import damage as damage_mod
from . import solver as solver_mod
from .bonds import assign_horizons, build_bonds
from .config import RunConfig, adjusted_strength, load_config
from .errors import NhpdError, OutputError, SolverError
from .mesh import parse_msh_file
from .model import build_model
from .vtkout import write_fields

log = logging.getLogger(__name__)


@contextlib.contextmanager
def _run_log(cfg: RunConfig, out_dir: str):
    """Mirror package logs into <out>/run.log with the effective config."""
    handler = logging.FileHandler(os.path.join(out_dir, "run.log"), mode="w")
    handler.setFormatter(logging.Formatter("%(levelname)s %(name)s: %(message)s"))
    root = logging.getLogger("nhpd")
    previous = root.level
    root.addHandler(handler)
    if root.level > logging.INFO or root.level == logging.NOTSET:
        root.setLevel(logging.INFO)
    log.info("effective configuration:\n%s", yaml.safe_dump(cfg.effective_dict(), sort_keys=False))
    try:
        yield
    finally:
        root.removeHandler(handler)
        root.setLevel(previous)
        handler.close()


def _meta(cfg: RunConfig, lam=None, ft=None) -> str:
    lam = cfg.lam if lam is None else lam
    ft = cfg.material.Ft if ft is None else ft
    return f"lambda={lam:g} Ft={ft:g} correction={cfg.correction.mode}"


def _ensure_dir(path):
    try:
        os.makedirs(path, exist_ok=True)
    except OSError as exc:
        raise OutputError(f"cannot create output directory {path}: {exc}") from None


def _write_history(path, history, meta: str):
    lines = ["# history", f"# {meta}", "step,prescribed,reaction,broken,energy"]
    for r in history.records:
        lines.append(f"{r.step},{r.prescribed!r},{r.reaction!r},{r.broken_total},{r.energy!r}")
    with open(path, "w", encoding="utf-8") as fh:
        fh.write("\n".join(lines) + "\n")


def _write_correction(path, report, meta: str):
    lines = [
        "# correction trace",
        f"# {meta}",
        f"# iterations={report.iterations} omega_min={report.omega_min!r} omega_max={report.omega_max!r}",
        "pass,change_sum",
    ]
    for k, c in enumerate(report.changes, start=1):
        lines.append(f"{k},{c!r}")
    with open(path, "w", encoding="utf-8") as fh:
        fh.write("\n".join(lines) + "\n")


def _build(cfg: RunConfig, correct=True, lam=None, material=None):
    mesh = parse_msh_file(cfg.mesh)
    return build_model(
        mesh,
        material or cfg.material,
        cfg.lam if lam is None else lam,
        slots=cfg.slots,
        correction_settings=cfg.correction,
        correct=correct,
    )


def cmd_info(cfg: RunConfig, out_dir: str) -> int:
    mesh = parse_msh_file(cfg.mesh)
    model = _build(cfg, correct=False)
    b = model.bonds
    print(f"mesh: {cfg.mesh}")
    print(f"  nodes: {mesh.n_nodes}  triangles: {mesh.n_triangles}  area: {mesh.total_area():.6g}")
    print(f"  groups: {', '.join(sorted(mesh.groups)) or '(none)'}")
    print(f"points: {model.n_points}  total volume: {model.volume.sum():.6g}")
    print(f"d_min: [{model.d_min.min():.6g}, {model.d_min.max():.6g}]")
    print(f"horizon (lambda={cfg.lam:g}): [{model.horizon.min():.6g}, {model.horizon.max():.6g}]")
    print(f"bonds: {len(b)}  ({2 * len(b) / max(model.n_points, 1):.2f} per point)")
    iso = model.isolated_points()
    if len(iso):
        print(f"isolated points: {len(iso)} (will be held fixed)")
    extra = [lam for lam in cfg.sweep.lambdas if lam != cfg.lam]
    if extra:
        print("bond count vs lambda:")
        for lam in sorted(set(extra) | {cfg.lam}):
            n_bonds = len(build_bonds(model.xy, assign_horizons(model.d_min, lam)))
            print(f"  lambda={lam:g}: {n_bonds}")
    return 0


def cmd_correct(cfg: RunConfig, out_dir: str) -> int:
    model = _build(cfg)
    report = model.correction_report
    _ensure_dir(out_dir)
    _write_correction(os.path.join(out_dir, "correction.csv"), report, _meta(cfg))
    print(
        f"correction: {report.iterations} pass(es), residual {report.residual:.3e}, "
        f"omega in [{report.omega_min:.4f}, {report.omega_max:.4f}]"
    )
    return 0


def _execute(cfg: RunConfig, out_dir: str, lam=None, material=None, program=None):
    """Build, run and persist one scenario; returns (model, history)."""
    _ensure_dir(out_dir)
    model = _build(cfg, lam=lam, material=material)
    meta = _meta(cfg, lam=lam, ft=(material or cfg.material).Ft)
    _write_correction(os.path.join(out_dir, "correction.csv"), model.correction_report, meta)

    program = program or cfg.program
    interval = cfg.output.field_interval

    def on_step(driver, record):
        if interval and record.step % interval == 0:
            phi = damage_mod.point_damage(driver.model.bonds, driver.model.n_points)
            write_fields(
                os.path.join(out_dir, f"fields_{record.step:05d}.vtk"),
                driver.model,
                driver.u,
                phi,
                record.step,
                meta,
            )

    driver = solver_mod.QuasiStatic(model, program)
    try:
        history = driver.run(on_step=on_step)
    except SolverError as exc:
        if exc.history is not None and exc.history.records:
            _write_history(os.path.join(out_dir, "history.csv"), exc.history, meta)
            log.warning("solver failed; partial history written to %s", out_dir)
        raise
    _write_history(os.path.join(out_dir, "history.csv"), history, meta)
    phi = damage_mod.point_damage(model.bonds, model.n_points)
    write_fields(
        os.path.join(out_dir, f"fields_{program.steps:05d}.vtk"),
        model,
        driver.u,
        phi,
        program.steps,
        meta,
    )
    return model, history


def cmd_run(cfg: RunConfig, out_dir: str) -> int:
    _ensure_dir(out_dir)
    cfg.save(os.path.join(out_dir, "effective_config.yaml"))
    with _run_log(cfg, out_dir):
        _, history = _execute(cfg, out_dir)
    peak = history.peak_reaction
    print(f"steps: {len(history.records)}  broken bonds: {history.records[-1].broken_total}")
    print(f"peak |reaction|: {peak:.6e}")
    if cfg.output.reference_load:
        print(f"normalized peak: {peak / cfg.output.reference_load:.4f}")
    return 0


def _scaled_program(program: solver_mod.LoadProgram, factor: float) -> solver_mod.LoadProgram:
    return solver_mod.LoadProgram(
        steps=program.steps,
        boundaries=[
            solver_mod.BoundaryRule(b.group, b.dof, b.increment * factor)
            for b in program.boundaries
        ],
        loads=[
            solver_mod.PointLoadRule(l.group, l.dof, l.increment * factor)
            for l in program.loads
        ],
        batch_size=program.batch_size,
        energy_tolerance=program.energy_tolerance,
        max_newton_iterations=program.max_newton_iterations,
        max_break_rounds=program.max_break_rounds,
        monitor_group=program.monitor_group,
        monitor_dof=program.monitor_dof,
    )


def cmd_sweep(cfg: RunConfig, out_dir: str) -> int:
    lambdas = cfg.sweep.lambdas or [cfg.lam]
    _ensure_dir(out_dir)
    cfg.save(os.path.join(out_dir, "effective_config.yaml"))
    rows = []
    with _run_log(cfg, out_dir):
        for lam in lambdas:
            if cfg.sweep.adjust_strength:
                ft = adjusted_strength(cfg.material.Ft, lam, cfg.sweep.reference_lambda)
            else:
                ft = cfg.material.Ft
            factor = ft / cfg.material.Ft
            material = cfg.material.scaled_strength(factor)
            program = _scaled_program(cfg.program, factor) if cfg.sweep.scale_increments else cfg.program
            sub = os.path.join(out_dir, f"lam_{lam:g}")
            _, history = _execute(cfg, sub, lam=lam, material=material, program=program)
            peak = history.peak_reaction
            ref = cfg.output.reference_load
            rows.append((lam, ft, peak, peak / ref if ref else float("nan")))
            print(
                f"lambda={lam:g}  Ft={ft:.6g}  peak={peak:.6e}"
                + (f"  normalized={peak / ref:.4f}" if ref else "")
            )

    lines = ["# sweep summary", f"# base {_meta(cfg)}", "lambda,Ft,peak,normalized_peak"]
    for lam, ft, peak, norm in rows:
        lines.append(f"{lam!r},{ft!r},{peak!r},{norm!r}")
    with open(os.path.join(out_dir, "summary.csv"), "w", encoding="utf-8") as fh:
        fh.write("\n".join(lines) + "\n")
    return 0


COMMANDS = {
    "info": cmd_info,
    "correct": cmd_correct,
    "run": cmd_run,
    "sweep": cmd_sweep,
}


def main(argv=None) -> int:
    parser = argparse.ArgumentParser(
        prog="nhpd",
        description="Quasi-static fracture on irregular point lattices with non-uniform horizons",
    )
    parser.add_argument("command", choices=sorted(COMMANDS))
    parser.add_argument("--config", required=True, help="YAML run configuration")
    parser.add_argument("--out", default=None, help="output directory (overrides config)")
    parser.add_argument("-v", "--verbose", action="store_true")
    args = parser.parse_args(argv)

    logging.basicConfig(
        level=logging.DEBUG if args.verbose else logging.INFO,
        format="%(levelname)s %(name)s: %(message)s",
        stream=sys.stderr,
    )
    try:
        cfg = load_config(args.config)
        out_dir = args.out or cfg.output.directory
        if args.out:
            cfg.output.directory = os.path.abspath(args.out)
            out_dir = cfg.output.directory
        return COMMANDS[args.command](cfg, out_dir)
    except NhpdError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return exc.exit_code


if __name__ == "__main__":
    sys.exit(main())
