#!/usr/bin/env python3
"""Splitting peak of a diametrally compressed disk across non-local factors.

For each lambda the load step is calibrated from one elastic solve (the
model is linear until the first break), the disk is driven past its peak,
and the peak reaction is compared against the analytic value pi*D*Ft/2 and
against the linear strength trend (3*lambda - 1)/8.

    python scripts/disk_peak_study.py --lambdas 2.5 3 3.5 --spacing 0.002
"""

import argparse
import time

import numpy as np

from nhpd import mechanics
from nhpd.correction import CorrectionSettings
from nhpd.materials import Material
from nhpd.meshgen import disk_mesh
from nhpd.model import build_model
from nhpd.solver import BoundaryRule, LoadProgram, QuasiStatic

RADIUS = 0.05
FT = 3.81e6
MATERIAL = Material(E=30e9, nu=0.2, Ft=FT, thickness=1.0, plane="stress")
ANALYTIC = np.pi * 2 * RADIUS * FT / 2.0


def boundaries(increment):
    return [
        BoundaryRule("top", "uy", -increment),
        BoundaryRule("top", "ux", 0.0),
        BoundaryRule("bottom", "uy", 0.0),
        BoundaryRule("bottom", "ux", 0.0),
    ]


def split_peak(mesh, lam, correction_iters, max_steps, drop=0.85):
    settings = CorrectionSettings(max_iterations=correction_iters)
    elastic = build_model(
        mesh, Material(E=30e9, nu=0.2, Ft=1e30), lam=lam, correction_settings=settings
    )
    model = build_model(mesh, MATERIAL, lam=lam, correction_settings=settings)
    probe = 1e-6
    driver = QuasiStatic(elastic, LoadProgram(steps=1, boundaries=boundaries(probe)))
    driver.step(1)
    s, _, _ = mechanics.deformations_all(driver.u, model.xy, model.bonds)
    d_first = probe / float((s / model.bonds.s0).max())

    program = LoadProgram(
        steps=max_steps,
        boundaries=boundaries(d_first / 16.0),
        batch_size=10,
        monitor_group="top",
        monitor_dof="uy",
    )
    driver = QuasiStatic(model, program)
    peak = 0.0
    for step in range(1, max_steps + 1):
        rec = driver.step(step)
        peak = max(peak, abs(rec.reaction))
        if rec.broken_total > 0 and abs(rec.reaction) < drop * peak:
            break
    return peak, len(model.bonds), rec.broken_total


def main():
    parser = argparse.ArgumentParser(description=__doc__)
    parser.add_argument("--lambdas", type=float, nargs="+", default=[2.5, 3.0, 3.5])
    parser.add_argument("--spacing", type=float, default=0.002)
    parser.add_argument("--seed", type=int, default=1)
    parser.add_argument("--correction-iters", type=int, default=2000)
    parser.add_argument("--max-steps", type=int, default=34)
    args = parser.parse_args()

    mesh = disk_mesh(radius=RADIUS, spacing=args.spacing, seed=args.seed)
    print(f"mesh: {mesh.n_nodes} points; analytic splitting load {ANALYTIC / 1e3:.2f} kN")
    print(f"{'lambda':>7} {'bonds':>8} {'peak kN':>9} {'peak/analytic':>14} "
          f"{'(3l-1)/8':>9} {'adjusted kN':>12} {'time':>6}")
    for lam in args.lambdas:
        t0 = time.time()
        peak, n_bonds, broken = split_peak(mesh, lam, args.correction_iters, args.max_steps)
        trend = (3.0 * lam - 1.0) / 8.0
        print(
            f"{lam:7.2f} {n_bonds:8d} {peak / 1e3:9.1f} {peak / ANALYTIC:14.3f} "
            f"{trend:9.4f} {peak / trend / 1e3:12.1f} {time.time() - t0:5.0f}s"
        )


if __name__ == "__main__":
    main()
