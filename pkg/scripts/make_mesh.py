#!/usr/bin/env python3
"""Generate irregular disk or square meshes in ASCII MSH 2.2 format.

The disk carries "top"/"bottom" platen node groups; the square carries
"left"/"right"/"top"/"bottom" edge groups. Fixed seed, reproducible output.

    python scripts/make_mesh.py disk --radius 0.05 --spacing 0.002 --out scenarios/disk.msh
    python scripts/make_mesh.py square --side 1.0 --spacing 0.05 --out square.msh
"""

import argparse

from nhpd.mesh import write_msh
from nhpd.meshgen import disk_mesh, square_mesh


def main():
    parser = argparse.ArgumentParser(description=__doc__)
    sub = parser.add_subparsers(dest="shape", required=True)

    disk = sub.add_parser("disk")
    disk.add_argument("--radius", type=float, default=0.05)
    disk.add_argument("--spacing", type=float, default=0.002)
    disk.add_argument("--platen-angle", type=float, default=8.0, help="platen half-angle [deg]")

    square = sub.add_parser("square")
    square.add_argument("--side", type=float, default=1.0)
    square.add_argument("--spacing", type=float, default=0.05)

    for p in (disk, square):
        p.add_argument("--seed", type=int, default=1)
        p.add_argument("--jitter", type=float, default=0.25)
        p.add_argument("--out", required=True)

    args = parser.parse_args()
    if args.shape == "disk":
        mesh = disk_mesh(
            radius=args.radius,
            spacing=args.spacing,
            seed=args.seed,
            jitter=args.jitter,
            platen_half_angle_deg=args.platen_angle,
        )
    else:
        mesh = square_mesh(side=args.side, spacing=args.spacing, seed=args.seed, jitter=args.jitter)
    write_msh(mesh, args.out)
    print(f"{args.out}: {mesh.n_nodes} nodes, {mesh.n_triangles} triangles, "
          f"groups {sorted(mesh.groups)}")


if __name__ == "__main__":
    main()
