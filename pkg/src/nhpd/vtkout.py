"""Legacy ASCII VTK output of the per-point fields.

One unstructured-grid file per requested step, points as vertex cells,
carrying displacement, rotation, damage, volume and horizon. The title line
embeds the effective model parameters so a result file is self-describing.
"""

from __future__ import annotations

import numpy as np

from .errors import OutputError


def _fmt(x: float) -> str:
    return repr(float(x))


def field_file_text(xy, u, phi, volume, horizon, title: str) -> str:
    n = len(xy)
    lines = ["# vtk DataFile Version 3.0", title[:255], "ASCII", "DATASET UNSTRUCTURED_GRID"]
    lines.append(f"POINTS {n} double")
    for x, y in xy:
        lines.append(f"{_fmt(x)} {_fmt(y)} 0.0")
    lines.append(f"CELLS {n} {2 * n}")
    lines.extend(f"1 {k}" for k in range(n))
    lines.append(f"CELL_TYPES {n}")
    lines.extend("1" for _ in range(n))
    lines.append(f"POINT_DATA {n}")
    lines.append("VECTORS displacement double")
    for k in range(n):
        lines.append(f"{_fmt(u[3 * k])} {_fmt(u[3 * k + 1])} 0.0")
    for name, values in (
        ("rotation", u[2::3]),
        ("damage", phi),
        ("volume", volume),
        ("horizon", horizon),
    ):
        lines.append(f"SCALARS {name} double 1")
        lines.append("LOOKUP_TABLE default")
        lines.extend(_fmt(v) for v in values)
    return "\n".join(lines) + "\n"


def write_fields(path, model, u, phi, step: int, meta: str = "") -> None:
    """Write one field snapshot; raises OutputError on unwritable paths."""
    title = f"fields step={step} {meta}".strip()
    text = field_file_text(model.xy, np.asarray(u), np.asarray(phi), model.volume, model.horizon, title)
    try:
        with open(path, "w", encoding="utf-8") as fh:
            fh.write(text)
    except OSError as exc:
        raise OutputError(f"cannot write field file {path}: {exc}") from None
