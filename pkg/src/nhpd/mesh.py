"""Triangle mesh ingestion: MSH (ASCII 2.2 / 4.1) parsing and volume lumping.

Nodes of the mesh become material points; the area of every triangle is
split equally between its three corner nodes, so the lumped volumes sum
exactly to thickness times total mesh area. Physical groups are kept as
named node sets and are the only way boundary conditions attach to the
mesh, which keeps load cases valid across remeshing.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .errors import (
    DegenerateElementError,
    IsolatedNodeError,
    MeshIntegrityError,
    MshParseError,
)

# gmsh element types we understand: 1 = 2-node line, 2 = 3-node triangle,
# 15 = 1-node point. Anything else contributes neither volume nor groups.
_LINE, _TRIANGLE, _POINT = 1, 2, 15
_NODES_PER_TYPE = {_LINE: 2, _TRIANGLE: 3, _POINT: 1}


@dataclass
class Mesh:
    """Planar linear-triangle mesh with named node groups.

    ``triangles`` store positions into ``coords`` (not raw file ids) and are
    normalized to counterclockwise orientation. ``groups`` map a physical
    group name to a sorted array of node positions.
    """

    node_ids: np.ndarray
    coords: np.ndarray
    tri_ids: np.ndarray
    triangles: np.ndarray
    groups: dict[str, np.ndarray] = field(default_factory=dict)

    @property
    def n_nodes(self) -> int:
        return len(self.node_ids)

    @property
    def n_triangles(self) -> int:
        return len(self.tri_ids)

    def triangle_areas(self) -> np.ndarray:
        return _signed_areas(self.coords, self.triangles)

    def total_area(self) -> float:
        return float(self.triangle_areas().sum())


def _signed_areas(coords, triangles):
    p0 = coords[triangles[:, 0]]
    p1 = coords[triangles[:, 1]]
    p2 = coords[triangles[:, 2]]
    return 0.5 * (
        (p1[:, 0] - p0[:, 0]) * (p2[:, 1] - p0[:, 1])
        - (p2[:, 0] - p0[:, 0]) * (p1[:, 1] - p0[:, 1])
    )


class _Lines:
    """Line-buffered view of the file contents with 1-based line numbers."""

    def __init__(self, text):
        self._lines = text.splitlines()
        self.pos = 0

    def next(self, context):
        while self.pos < len(self._lines):
            self.pos += 1
            line = self._lines[self.pos - 1].strip()
            if line:
                return line
        raise MshParseError(f"unexpected end of file while reading {context}", self.pos)

    def peek(self):
        pos = self.pos
        while pos < len(self._lines):
            line = self._lines[pos].strip()
            pos += 1
            if line:
                return line
        return None

    def skip_until(self, marker, context):
        while True:
            if self.next(context) == marker:
                return


def parse_msh(text: str) -> Mesh:
    """Parse ASCII MSH content (format 2.2 or 4.1) into a :class:`Mesh`.

    Only 3-node triangles become volume elements; line and point elements
    are used to populate physical groups, and their nodes stay in the node
    table as geometry anchors. Binary files are rejected.
    """
    lines = _Lines(text)
    first = lines.next("header")
    if first != "$MeshFormat":
        raise MshParseError("expected $MeshFormat", lines.pos)
    header = lines.next("header").split()
    if len(header) != 3:
        raise MshParseError("malformed $MeshFormat line", lines.pos)
    version, file_type = header[0], header[1]
    if file_type != "0":
        raise MshParseError("binary MSH files are not supported; re-export as ASCII", lines.pos)
    if lines.next("header") != "$EndMeshFormat":
        raise MshParseError("expected $EndMeshFormat", lines.pos)

    if version.startswith("2"):
        raw = _parse_v2(lines)
    elif version.startswith("4"):
        raw = _parse_v4(lines)
    else:
        raise MshParseError(f"unsupported MSH version {version}", lines.pos)
    return _build_mesh(*raw, line_no=lines.pos)


def _read_physical_names(lines):
    n = _read_int(lines.next("$PhysicalNames"), lines.pos, "physical name count")
    names = {}
    for _ in range(n):
        parts = lines.next("$PhysicalNames").split(None, 2)
        if len(parts) != 3:
            raise MshParseError("malformed physical name entry", lines.pos)
        dim, tag = int(parts[0]), int(parts[1])
        names[(dim, tag)] = parts[2].strip().strip('"')
    lines.skip_until("$EndPhysicalNames", "$PhysicalNames")
    return names


def _read_int(token_line, pos, what):
    try:
        return int(token_line.split()[0])
    except (ValueError, IndexError):
        raise MshParseError(f"expected integer {what}", pos) from None


def _parse_v2(lines):
    phys_names = {}
    node_ids, coords = [], []
    tri_ids, tris, tri_phys = [], [], []
    group_nodes = {}

    while True:
        section = lines.peek()
        if section is None:
            break
        section = lines.next("section")
        if section == "$PhysicalNames":
            phys_names = _read_physical_names(lines)
        elif section == "$Nodes":
            n = _read_int(lines.next("$Nodes"), lines.pos, "node count")
            for _ in range(n):
                parts = lines.next("$Nodes").split()
                if len(parts) < 4:
                    raise MshParseError("node entry needs id x y z", lines.pos)
                node_ids.append(int(parts[0]))
                coords.append((float(parts[1]), float(parts[2])))
            if lines.next("$Nodes") != "$EndNodes":
                raise MshParseError("expected $EndNodes", lines.pos)
        elif section == "$Elements":
            n = _read_int(lines.next("$Elements"), lines.pos, "element count")
            for _ in range(n):
                parts = lines.next("$Elements").split()
                if len(parts) < 3:
                    raise MshParseError("malformed element entry", lines.pos)
                eid, etype, ntags = int(parts[0]), int(parts[1]), int(parts[2])
                tags = [int(t) for t in parts[3 : 3 + ntags]]
                nodes = [int(t) for t in parts[3 + ntags :]]
                phys = tags[0] if tags else 0
                if etype not in _NODES_PER_TYPE:
                    continue
                if len(nodes) != _NODES_PER_TYPE[etype]:
                    raise MshParseError(f"element {eid} has wrong node count", lines.pos)
                if etype == _TRIANGLE:
                    tri_ids.append(eid)
                    tris.append(nodes)
                    tri_phys.append(phys)
                if phys:
                    group_nodes.setdefault((_etype_dim(etype), phys), set()).update(nodes)
            if lines.next("$Elements") != "$EndElements":
                raise MshParseError("expected $EndElements", lines.pos)
        else:
            if section.startswith("$") and not section.startswith("$End"):
                lines.skip_until("$End" + section[1:], section)
    return phys_names, node_ids, coords, tri_ids, tris, group_nodes


def _etype_dim(etype):
    return {_POINT: 0, _LINE: 1, _TRIANGLE: 2}[etype]


def _parse_v4(lines):
    phys_names = {}
    entity_phys = {}
    node_ids, coords = [], []
    tri_ids, tris = [], []
    group_nodes = {}

    while True:
        section = lines.peek()
        if section is None:
            break
        section = lines.next("section")
        if section == "$PhysicalNames":
            phys_names = _read_physical_names(lines)
        elif section == "$Entities":
            counts = lines.next("$Entities").split()
            if len(counts) != 4:
                raise MshParseError("malformed $Entities count line", lines.pos)
            n_pt, n_cv, n_sf, n_vol = (int(c) for c in counts)
            for dim, count, n_coords in ((0, n_pt, 3), (1, n_cv, 6), (2, n_sf, 6), (3, n_vol, 6)):
                for _ in range(count):
                    parts = lines.next("$Entities").split()
                    tag = int(parts[0])
                    n_phys = int(parts[1 + n_coords])
                    phys = [int(p) for p in parts[2 + n_coords : 2 + n_coords + n_phys]]
                    entity_phys[(dim, tag)] = phys
            lines.skip_until("$EndEntities", "$Entities")
        elif section == "$Nodes":
            head = lines.next("$Nodes").split()
            if len(head) != 4:
                raise MshParseError("malformed $Nodes header", lines.pos)
            n_blocks = int(head[0])
            for _ in range(n_blocks):
                block = lines.next("$Nodes").split()
                if len(block) != 4:
                    raise MshParseError("malformed node block header", lines.pos)
                n_in_block = int(block[3])
                tags = [
                    _read_int(lines.next("$Nodes"), lines.pos, "node tag")
                    for _ in range(n_in_block)
                ]
                for tag in tags:
                    parts = lines.next("$Nodes").split()
                    if len(parts) < 3:
                        raise MshParseError("node coordinates need x y z", lines.pos)
                    node_ids.append(tag)
                    coords.append((float(parts[0]), float(parts[1])))
            if lines.next("$Nodes") != "$EndNodes":
                raise MshParseError("expected $EndNodes", lines.pos)
        elif section == "$Elements":
            head = lines.next("$Elements").split()
            if len(head) != 4:
                raise MshParseError("malformed $Elements header", lines.pos)
            n_blocks = int(head[0])
            for _ in range(n_blocks):
                block = lines.next("$Elements").split()
                if len(block) != 4:
                    raise MshParseError("malformed element block header", lines.pos)
                dim, etag, etype, n_in_block = (int(b) for b in block)
                phys = entity_phys.get((dim, etag), [])
                for _ in range(n_in_block):
                    parts = [int(p) for p in lines.next("$Elements").split()]
                    eid, nodes = parts[0], parts[1:]
                    if etype == _TRIANGLE:
                        if len(nodes) != 3:
                            raise MshParseError(f"element {eid} has wrong node count", lines.pos)
                        tri_ids.append(eid)
                        tris.append(nodes)
                    if etype in _NODES_PER_TYPE:
                        for p in phys:
                            group_nodes.setdefault((dim, p), set()).update(nodes)
            if lines.next("$Elements") != "$EndElements":
                raise MshParseError("expected $EndElements", lines.pos)
        else:
            if section.startswith("$") and not section.startswith("$End"):
                lines.skip_until("$End" + section[1:], section)
    return phys_names, node_ids, coords, tri_ids, tris, group_nodes


def _build_mesh(phys_names, node_ids, coords, tri_ids, tris, group_nodes, line_no):
    if not node_ids:
        raise MshParseError("mesh contains no nodes", line_no)
    node_ids = np.asarray(node_ids, dtype=np.int64)
    coords = np.asarray(coords, dtype=float).reshape(-1, 2)
    uniq, counts = np.unique(node_ids, return_counts=True)
    if np.any(counts > 1):
        raise MeshIntegrityError(f"duplicate node ids: {uniq[counts > 1].tolist()[:10]}")

    id_to_pos = {int(i): k for k, i in enumerate(node_ids)}
    tri_pos = np.empty((len(tris), 3), dtype=np.int64)
    for k, nodes in enumerate(tris):
        try:
            tri_pos[k] = [id_to_pos[n] for n in nodes]
        except KeyError as exc:
            raise MeshIntegrityError(
                f"triangle {tri_ids[k]} references unknown node {exc.args[0]}"
            ) from None
    tri_ids = np.asarray(tri_ids, dtype=np.int64)

    if len(tri_pos):
        areas = _signed_areas(coords, tri_pos)
        span = float(np.ptp(coords, axis=0).max()) or 1.0
        degenerate = np.abs(areas) <= 1e-14 * span * span
        if np.any(degenerate):
            raise DegenerateElementError(
                f"zero-area triangles: {tri_ids[degenerate].tolist()[:10]}"
            )
        flipped = areas < 0.0
        tri_pos[flipped] = tri_pos[flipped][:, [0, 2, 1]]

    groups = {}
    for (dim, tag), nodes in sorted(group_nodes.items()):
        name = phys_names.get((dim, tag), f"group_{dim}_{tag}")
        pos = []
        for n in nodes:
            if n not in id_to_pos:
                raise MeshIntegrityError(f"group {name!r} references unknown node {n}")
            pos.append(id_to_pos[n])
        merged = np.union1d(groups.get(name, np.empty(0, dtype=np.int64)), pos)
        groups[name] = merged.astype(np.int64)

    return Mesh(node_ids=node_ids, coords=coords, tri_ids=tri_ids, triangles=tri_pos, groups=groups)


def parse_msh_file(path) -> Mesh:
    with open(path, "r", encoding="utf-8") as fh:
        return parse_msh(fh.read())


def write_msh(mesh: Mesh, path=None) -> str:
    """Emit a normalized ASCII MSH 2.2 copy of the mesh.

    Groups are written back as physical point elements so that a
    parse/write/parse cycle preserves nodes, triangles and groups.
    """
    out = ["$MeshFormat", "2.2 0 8", "$EndMeshFormat"]
    names = sorted(mesh.groups)
    if names:
        out.append("$PhysicalNames")
        out.append(str(len(names)))
        for tag, name in enumerate(names, start=1):
            out.append(f'0 {tag} "{name}"')
        out.append("$EndPhysicalNames")
    out.append("$Nodes")
    out.append(str(mesh.n_nodes))
    for nid, (x, y) in zip(mesh.node_ids, mesh.coords):
        out.append(f"{nid} {float(x)!r} {float(y)!r} 0")
    out.append("$EndNodes")

    elements = []
    eid = 0
    for tag, name in enumerate(names, start=1):
        for pos in mesh.groups[name]:
            eid += 1
            elements.append(f"{eid} {_POINT} 2 {tag} {tag} {mesh.node_ids[pos]}")
    for tid, tri in zip(mesh.tri_ids, mesh.triangles):
        eid += 1
        n1, n2, n3 = (mesh.node_ids[p] for p in tri)
        elements.append(f"{eid} {_TRIANGLE} 2 0 0 {n1} {n2} {n3}")
    out.append("$Elements")
    out.append(str(len(elements)))
    out.extend(elements)
    out.append("$EndElements")
    text = "\n".join(out) + "\n"
    if path is not None:
        with open(path, "w", encoding="utf-8") as fh:
            fh.write(text)
    return text


def lump_volumes(mesh: Mesh, thickness: float, drop_volume_free: bool = False):
    """Convert mesh nodes into lumped point volumes.

    Every triangle's area is divided equally between its three nodes and
    scaled by the thickness. Returns ``(xy, volume, groups)`` where groups
    are remapped to point indices. Nodes outside all triangles carry zero
    volume; they are an error unless ``drop_volume_free`` is set, in which
    case they are discarded and the groups renumbered.
    """
    if thickness <= 0.0:
        raise ValueError(f"thickness must be positive, got {thickness}")
    areas = mesh.triangle_areas()
    volume = np.zeros(mesh.n_nodes)
    share = thickness * areas / 3.0
    for corner in range(3):
        np.add.at(volume, mesh.triangles[:, corner], share)

    volume_free = np.flatnonzero(volume == 0.0)
    if len(volume_free) and not drop_volume_free:
        ids = mesh.node_ids[volume_free].tolist()[:10]
        raise IsolatedNodeError(
            f"{len(volume_free)} node(s) belong to no triangle and would carry "
            f"zero volume (ids {ids}); pass drop_volume_free=True to discard them"
        )

    if len(volume_free):
        keep = np.flatnonzero(volume > 0.0)
        remap = -np.ones(mesh.n_nodes, dtype=np.int64)
        remap[keep] = np.arange(len(keep))
        xy = mesh.coords[keep].copy()
        volume = volume[keep]
        groups = {}
        for name, pos in mesh.groups.items():
            g = remap[pos]
            groups[name] = np.sort(g[g >= 0])
    else:
        xy = mesh.coords.copy()
        groups = {name: pos.copy() for name, pos in mesh.groups.items()}
    return xy, volume, groups
