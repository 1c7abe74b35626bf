"""Mesh file I/O: ASCII OBJ export/import and binary STL export.

OBJ export writes one `o <component_tag>` group per component with 1-based
global vertex indices. Import triangulates n-gon faces as fans and keeps
`o`/`g` labels as component tags.
"""
from __future__ import annotations

import struct
from pathlib import Path
from typing import List, Sequence, Union

import numpy as np

from ..errors import InvalidParam
from .core import Mesh, face_normals


def obj_dumps(meshes: Union[Mesh, Sequence[Mesh]]) -> str:
    if isinstance(meshes, Mesh):
        meshes = [meshes]
    lines: List[str] = ["# shapecraft OBJ export"]
    offset = 0
    for idx, m in enumerate(meshes):
        tag = m.component_tag or f"component_{idx}"
        lines.append(f"o {tag}")
        for v in m.vertices:
            lines.append(f"v {v[0]:.9g} {v[1]:.9g} {v[2]:.9g}")
        for t in m.triangles:
            lines.append(f"f {t[0] + 1 + offset} {t[1] + 1 + offset} {t[2] + 1 + offset}")
        offset += m.num_vertices
    return "\n".join(lines) + "\n"


def save_obj(path, meshes: Union[Mesh, Sequence[Mesh]]) -> None:
    Path(path).write_text(obj_dumps(meshes), encoding="utf-8")


def obj_loads(text: str) -> List[Mesh]:
    """Parse OBJ text into one Mesh per `o`/`g` group (fan-triangulated)."""
    verts: List[List[float]] = []
    groups: List[tuple] = []  # (tag, triangle list)
    current: List[tuple] = []
    tag = None

    def flush():
        nonlocal current, tag
        if current:
            groups.append((tag, current))
        current = []

    for raw in text.splitlines():
        line = raw.strip()
        if not line or line.startswith("#"):
            continue
        parts = line.split()
        if parts[0] == "v" and len(parts) >= 4:
            verts.append([float(parts[1]), float(parts[2]), float(parts[3])])
        elif parts[0] in ("o", "g"):
            flush()
            tag = parts[1] if len(parts) > 1 else None
        elif parts[0] == "f":
            idx = []
            for tok in parts[1:]:
                i = int(tok.split("/")[0])
                idx.append(i - 1 if i > 0 else len(verts) + i)
            for k in range(1, len(idx) - 1):
                current.append((idx[0], idx[k], idx[k + 1]))
    flush()
    if not verts:
        raise InvalidParam("obj", "no vertices found")
    varr = np.asarray(verts, dtype=np.float64)
    out: List[Mesh] = []
    if not groups:
        return [Mesh(varr, np.zeros((0, 3), dtype=np.int64))]
    for tag, tris in groups:
        tarr = np.asarray(tris, dtype=np.int64)
        used = np.unique(tarr)
        remap = {int(old): new for new, old in enumerate(used)}
        local = np.vectorize(remap.get)(tarr) if len(tarr) else tarr
        out.append(Mesh(varr[used], local, component_tag=tag))
    return out


def load_obj(path) -> List[Mesh]:
    return obj_loads(Path(path).read_text(encoding="utf-8"))


def load_obj_merged(path) -> Mesh:
    from .core import concat
    return concat(load_obj(path))


def save_stl(path, meshes: Union[Mesh, Sequence[Mesh]]) -> None:
    """Binary STL (80-byte header, float32 triangles)."""
    if isinstance(meshes, Mesh):
        meshes = [meshes]
    records = []
    total = 0
    for m in meshes:
        if m.num_triangles == 0:
            continue
        fn = face_normals(m)
        for t, n in zip(m.triangles, fn):
            tri = m.vertices[t]
            records.append(struct.pack(
                "<12fH",
                *np.concatenate([n, tri[0], tri[1], tri[2]]).astype(np.float32),
                0,
            ))
            total += 1
    header = b"shapecraft binary STL".ljust(80, b"\0")
    with open(path, "wb") as fh:
        fh.write(header)
        fh.write(struct.pack("<I", total))
        fh.writelines(records)
