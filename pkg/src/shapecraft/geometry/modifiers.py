"""Mesh modifiers: boolean, array, mirror, solidify, subdivision, bevel, curve.

`apply_modifier` dispatches a ModifierSpec onto a target mesh; booleans and
curve deformation additionally take an auxiliary mesh.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Dict, List, Optional, Sequence, Tuple

import numpy as np

from ..errors import EmptyMesh, InvalidParam, MissingAuxMesh
from .core import (Mesh, compute_aabb, concat, face_normals, is_closed,
                   vertex_normals, weld)
from .csg import boolean

MODIFIER_NAMES = ("boolean", "array", "mirror", "solidify", "subdivision", "bevel", "curve")

SHARP_DIHEDRAL_DEG = 150.0  # edges with a smaller dihedral angle get beveled


@dataclass
class ModifierSpec:
    name: str
    params: Dict[str, object] = field(default_factory=dict)


def apply_modifier(target: Mesh, mod: ModifierSpec, aux: Optional[Mesh] = None) -> Mesh:
    if target.is_empty():
        raise EmptyMesh("modifier target is empty")
    name = mod.name
    p = dict(mod.params)
    if name == "boolean":
        if aux is None or aux.is_empty():
            raise MissingAuxMesh("boolean requires a second operand")
        out = boolean(target, aux, operation=str(p.get("operation", "DIFFERENCE")))
    elif name == "array":
        out = array(target, count=int(p.get("count", 5)),
                    relative_offset=tuple(p.get("relative_offset", (1.2, 0.0, 0.0))))
    elif name == "mirror":
        out = mirror(target, axis=tuple(p.get("axis", (True, False, False))),
                     use_clip=bool(p.get("use_clip", True)))
    elif name == "solidify":
        out = solidify(target, thickness=float(p.get("thickness", 0.2)))
    elif name == "subdivision":
        out = subdivision(target, levels=int(p.get("levels", 2)))
    elif name == "bevel":
        out = bevel(target, width=float(p.get("width", 0.1)),
                    segments=int(p.get("segments", 3)),
                    affect=str(p.get("affect", "EDGES")))
    elif name == "curve":
        if aux is None:
            raise MissingAuxMesh("curve deform requires a curve object")
        out = curve_deform(target, aux, deform_axis=str(p.get("deform_axis", "POS_X")))
    else:
        raise InvalidParam("modifier", f"unknown modifier '{name}'")
    out.component_tag = target.component_tag
    return out


def array(mesh: Mesh, count: int, relative_offset: Sequence[float]) -> Mesh:
    """`count` copies translated by relative_offset * the mesh's Aabb extents."""
    if count < 1:
        raise InvalidParam("count", "must be >= 1")
    off = np.asarray(relative_offset, dtype=np.float64)
    if off.shape != (3,):
        raise InvalidParam("relative_offset", "expected 3 components")
    step = off * compute_aabb(mesh).size
    copies = []
    for k in range(count):
        m = mesh.copy()
        m.vertices = m.vertices + k * step
        copies.append(m)
    out = concat(copies, tag=mesh.component_tag)
    return out


def mirror(mesh: Mesh, axis: Sequence[bool], use_clip: bool = True) -> Mesh:
    """Reflect across the selected coordinate planes and merge all 2^n copies."""
    flags = [bool(a) for a in axis]
    if len(flags) != 3:
        raise InvalidParam("axis", "expected 3 booleans")
    base = mesh.copy()
    if use_clip:
        for a in range(3):
            if not flags[a]:
                continue
            col = base.vertices[:, a]
            # clamp vertices that cross the plane from the dominant side
            if col.mean() >= 0:
                col[col < 0] = 0.0
            else:
                col[col > 0] = 0.0
    pieces = [base]
    for a in range(3):
        if not flags[a]:
            continue
        reflected = []
        for m in pieces:
            r = m.copy()
            r.vertices[:, a] = -r.vertices[:, a]
            r.triangles = r.triangles[:, ::-1]  # keep outward orientation
            reflected.append(r)
        pieces = pieces + reflected
    return concat(pieces, tag=mesh.component_tag)


def solidify(mesh: Mesh, thickness: float) -> Mesh:
    """Offset along vertex normals by `thickness` and stitch a closed shell."""
    if thickness <= 0 or not math.isfinite(thickness):
        raise InvalidParam("thickness", "must be positive and finite")
    normals = vertex_normals(mesh)
    outer = mesh.copy()
    inner = mesh.copy()
    inner.vertices = mesh.vertices - thickness * normals
    inner.triangles = inner.triangles[:, ::-1]
    n = mesh.num_vertices
    tris = [outer.triangles, inner.triangles + n]
    # stitch open boundary edges (edges used by exactly one triangle)
    use: Dict[Tuple[int, int], int] = {}
    directed: Dict[Tuple[int, int], bool] = {}
    for tri in mesh.triangles:
        for i in range(3):
            a, b = int(tri[i]), int(tri[(i + 1) % 3])
            key = (min(a, b), max(a, b))
            use[key] = use.get(key, 0) + 1
            directed[(a, b)] = True
    rim = []
    for (a, b) in directed:
        key = (min(a, b), max(a, b))
        if use[key] == 1:
            # boundary edge a->b on the outer shell; the wall quad traverses it
            # in the opposite direction to stay consistently oriented
            rim.append((b, a, a + n))
            rim.append((b, a + n, b + n))
    if rim:
        tris.append(np.asarray(rim, dtype=np.int64))
    verts = np.vstack([outer.vertices, inner.vertices])
    return Mesh(verts, np.vstack(tris), component_tag=mesh.component_tag)


def subdivision(mesh: Mesh, levels: int) -> Mesh:
    """Loop subdivision; triangle count quadruples per level."""
    if levels < 0:
        raise InvalidParam("levels", "must be >= 0")
    out = mesh.copy()
    for _ in range(levels):
        out = _loop_once(out)
    out.component_tag = mesh.component_tag
    return out


def _loop_once(mesh: Mesh) -> Mesh:
    v = mesh.vertices
    t = mesh.triangles
    nv = len(v)

    # edge -> (adjacent triangles, opposite vertices)
    edges: Dict[Tuple[int, int], List[int]] = {}
    for fi, tri in enumerate(t):
        for i in range(3):
            a, b = int(tri[i]), int(tri[(i + 1) % 3])
            key = (min(a, b), max(a, b))
            edges.setdefault(key, []).append(int(tri[(i + 2) % 3]))

    edge_index: Dict[Tuple[int, int], int] = {}
    edge_points = np.zeros((len(edges), 3))
    boundary_vertex: Dict[int, List[int]] = {}
    for idx, (key, opposite) in enumerate(edges.items()):
        a, b = key
        edge_index[key] = idx
        if len(opposite) >= 2:
            edge_points[idx] = 0.375 * (v[a] + v[b]) + 0.125 * (v[opposite[0]] + v[opposite[1]])
        else:
            edge_points[idx] = 0.5 * (v[a] + v[b])
            boundary_vertex.setdefault(a, []).append(b)
            boundary_vertex.setdefault(b, []).append(a)

    # even (original) vertex update
    neighbors: Dict[int, set] = {}
    for (a, b) in edges:
        neighbors.setdefault(a, set()).add(b)
        neighbors.setdefault(b, set()).add(a)
    new_even = v.copy()
    for i in range(nv):
        if i in boundary_vertex:
            nbrs = boundary_vertex[i]
            if len(nbrs) == 2:
                new_even[i] = 0.75 * v[i] + 0.125 * (v[nbrs[0]] + v[nbrs[1]])
            continue
        nbrs = neighbors.get(i)
        if not nbrs:
            continue
        k = len(nbrs)
        beta = (0.625 - (0.375 + 0.25 * math.cos(2 * math.pi / k)) ** 2) / k
        new_even[i] = (1 - k * beta) * v[i] + beta * v[list(nbrs)].sum(axis=0)

    new_tris = []
    for tri in t:
        a, b, c = (int(x) for x in tri)
        eab = nv + edge_index[(min(a, b), max(a, b))]
        ebc = nv + edge_index[(min(b, c), max(b, c))]
        eca = nv + edge_index[(min(c, a), max(c, a))]
        new_tris.extend([(a, eab, eca), (b, ebc, eab), (c, eca, ebc), (eab, ebc, eca)])
    return Mesh(np.vstack([new_even, edge_points]), np.asarray(new_tris),
                component_tag=mesh.component_tag)


# ---------------------------------------------------------------------------
# bevel (edge chamfer / vertex truncation)
# ---------------------------------------------------------------------------

def _face_groups(mesh: Mesh) -> Tuple[List[List[int]], Dict[Tuple[int, int], List[int]], np.ndarray, np.ndarray]:
    """Merge triangles across flat edges into planar face groups.

    Returns (groups as triangle-index lists, undirected edge -> adjacent
    triangle indices, per-triangle normals, sharp-edge mask keyed by edge).
    """
    fn = face_normals(mesh)
    adj: Dict[Tuple[int, int], List[int]] = {}
    for fi, tri in enumerate(mesh.triangles):
        for i in range(3):
            a, b = int(tri[i]), int(tri[(i + 1) % 3])
            adj.setdefault((min(a, b), max(a, b)), []).append(fi)
    cos_limit = math.cos(math.radians(180.0 - SHARP_DIHEDRAL_DEG))
    sharp: Dict[Tuple[int, int], bool] = {}
    for key, faces in adj.items():
        if len(faces) == 2:
            c = float(fn[faces[0]] @ fn[faces[1]])
            sharp[key] = c < cos_limit  # normals differ by more than the flat tolerance
        else:
            sharp[key] = False  # open or non-manifold edge: never beveled
    group_of = np.full(mesh.num_triangles, -1, dtype=np.int64)
    groups: List[List[int]] = []
    for seed in range(mesh.num_triangles):
        if group_of[seed] >= 0:
            continue
        gid = len(groups)
        stack = [seed]
        group_of[seed] = gid
        members = []
        while stack:
            fi = stack.pop()
            members.append(fi)
            tri = mesh.triangles[fi]
            for i in range(3):
                a, b = int(tri[i]), int(tri[(i + 1) % 3])
                key = (min(a, b), max(a, b))
                if sharp[key]:
                    continue
                for other in adj[key]:
                    if group_of[other] < 0:
                        group_of[other] = gid
                        stack.append(other)
        groups.append(members)
    return groups, adj, fn, sharp


def _group_loop(mesh: Mesh, members: List[int]) -> Optional[List[int]]:
    """Ordered boundary vertex loop of a planar group (None if not a single loop)."""
    member_set = set(members)
    border: Dict[int, int] = {}
    counts: Dict[Tuple[int, int], int] = {}
    for fi in members:
        tri = mesh.triangles[fi]
        for i in range(3):
            a, b = int(tri[i]), int(tri[(i + 1) % 3])
            counts[(min(a, b), max(a, b))] = counts.get((min(a, b), max(a, b)), 0) + 1
    for fi in members:
        tri = mesh.triangles[fi]
        for i in range(3):
            a, b = int(tri[i]), int(tri[(i + 1) % 3])
            if counts[(min(a, b), max(a, b))] == 1:
                if a in border:
                    return None
                border[a] = b
    if not border:
        return None
    start = next(iter(border))
    loop = [start]
    cur = border[start]
    while cur != start:
        loop.append(cur)
        cur = border.get(cur)
        if cur is None or len(loop) > len(border):
            return None
    return loop


def _line_intersect_2d(p1, d1, p2, d2):
    # p1 + t*d1 == p2 + s*d2 in 2D; returns the point, or None if parallel
    denom = d1[0] * d2[1] - d1[1] * d2[0]
    if abs(denom) < 1e-12:
        return None
    t = ((p2[0] - p1[0]) * d2[1] - (p2[1] - p1[1]) * d2[0]) / denom
    return p1 + t * d1


def bevel(mesh: Mesh, width: float, segments: int = 3, affect: str = "EDGES") -> Mesh:
    """Chamfer sharp edges (dihedral < 150 deg) or truncate corners.

    affect=EDGES replaces each sharp edge with a strip of `segments` planar
    facets cut back `width` into each adjacent face. affect=VERTICES cuts the
    corners at vertices with two or more sharp edges instead.
    """
    if width < 0 or not math.isfinite(width):
        raise InvalidParam("width", "must be non-negative and finite")
    if width == 0:
        return mesh.copy()
    if segments < 1:
        raise InvalidParam("segments", "must be >= 1")
    affect = affect.upper()
    if affect not in ("EDGES", "VERTICES"):
        raise InvalidParam("affect", "must be EDGES or VERTICES")
    groups, adj, fn, sharp = _face_groups(mesh)
    if not any(sharp.values()):
        return mesh.copy()
    if affect == "VERTICES":
        return _bevel_vertices(mesh, width, groups, fn, sharp)
    return _bevel_edges(mesh, width, segments, groups, adj, fn, sharp)


def _plane_basis(normal: np.ndarray) -> Tuple[np.ndarray, np.ndarray]:
    ref = np.array([0.0, 0.0, 1.0]) if abs(normal[2]) < 0.9 else np.array([1.0, 0.0, 0.0])
    u = np.cross(normal, ref)
    u /= np.linalg.norm(u)
    return u, np.cross(normal, u)


def _oriented_loop(mesh: Mesh, loop: List[int], normal: np.ndarray) -> List[int]:
    pts = mesh.vertices[loop]
    u, w = _plane_basis(normal)
    p2 = np.column_stack([pts @ u, pts @ w])
    area = 0.0
    for i in range(len(p2)):
        j = (i + 1) % len(p2)
        area += p2[i][0] * p2[j][1] - p2[j][0] * p2[i][1]
    return loop if area > 0 else loop[::-1]


def _bevel_edges(mesh: Mesh, width: float, segments: int,
                 groups, adj, fn, sharp) -> Mesh:
    verts: List[np.ndarray] = []
    tris: List[Tuple[int, int, int]] = []

    def add(p) -> int:
        verts.append(np.asarray(p, dtype=np.float64))
        return len(verts) - 1

    # per-(group, edge) offset corner points, for strip construction later
    edge_side: Dict[Tuple[Tuple[int, int], int], Tuple[int, int, bool]] = {}
    corner_pts: Dict[int, List[int]] = {}  # original vertex -> new vertex ids around it

    group_of_face: Dict[int, int] = {}
    for gid, members in enumerate(groups):
        for fi in members:
            group_of_face[fi] = gid

    for gid, members in enumerate(groups):
        normal = fn[members[0]]
        loop = _group_loop(mesh, members)
        if loop is None:
            # topologically awkward group (e.g. a full closed surface with no
            # sharp edges); keep its triangles untouched
            for fi in members:
                tri = mesh.triangles[fi]
                tris.append(tuple(add(mesh.vertices[x]) for x in tri))
            continue
        loop = _oriented_loop(mesh, loop, normal)
        k = len(loop)
        pts = mesh.vertices[loop]
        u, w = _plane_basis(normal)
        origin = pts[0]
        p2 = np.column_stack([(pts - origin) @ u, (pts - origin) @ w])
        min_edge = min(np.linalg.norm(p2[(i + 1) % k] - p2[i]) for i in range(k))
        d = min(width, 0.45 * min_edge)
        offs = []
        for i in range(k):
            a, b = loop[i], loop[(i + 1) % k]
            offs.append(d if sharp[(min(a, b), max(a, b))] else 0.0)
        new2 = []
        for i in range(k):
            iprev = (i - 1) % k
            e_prev = p2[i] - p2[iprev]
            e_next = p2[(i + 1) % k] - p2[i]
            ln_p, ln_n = np.linalg.norm(e_prev), np.linalg.norm(e_next)
            in_prev = np.array([-e_prev[1], e_prev[0]]) / ln_p  # interior is left of CCW edge
            in_next = np.array([-e_next[1], e_next[0]]) / ln_n
            q = _line_intersect_2d(p2[iprev] + offs[iprev] * in_prev, e_prev,
                                   p2[i] + offs[i] * in_next, e_next)
            if q is None:
                q = p2[i] + offs[iprev] * in_prev + offs[i] * in_next
            new2.append(q)
        ids = [add(origin + q[0] * u + q[1] * w) for q in new2]
        for i in range(1, k - 1):
            tris.append((ids[0], ids[i], ids[i + 1]))
        for i in range(k):
            a, b = loop[i], loop[(i + 1) % k]
            key = (min(a, b), max(a, b))
            if sharp[key]:
                # store offset endpoints in key order plus A's traversal direction
                if a == key[0]:
                    edge_side[(key, gid)] = (ids[i], ids[(i + 1) % k], True)
                else:
                    edge_side[(key, gid)] = (ids[(i + 1) % k], ids[i], False)
            corner_pts.setdefault(loop[i], []).append(ids[i])

    varr = np.asarray(verts)

    # chamfer strips across each sharp edge
    strip_end_pts: Dict[int, List[int]] = {}
    for key, is_sharp in sharp.items():
        if not is_sharp:
            continue
        faces = adj[key]
        if len(faces) != 2:
            continue
        gA = group_of_face[faces[0]]
        gB = group_of_face[faces[1]]
        sideA = edge_side.get((key, gA))
        sideB = edge_side.get((key, gB))
        if sideA is None or sideB is None:
            continue
        a0, a1, a_forward = sideA
        b0, b1, _ = sideB
        rows = [(a0, a1)]
        for s in range(1, segments):
            t = s / segments
            q0 = add((1 - t) * varr[a0] + t * varr[b0])
            q1 = add((1 - t) * varr[a1] + t * varr[b1])
            varr = np.asarray(verts)
            rows.append((q0, q1))
        rows.append((b0, b1))
        for s in range(segments):
            (q0s, q1s), (q0n, q1n) = rows[s], rows[s + 1]
            if a_forward:
                tris.append((q1s, q0s, q0n))
                tris.append((q1s, q0n, q1n))
            else:
                tris.append((q0s, q1s, q1n))
                tris.append((q0s, q1n, q0n))
        strip_end_pts.setdefault(key[0], []).extend(r[0] for r in rows)
        strip_end_pts.setdefault(key[1], []).extend(r[1] for r in rows)

    # fill corner holes at vertices incident to sharp edges
    varr = np.asarray(verts)
    vn = vertex_normals(mesh)
    for vid, face_corner_ids in corner_pts.items():
        if vid not in strip_end_pts:
            continue
        hole = set(face_corner_ids) | set(strip_end_pts[vid])
        if len(hole) < 3:
            continue
        hole_ids = list(hole)
        pts = varr[hole_ids]
        center = pts.mean(axis=0)
        u, w = _plane_basis(vn[vid])
        ang = np.arctan2((pts - center) @ w, (pts - center) @ u)
        order = [hole_ids[i] for i in np.argsort(ang)]
        cid = add(center)
        varr = np.asarray(verts)
        for i in range(len(order)):
            j = (i + 1) % len(order)
            # CCW around the outward vertex normal faces outward
            tris.append((cid, order[i], order[j]))

    return weld(Mesh(np.asarray(verts), np.asarray(tris), component_tag=mesh.component_tag))


def _bevel_vertices(mesh: Mesh, width: float, groups, fn, sharp) -> Mesh:
    verts: List[np.ndarray] = []
    tris: List[Tuple[int, int, int]] = []

    def add(p) -> int:
        verts.append(np.asarray(p, dtype=np.float64))
        return len(verts) - 1

    sharp_count: Dict[int, int] = {}
    for (a, b), s in sharp.items():
        if s:
            sharp_count[a] = sharp_count.get(a, 0) + 1
            sharp_count[b] = sharp_count.get(b, 0) + 1
    cut = {v for v, c in sharp_count.items() if c >= 2}

    # cut points live on edges, shared between the faces using that edge
    cut_point: Dict[Tuple[int, int], int] = {}

    def point_on_edge(v_from: int, v_to: int) -> int:
        key = (v_from, v_to)
        if key in cut_point:
            return cut_point[key]
        p = mesh.vertices[v_from]
        q = mesh.vertices[v_to]
        ln = np.linalg.norm(q - p)
        d = min(width, 0.45 * ln)
        idx = add(p + (q - p) * (d / ln))
        cut_point[key] = idx
        return idx

    corner_ring: Dict[int, List[int]] = {}
    for gid, members in enumerate(groups):
        normal = fn[members[0]]
        loop = _group_loop(mesh, members)
        if loop is None:
            for fi in members:
                tri = mesh.triangles[fi]
                ids = []
                for x in tri:
                    ids.append(add(mesh.vertices[int(x)]))
                tris.append(tuple(ids))
            continue
        loop = _oriented_loop(mesh, loop, normal)
        k = len(loop)
        poly: List[int] = []
        for i in range(k):
            vprev, v, vnext = loop[(i - 1) % k], loop[i], loop[(i + 1) % k]
            if v in cut:
                p_in = point_on_edge(v, vprev)
                p_out = point_on_edge(v, vnext)
                poly.extend([p_in, p_out])
                corner_ring.setdefault(v, []).extend([p_in, p_out])
            else:
                poly.append(add(mesh.vertices[v]))
        for i in range(1, len(poly) - 1):
            tris.append((poly[0], poly[i], poly[i + 1]))

    varr = np.asarray(verts)
    vn = vertex_normals(mesh)
    for vid, ring in corner_ring.items():
        ring = list(dict.fromkeys(ring))
        if len(ring) < 3:
            continue
        pts = varr[ring]
        center = pts.mean(axis=0)
        u, w = _plane_basis(vn[vid])
        ang = np.arctan2((pts - center) @ w, (pts - center) @ u)
        order = [ring[i] for i in np.argsort(ang)]
        cid = add(center)
        varr = np.asarray(verts)
        for i in range(len(order)):
            j = (i + 1) % len(order)
            tris.append((cid, order[i], order[j]))

    return weld(Mesh(np.asarray(verts), np.asarray(tris), component_tag=mesh.component_tag))


# ---------------------------------------------------------------------------
# curve deform
# ---------------------------------------------------------------------------

_AXES = {"POS_X": (0, +1), "NEG_X": (0, -1),
         "POS_Y": (1, +1), "NEG_Y": (1, -1),
         "POS_Z": (2, +1), "NEG_Z": (2, -1)}


def curve_deform(mesh: Mesh, curve: Mesh, deform_axis: str = "POS_X") -> Mesh:
    """Bend the mesh along a curve object's centerline.

    The deform-axis coordinate is normalized over the mesh's Aabb and mapped
    to arclength along the curve; the two orthogonal coordinates ride the
    curve's rotation-minimizing frame.
    """
    if curve.path is None or len(curve.path) < 2:
        raise MissingAuxMesh("curve deform requires a curve object with a path")
    axis_key = deform_axis.upper()
    if axis_key not in _AXES:
        raise InvalidParam("deform_axis", f"unknown axis '{deform_axis}'")
    axis, sign = _AXES[axis_key]
    from .curves import _rm_frames  # shared frame computation

    path = curve.path
    closed = curve.path_closed
    tangents, normals, binormals = _rm_frames(path, closed)
    seg = np.linalg.norm(np.diff(path, axis=0), axis=1)
    arclen = np.concatenate([[0.0], np.cumsum(seg)])
    total = arclen[-1]
    if total <= 0:
        raise InvalidParam("curve_obj", "curve has zero length")

    box = compute_aabb(mesh)
    lo, hi = np.asarray(box.min), np.asarray(box.max)
    extent = hi[axis] - lo[axis]
    other = [a for a in range(3) if a != axis]
    center = (lo + hi) / 2.0

    out = mesh.copy()
    new = np.empty_like(mesh.vertices)
    for i, p in enumerate(mesh.vertices):
        if extent > 0:
            t = (p[axis] - lo[axis]) / extent
        else:
            t = 0.5
        if sign < 0:
            t = 1.0 - t
        s = np.clip(t, 0.0, 1.0) * total
        j = int(np.searchsorted(arclen, s, side="right") - 1)
        j = min(max(j, 0), len(path) - 2)
        f = 0.0 if seg[j] == 0 else (s - arclen[j]) / seg[j]
        pos = (1 - f) * path[j] + f * path[j + 1]
        nrm = (1 - f) * normals[j] + f * normals[j + 1]
        bin_ = (1 - f) * binormals[j] + f * binormals[j + 1]
        u_off = p[other[0]] - center[other[0]]
        w_off = p[other[1]] - center[other[1]]
        new[i] = pos + u_off * nrm + w_off * bin_
    out.vertices = new
    return out
