"""Boolean mesh operations via BSP trees.

Classic CSG on polygon soups: a BSP tree per operand, `clip_to` removes the
parts of one tree inside the other, `invert` swaps solid and empty space.
Union, difference, and intersection are compositions of those two moves.
Plane classification uses EPSILON = 1e-7. When the operands share coplanar
faces, the second operand is inflated by 2e-7 along its vertex normals first
(recorded as a GeometryWarning) so the split logic never has to resolve
exactly-overlapping polygons.
"""
from __future__ import annotations

import warnings
from typing import List, Optional

import numpy as np

from ..errors import GeometryWarning, InvalidParam, NonManifoldOperand
from .core import Mesh, is_closed, vertex_normals, weld

EPSILON = 1e-7
COPLANAR_PUSH = 2e-7

_COPLANAR = 0
_FRONT = 1
_BACK = 2
_SPANNING = 3


class _Plane:
    __slots__ = ("normal", "w")

    def __init__(self, normal: np.ndarray, w: float):
        self.normal = normal
        self.w = w

    @staticmethod
    def from_points(a, b, c) -> Optional["_Plane"]:
        n = np.cross(b - a, c - a)
        ln = np.linalg.norm(n)
        if ln < 1e-14:
            return None
        n = n / ln
        return _Plane(n, float(n @ a))

    def flip(self):
        self.normal = -self.normal
        self.w = -self.w

    def split_polygon(self, poly: "_Polygon", coplanar_front, coplanar_back, front, back):
        types = []
        ptype = 0
        for v in poly.vertices:
            t = self.normal @ v - self.w
            k = _COPLANAR if -EPSILON < t < EPSILON else (_FRONT if t > 0 else _BACK)
            ptype |= k
            types.append(k)
        if ptype == _COPLANAR:
            (coplanar_front if self.normal @ poly.plane.normal > 0 else coplanar_back).append(poly)
        elif ptype == _FRONT:
            front.append(poly)
        elif ptype == _BACK:
            back.append(poly)
        else:
            f: List[np.ndarray] = []
            b: List[np.ndarray] = []
            n = len(poly.vertices)
            for i in range(n):
                j = (i + 1) % n
                ti, tj = types[i], types[j]
                vi, vj = poly.vertices[i], poly.vertices[j]
                if ti != _BACK:
                    f.append(vi)
                if ti != _FRONT:
                    b.append(vi)
                if (ti | tj) == _SPANNING:
                    t = (self.w - self.normal @ vi) / (self.normal @ (vj - vi))
                    v = vi + t * (vj - vi)
                    f.append(v)
                    b.append(v)
            if len(f) >= 3:
                p = _Polygon(f, poly.plane)
                if p.plane is not None:
                    front.append(p)
            if len(b) >= 3:
                p = _Polygon(b, poly.plane)
                if p.plane is not None:
                    back.append(p)


class _Polygon:
    __slots__ = ("vertices", "plane")

    def __init__(self, vertices, plane: Optional[_Plane] = None):
        self.vertices = [np.asarray(v, dtype=np.float64) for v in vertices]
        if plane is None:
            plane = _Plane.from_points(self.vertices[0], self.vertices[1], self.vertices[2])
        else:
            plane = _Plane(plane.normal.copy(), plane.w)
        self.plane = plane

    def clone(self) -> "_Polygon":
        return _Polygon([v.copy() for v in self.vertices], self.plane)

    def flip(self):
        self.vertices.reverse()
        self.plane.flip()


class _Node:
    """BSP node: a splitting plane, coplanar polygons, and front/back subtrees."""

    __slots__ = ("plane", "front", "back", "polygons")

    def __init__(self, polygons: Optional[List[_Polygon]] = None):
        self.plane: Optional[_Plane] = None
        self.front: Optional[_Node] = None
        self.back: Optional[_Node] = None
        self.polygons: List[_Polygon] = []
        if polygons:
            self.build(polygons)

    def invert(self):
        stack = [self]
        while stack:
            node = stack.pop()
            for p in node.polygons:
                p.flip()
            if node.plane is not None:
                node.plane.flip()
            node.front, node.back = node.back, node.front
            if node.front:
                stack.append(node.front)
            if node.back:
                stack.append(node.back)

    def clip_polygons(self, polygons: List[_Polygon]) -> List[_Polygon]:
        if self.plane is None:
            return [p.clone() for p in polygons]
        front: List[_Polygon] = []
        back: List[_Polygon] = []
        for p in polygons:
            self.plane.split_polygon(p, front, back, front, back)
        if self.front:
            front = self.front.clip_polygons(front)
        back = self.back.clip_polygons(back) if self.back else []
        return front + back

    def clip_to(self, other: "_Node"):
        stack = [self]
        while stack:
            node = stack.pop()
            node.polygons = other.clip_polygons(node.polygons)
            if node.front:
                stack.append(node.front)
            if node.back:
                stack.append(node.back)

    def all_polygons(self) -> List[_Polygon]:
        out: List[_Polygon] = []
        stack = [self]
        while stack:
            node = stack.pop()
            out.extend(node.polygons)
            if node.front:
                stack.append(node.front)
            if node.back:
                stack.append(node.back)
        return out

    def build(self, polygons: List[_Polygon]):
        if not polygons:
            return
        if self.plane is None:
            self.plane = _Plane(polygons[0].plane.normal.copy(), polygons[0].plane.w)
        front: List[_Polygon] = []
        back: List[_Polygon] = []
        for p in polygons:
            self.plane.split_polygon(p, self.polygons, self.polygons, front, back)
        if front:
            if self.front is None:
                self.front = _Node()
            self.front.build(front)
        if back:
            if self.back is None:
                self.back = _Node()
            self.back.build(back)


def _mesh_to_polygons(mesh: Mesh) -> List[_Polygon]:
    polys = []
    v = mesh.vertices
    for tri in mesh.triangles:
        p = _Polygon([v[tri[0]], v[tri[1]], v[tri[2]]])
        if p.plane is not None:
            polys.append(p)
    return polys


def _polygons_to_mesh(polys: List[_Polygon]) -> Mesh:
    verts: List[np.ndarray] = []
    tris: List[tuple] = []
    for p in polys:
        base = len(verts)
        verts.extend(p.vertices)
        for i in range(1, len(p.vertices) - 1):
            tris.append((base, base + i, base + i + 1))
    if not tris:
        return Mesh.empty()
    return weld(Mesh(np.asarray(verts), np.asarray(tris)))


def _face_planes(mesh: Mesh) -> np.ndarray:
    v = mesh.vertices
    t = mesh.triangles
    n = np.cross(v[t[:, 1]] - v[t[:, 0]], v[t[:, 2]] - v[t[:, 0]])
    lens = np.linalg.norm(n, axis=1)
    good = lens > 1e-14
    n = n[good] / lens[good, None]
    w = np.einsum("ij,ij->i", n, v[t[good, 0]])
    return np.column_stack([n, w])


def _has_coplanar_faces(a: Mesh, b: Mesh, tol: float = 1e-6) -> bool:
    # shared planes only matter where the solids can actually touch
    lo = np.maximum(a.vertices.min(axis=0), b.vertices.min(axis=0))
    hi = np.minimum(a.vertices.max(axis=0), b.vertices.max(axis=0))
    if np.any(lo > hi + tol):
        return False
    pa = _face_planes(a)
    pb = _face_planes(b)
    for pl in pa:
        d = np.abs(pb - pl).max(axis=1)
        dflip = np.abs(pb + pl).max(axis=1)
        if np.any(np.minimum(d, dflip) < tol):
            return True
    return False


def boolean(a: Mesh, b: Mesh, operation: str = "DIFFERENCE") -> Mesh:
    """UNION, DIFFERENCE, or INTERSECT of two closed manifold meshes."""
    op = operation.upper()
    if op not in ("UNION", "DIFFERENCE", "INTERSECT"):
        raise InvalidParam("operation", f"unknown boolean operation '{operation}'")
    for name, m in (("first", a), ("second", b)):
        if not is_closed(m):
            raise NonManifoldOperand(f"{name} boolean operand is not a closed manifold")
    if _has_coplanar_faces(a, b):
        warnings.warn(
            f"boolean operands share coplanar faces; second operand inflated by "
            f"{COPLANAR_PUSH:g} along vertex normals", GeometryWarning, stacklevel=2)
        b = b.copy()
        b.vertices = b.vertices + COPLANAR_PUSH * vertex_normals(b)

    na = _Node(_mesh_to_polygons(a))
    nb = _Node(_mesh_to_polygons(b))
    if op == "UNION":
        na.clip_to(nb)
        nb.clip_to(na)
        nb.invert()
        nb.clip_to(na)
        nb.invert()
        na.build(nb.all_polygons())
    elif op == "DIFFERENCE":
        na.invert()
        na.clip_to(nb)
        nb.clip_to(na)
        nb.invert()
        nb.clip_to(na)
        nb.invert()
        na.build(nb.all_polygons())
        na.invert()
    else:  # INTERSECT
        na.invert()
        nb.clip_to(na)
        nb.invert()
        na.clip_to(nb)
        nb.clip_to(na)
        na.build(nb.all_polygons())
        na.invert()
    out = _polygons_to_mesh(na.all_polygons())
    out.component_tag = a.component_tag
    return out
