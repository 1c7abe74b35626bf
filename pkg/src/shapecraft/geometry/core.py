"""Core mesh value types: Mesh, Aabb, Transform, and basic queries.

Coordinates are unitless scene coordinates with the z-axis pointing up.
All operations are pure; meshes are treated as immutable values and every
operation returns a fresh mesh.
"""
from __future__ import annotations

import math
import warnings
from dataclasses import dataclass, field
from typing import Iterable, Optional, Sequence

import numpy as np

from ..errors import EmptyMesh, GeometryWarning, InvalidParam

Vec3 = tuple[float, float, float]


def check_vec3(value, name: str = "vector") -> np.ndarray:
    """Coerce to a finite float 3-vector or raise InvalidParam."""
    arr = np.asarray(value, dtype=np.float64)
    if arr.shape != (3,):
        raise InvalidParam(name, f"expected 3 components, got shape {arr.shape}")
    if not np.all(np.isfinite(arr)):
        raise InvalidParam(name, "components must be finite")
    return arr


@dataclass
class Mesh:
    """Indexed triangle mesh.

    vertices: (n, 3) float64 array of positions.
    triangles: (m, 3) int64 array of CCW-oriented vertex indices.
    component_tag: optional label carried into OBJ `o` groups.
    path: optional (k, 3) centerline polyline, set by curve constructors so
        the curve-deform modifier can follow the original path even when the
        swept surface is empty.
    """

    vertices: np.ndarray
    triangles: np.ndarray
    component_tag: Optional[str] = None
    path: Optional[np.ndarray] = None
    path_closed: bool = False

    def __post_init__(self):
        self.vertices = np.asarray(self.vertices, dtype=np.float64).reshape(-1, 3)
        self.triangles = np.asarray(self.triangles, dtype=np.int64).reshape(-1, 3)
        if self.path is not None:
            self.path = np.asarray(self.path, dtype=np.float64).reshape(-1, 3)

    @staticmethod
    def empty(tag: Optional[str] = None) -> "Mesh":
        return Mesh(np.zeros((0, 3)), np.zeros((0, 3), dtype=np.int64), component_tag=tag)

    @property
    def num_vertices(self) -> int:
        return int(self.vertices.shape[0])

    @property
    def num_triangles(self) -> int:
        return int(self.triangles.shape[0])

    def is_empty(self) -> bool:
        return self.num_vertices == 0

    def copy(self) -> "Mesh":
        return Mesh(
            self.vertices.copy(),
            self.triangles.copy(),
            component_tag=self.component_tag,
            path=None if self.path is None else self.path.copy(),
            path_closed=self.path_closed,
        )

    def with_tag(self, tag: Optional[str]) -> "Mesh":
        m = self.copy()
        m.component_tag = tag
        return m

    def validate(self) -> None:
        if self.num_triangles:
            if self.triangles.min() < 0 or self.triangles.max() >= self.num_vertices:
                raise InvalidParam("triangles", "index out of range")
            a, b, c = self.triangles.T
            if np.any((a == b) | (b == c) | (a == c)):
                raise InvalidParam("triangles", "triangle repeats a vertex index")
        if self.num_vertices and not np.all(np.isfinite(self.vertices)):
            raise InvalidParam("vertices", "non-finite coordinates")


@dataclass(frozen=True)
class Aabb:
    """Axis-aligned bounding box (componentwise min/max corners)."""

    min: Vec3
    max: Vec3

    @property
    def center(self) -> np.ndarray:
        return (np.asarray(self.min) + np.asarray(self.max)) / 2.0

    @property
    def size(self) -> np.ndarray:
        return np.asarray(self.max) - np.asarray(self.min)

    def corners(self) -> np.ndarray:
        lo, hi = np.asarray(self.min), np.asarray(self.max)
        return np.array(
            [[x, y, z] for x in (lo[0], hi[0]) for y in (lo[1], hi[1]) for z in (lo[2], hi[2])]
        )


@dataclass(frozen=True)
class Transform:
    """Scale, then intrinsic XYZ Euler rotation (radians), then translation."""

    position: Vec3 = (0.0, 0.0, 0.0)
    rotation: Vec3 = (0.0, 0.0, 0.0)
    scale: Vec3 = (1.0, 1.0, 1.0)

    def matrix(self) -> np.ndarray:
        """4x4 homogeneous matrix applying scale -> Rx -> Ry -> Rz -> translate."""
        sx, sy, sz = check_vec3(self.scale, "scale")
        rx, ry, rz = check_vec3(self.rotation, "rotation")
        tx, ty, tz = check_vec3(self.position, "position")
        s = np.diag([sx, sy, sz, 1.0])
        cx, sx_ = math.cos(rx), math.sin(rx)
        cy, sy_ = math.cos(ry), math.sin(ry)
        cz, sz_ = math.cos(rz), math.sin(rz)
        rmx = np.array([[1, 0, 0, 0], [0, cx, -sx_, 0], [0, sx_, cx, 0], [0, 0, 0, 1]], dtype=np.float64)
        rmy = np.array([[cy, 0, sy_, 0], [0, 1, 0, 0], [-sy_, 0, cy, 0], [0, 0, 0, 1]], dtype=np.float64)
        rmz = np.array([[cz, -sz_, 0, 0], [sz_, cz, 0, 0], [0, 0, 1, 0], [0, 0, 0, 1]], dtype=np.float64)
        t = np.eye(4)
        t[:3, 3] = (tx, ty, tz)
        return t @ rmz @ rmy @ rmx @ s

    def compose(self, inner: "Transform") -> np.ndarray:
        """Matrix equivalent to applying `inner` first, then this transform."""
        return self.matrix() @ inner.matrix()


def apply_matrix(mesh: Mesh, m: np.ndarray) -> Mesh:
    out = mesh.copy()
    if out.num_vertices:
        out.vertices = (mesh.vertices @ m[:3, :3].T) + m[:3, 3]
    if out.path is not None and len(out.path):
        out.path = (out.path @ m[:3, :3].T) + m[:3, 3]
    return out


def transform(mesh: Mesh, t: Transform) -> Mesh:
    """Apply a Transform to every vertex; topology is unchanged."""
    if any(abs(s) == 0.0 for s in t.scale):
        warnings.warn("transform has a zero scale component", GeometryWarning, stacklevel=2)
    return apply_matrix(mesh, t.matrix())


def compute_aabb(mesh: Mesh) -> Aabb:
    if mesh.is_empty():
        raise EmptyMesh("cannot compute bounds of an empty mesh")
    lo = mesh.vertices.min(axis=0)
    hi = mesh.vertices.max(axis=0)
    return Aabb(tuple(lo), tuple(hi))


def concat(meshes: Iterable[Mesh], tag: Optional[str] = None) -> Mesh:
    """Concatenate meshes into one (no welding, no CSG)."""
    meshes = [m for m in meshes]
    verts = []
    tris = []
    offset = 0
    for m in meshes:
        if m.is_empty():
            continue
        verts.append(m.vertices)
        tris.append(m.triangles + offset)
        offset += m.num_vertices
    if not verts:
        return Mesh.empty(tag)
    return Mesh(np.vstack(verts), np.vstack(tris), component_tag=tag)


def signed_volume(mesh: Mesh) -> float:
    """Signed enclosed volume via the divergence theorem (tetra fan at origin)."""
    if mesh.num_triangles == 0:
        return 0.0
    v = mesh.vertices
    a = v[mesh.triangles[:, 0]]
    b = v[mesh.triangles[:, 1]]
    c = v[mesh.triangles[:, 2]]
    return float(np.einsum("ij,ij->i", a, np.cross(b, c)).sum() / 6.0)


def _edge_use_counts(mesh: Mesh) -> dict:
    counts: dict = {}
    for tri in mesh.triangles:
        for i in range(3):
            e = (int(tri[i]), int(tri[(i + 1) % 3]))
            key = (min(e), max(e))
            counts[key] = counts.get(key, 0) + 1
    return counts


def boundary_edge_count(mesh: Mesh) -> int:
    """Number of edges used by exactly one triangle."""
    return sum(1 for c in _edge_use_counts(mesh).values() if c == 1)


def is_closed(mesh: Mesh) -> bool:
    """True if every edge is shared by exactly two triangles."""
    if mesh.num_triangles == 0:
        return False
    return all(c == 2 for c in _edge_use_counts(mesh).values())


def vertex_normals(mesh: Mesh) -> np.ndarray:
    """Area-weighted per-vertex normals (unnormalized faces summed, then unit)."""
    normals = np.zeros_like(mesh.vertices)
    v = mesh.vertices
    t = mesh.triangles
    fn = np.cross(v[t[:, 1]] - v[t[:, 0]], v[t[:, 2]] - v[t[:, 0]])
    for k in range(3):
        np.add.at(normals, t[:, k], fn)
    lens = np.linalg.norm(normals, axis=1)
    lens[lens == 0] = 1.0
    return normals / lens[:, None]


def face_normals(mesh: Mesh) -> np.ndarray:
    v = mesh.vertices
    t = mesh.triangles
    fn = np.cross(v[t[:, 1]] - v[t[:, 0]], v[t[:, 2]] - v[t[:, 0]])
    lens = np.linalg.norm(fn, axis=1)
    lens[lens == 0] = 1.0
    return fn / lens[:, None]


def weld(mesh: Mesh, tol: float = 1e-9) -> Mesh:
    """Merge coincident vertices (within tol) and drop degenerate triangles."""
    if mesh.is_empty():
        return mesh.copy()
    keys = np.round(mesh.vertices / tol).astype(np.int64) if tol > 0 else mesh.vertices
    _, first, inverse = np.unique(keys, axis=0, return_index=True, return_inverse=True)
    verts = mesh.vertices[first]
    tris = inverse[mesh.triangles]
    a, b, c = tris.T
    keep = (a != b) & (b != c) & (a != c)
    return Mesh(verts, tris[keep], component_tag=mesh.component_tag,
                path=mesh.path, path_closed=mesh.path_closed)
