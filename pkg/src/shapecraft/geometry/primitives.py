"""Mesh primitives.

Sizing conventions (at scale=(1,1,1)):
  cube / plane      half-extent 1 per axis (Aabb [-1, 1])
  sphere            radius 1
  cylinder / cone / prism   radius 1 (or `radius`), `depth`/`height` = full z-extent
  pyramid           square base `base_size`, full height `height`, centered on z
  capsule           cylinder of full height `height` plus two welded hemispheres

Construction formulas (used by the count tests):
  cube      8 vertices, 12 triangles
  plane     4 vertices, 2 triangles
  sphere    segments*(rings-1) + 2 vertices, 2*segments*(rings-1) triangles
  cylinder  2*vertices + 2, 4*vertices
  cone      vertices + 2, 2*vertices
  pyramid   5 vertices, 6 triangles
  prism     2*sides + 2, 4*sides
  capsule   with r = max(1, segments // 4) hemisphere rings:
            2*r*segments + 2 vertices, 4*r*segments triangles
"""
from __future__ import annotations

import math
from typing import Callable, Dict

import numpy as np

from ..errors import InvalidParam, UnknownPrimitive
from .core import Mesh, Transform, transform

PRIMITIVE_KINDS = (
    "cube", "sphere", "cylinder", "cone", "plane", "pyramid", "capsule", "prism",
)


def _positive(params: dict, name: str, default: float) -> float:
    v = float(params.pop(name, default))
    if not (v > 0) or not math.isfinite(v):
        raise InvalidParam(name, "must be a positive finite number")
    return v


def _count(params: dict, name: str, default: int, minimum: int = 3) -> int:
    v = params.pop(name, default)
    if int(v) != v:
        raise InvalidParam(name, "must be an integer")
    v = int(v)
    if v < minimum:
        raise InvalidParam(name, f"must be >= {minimum}")
    return v


def _pop_transform(params: dict) -> Transform:
    return Transform(
        position=tuple(params.pop("position", (0.0, 0.0, 0.0))),
        rotation=tuple(params.pop("rotation", (0.0, 0.0, 0.0))),
        scale=tuple(params.pop("scale", (1.0, 1.0, 1.0))),
    )


def _reject_extras(params: dict, kind: str) -> None:
    params.pop("name", None)
    if params:
        raise InvalidParam(next(iter(params)), f"unknown parameter for '{kind}'")


def _ring(n: int, radius: float, z: float) -> np.ndarray:
    ang = np.arange(n) * (2.0 * math.pi / n)
    return np.column_stack([radius * np.cos(ang), radius * np.sin(ang), np.full(n, z)])


def _band(tris: list, lower: int, upper: int, n: int) -> None:
    # two triangles per quad between consecutive rings of n vertices
    for i in range(n):
        j = (i + 1) % n
        tris.append((lower + i, lower + j, upper + j))
        tris.append((lower + i, upper + j, upper + i))


def _cap(tris: list, ring_start: int, n: int, center: int, up: bool) -> None:
    for i in range(n):
        j = (i + 1) % n
        if up:
            tris.append((center, ring_start + i, ring_start + j))
        else:
            tris.append((center, ring_start + j, ring_start + i))


def _cube(params: dict) -> Mesh:
    verts = np.array(
        [[x, y, z] for x in (-1, 1) for y in (-1, 1) for z in (-1, 1)], dtype=np.float64
    )
    # indices: bit0=z, bit1=y, bit2=x
    quads = [
        (0, 1, 3, 2),  # x = -1
        (4, 6, 7, 5),  # x = +1
        (0, 4, 5, 1),  # y = -1
        (2, 3, 7, 6),  # y = +1
        (0, 2, 6, 4),  # z = -1
        (1, 5, 7, 3),  # z = +1
    ]
    tris = []
    for a, b, c, d in quads:
        tris.append((a, b, c))
        tris.append((a, c, d))
    return Mesh(verts, np.array(tris))


def _plane(params: dict) -> Mesh:
    size = _positive(params, "size", 2.0)
    h = size / 2.0
    verts = np.array([[-h, -h, 0], [h, -h, 0], [h, h, 0], [-h, h, 0]], dtype=np.float64)
    tris = np.array([(0, 1, 2), (0, 2, 3)])
    return Mesh(verts, tris)


def _sphere(params: dict) -> Mesh:
    segments = _count(params, "segments", 32)
    rings = _count(params, "rings", 16)
    verts = [np.array([[0.0, 0.0, -1.0]])]
    for r in range(1, rings):
        phi = math.pi * r / rings - math.pi / 2.0
        verts.append(_ring(segments, math.cos(phi), math.sin(phi)))
    verts.append(np.array([[0.0, 0.0, 1.0]]))
    v = np.vstack(verts)
    tris: list = []
    _cap(tris, 1, segments, 0, up=False)
    for r in range(rings - 2):
        _band(tris, 1 + r * segments, 1 + (r + 1) * segments, segments)
    top = 1 + (rings - 1) * segments
    _cap(tris, top - segments, segments, top, up=True)
    return Mesh(v, np.array(tris))


def _tube_with_caps(n: int, radius: float, z0: float, z1: float) -> Mesh:
    verts = np.vstack([_ring(n, radius, z0), _ring(n, radius, z1),
                       [[0.0, 0.0, z0]], [[0.0, 0.0, z1]]])
    tris: list = []
    _band(tris, 0, n, n)
    _cap(tris, 0, n, 2 * n, up=False)
    _cap(tris, n, n, 2 * n + 1, up=True)
    return Mesh(verts, np.array(tris))


def _cylinder(params: dict) -> Mesh:
    n = _count(params, "vertices", 32)
    depth = _positive(params, "depth", 2.0)
    return _tube_with_caps(n, 1.0, -depth / 2.0, depth / 2.0)


def _prism(params: dict) -> Mesh:
    sides = _count(params, "sides", 3)
    radius = _positive(params, "radius", 1.0)
    height = _positive(params, "height", 2.0)
    return _tube_with_caps(sides, radius, -height / 2.0, height / 2.0)


def _cone(params: dict) -> Mesh:
    n = _count(params, "vertices", 32)
    radius = _positive(params, "radius", 1.0)
    depth = _positive(params, "depth", 2.0)
    verts = np.vstack([_ring(n, radius, -depth / 2.0),
                       [[0.0, 0.0, depth / 2.0]], [[0.0, 0.0, -depth / 2.0]]])
    tris: list = []
    _cap(tris, 0, n, n, up=True)       # side fan to apex
    _cap(tris, 0, n, n + 1, up=False)  # base
    return Mesh(verts, np.array(tris))


def _pyramid(params: dict) -> Mesh:
    base = _positive(params, "base_size", 2.0)
    height = _positive(params, "height", 2.0)
    h = base / 2.0
    z0, z1 = -height / 2.0, height / 2.0
    verts = np.array([[-h, -h, z0], [h, -h, z0], [h, h, z0], [-h, h, z0], [0, 0, z1]],
                     dtype=np.float64)
    tris = np.array([
        (0, 1, 4), (1, 2, 4), (2, 3, 4), (3, 0, 4),  # sides
        (0, 2, 1), (0, 3, 2),                         # base
    ])
    return Mesh(verts, tris)


def _capsule(params: dict) -> Mesh:
    radius = _positive(params, "radius", 1.0)
    height = _positive(params, "height", 2.0)
    segments = _count(params, "segments", 32)
    hr = max(1, segments // 4)  # rings per hemisphere
    z_lo, z_hi = -height / 2.0, height / 2.0
    rings = [np.array([[0.0, 0.0, z_lo - radius]])]
    for r in range(1, hr + 1):
        phi = -math.pi / 2.0 + (math.pi / 2.0) * r / hr
        rings.append(_ring(segments, radius * math.cos(phi), z_lo + radius * math.sin(phi)))
    for r in range(hr):
        phi = (math.pi / 2.0) * r / hr
        rings.append(_ring(segments, radius * math.cos(phi), z_hi + radius * math.sin(phi)))
    rings.append(np.array([[0.0, 0.0, z_hi + radius]]))
    v = np.vstack(rings)
    nr = 2 * hr  # full rings
    tris: list = []
    _cap(tris, 1, segments, 0, up=False)
    for r in range(nr - 1):
        _band(tris, 1 + r * segments, 1 + (r + 1) * segments, segments)
    top = 1 + nr * segments
    _cap(tris, top - segments, segments, top, up=True)
    return Mesh(v, np.array(tris))


_BUILDERS: Dict[str, Callable[[dict], Mesh]] = {
    "cube": _cube,
    "sphere": _sphere,
    "cylinder": _cylinder,
    "cone": _cone,
    "plane": _plane,
    "pyramid": _pyramid,
    "capsule": _capsule,
    "prism": _prism,
}


def make_primitive(kind: str, **params) -> Mesh:
    """Build one of the eight primitives, applying any transform kwargs."""
    if kind not in _BUILDERS:
        raise UnknownPrimitive(kind)
    params = dict(params)
    t = _pop_transform(params)
    builder = _BUILDERS[kind]
    mesh = builder(params)
    _reject_extras(params, kind)
    return transform(mesh, t)
