"""Curve objects: swept tubes and extruded ribbons along 3D paths.

A curve object is still a Mesh; the sampled centerline is kept on
``Mesh.path`` so the curve-deform modifier can follow it. With
bevel_depth == 0 and extrude == 0 the swept surface is empty (a bare curve
has no area) and a GeometryWarning is emitted.
"""
from __future__ import annotations

import math
import warnings
from typing import Sequence

import numpy as np

from ..errors import DegenerateCurve, GeometryWarning, InvalidParam, UnknownPrimitive
from .core import Mesh

CURVE_KINDS = ("bezier_curve", "circle", "polyline")

BEVEL_SECTIONS = 8  # cross-section resolution of swept tubes
BEZIER_SAMPLES_PER_SPAN = 12


def _check_points(points, minimum: int) -> np.ndarray:
    pts = np.asarray(points, dtype=np.float64)
    if pts.ndim != 2 or pts.shape[1] not in (2, 3):
        raise InvalidParam("points", "expected a list of 2- or 3-tuples")
    if pts.shape[1] == 2:
        pts = np.column_stack([pts, np.zeros(len(pts))])
    if len(pts) < minimum:
        raise InvalidParam("points", f"need at least {minimum} control points")
    if not np.all(np.isfinite(pts)):
        raise InvalidParam("points", "coordinates must be finite")
    deltas = np.linalg.norm(np.diff(pts, axis=0), axis=1)
    if np.any(deltas < 1e-12):
        raise DegenerateCurve("coincident consecutive control points")
    return pts


def _nonneg(value, name: str) -> float:
    v = float(value)
    if v < 0 or not math.isfinite(v):
        raise InvalidParam(name, "must be >= 0 and finite")
    return v


def _catmull_rom(pts: np.ndarray, samples_per_span: int) -> np.ndarray:
    """Interpolating spline through the control points (uniform Catmull-Rom)."""
    if len(pts) == 2:
        t = np.linspace(0.0, 1.0, samples_per_span + 1)[:, None]
        return pts[0] * (1 - t) + pts[1] * t
    padded = np.vstack([2 * pts[0] - pts[1], pts, 2 * pts[-1] - pts[-2]])
    out = [pts[0]]
    for i in range(len(pts) - 1):
        p0, p1, p2, p3 = padded[i], padded[i + 1], padded[i + 2], padded[i + 3]
        for s in range(1, samples_per_span + 1):
            t = s / samples_per_span
            t2, t3 = t * t, t * t * t
            point = 0.5 * ((2 * p1) + (-p0 + p2) * t
                           + (2 * p0 - 5 * p1 + 4 * p2 - p3) * t2
                           + (-p0 + 3 * p1 - 3 * p2 + p3) * t3)
            out.append(point)
    return np.asarray(out)


def _rm_frames(path: np.ndarray, closed: bool) -> tuple[np.ndarray, np.ndarray, np.ndarray]:
    """Tangents plus a rotation-minimizing (normal, binormal) frame per sample."""
    n = len(path)
    if closed:
        tangents = np.roll(path, -1, axis=0) - np.roll(path, 1, axis=0)
    else:
        tangents = np.empty_like(path)
        tangents[0] = path[1] - path[0]
        tangents[-1] = path[-1] - path[-2]
        tangents[1:-1] = path[2:] - path[:-2]
    lens = np.linalg.norm(tangents, axis=1)
    lens[lens == 0] = 1.0
    tangents = tangents / lens[:, None]

    # initial normal: any unit vector orthogonal to the first tangent
    t0 = tangents[0]
    ref = np.array([0.0, 0.0, 1.0]) if abs(t0[2]) < 0.9 else np.array([0.0, 1.0, 0.0])
    normal = np.cross(t0, ref)
    normal /= np.linalg.norm(normal)
    normals = np.empty_like(path)
    binormals = np.empty_like(path)
    normals[0] = normal
    binormals[0] = np.cross(t0, normal)
    for i in range(1, n):
        # double-reflection step
        v1 = path[i] - path[i - 1]
        c1 = v1 @ v1
        if c1 < 1e-18:
            normals[i] = normals[i - 1]
        else:
            nl = normals[i - 1] - (2.0 / c1) * (v1 @ normals[i - 1]) * v1
            tl = tangents[i - 1] - (2.0 / c1) * (v1 @ tangents[i - 1]) * v1
            v2 = tangents[i] - tl
            c2 = v2 @ v2
            normals[i] = nl if c2 < 1e-18 else nl - (2.0 / c2) * (v2 @ nl) * v2
        binormals[i] = np.cross(tangents[i], normals[i])
    return tangents, normals, binormals


def _sweep_tube(path: np.ndarray, radius: float, closed: bool, fill_caps: bool,
                frames=None) -> Mesh:
    n = len(path)
    k = BEVEL_SECTIONS
    if frames is None:
        _, normals, binormals = _rm_frames(path, closed)
    else:
        _, normals, binormals = frames
    ang = np.arange(k) * (2.0 * math.pi / k)
    cs, sn = np.cos(ang), np.sin(ang)
    verts = []
    for i in range(n):
        ring = path[i] + radius * (np.outer(cs, normals[i]) + np.outer(sn, binormals[i]))
        verts.append(ring)
    v = np.vstack(verts)
    tris: list = []
    spans = n if closed else n - 1
    for s in range(spans):
        a = s * k
        b = ((s + 1) % n) * k
        for i in range(k):
            j = (i + 1) % k
            tris.append((a + i, a + j, b + j))
            tris.append((a + i, b + j, b + i))
    extra = []
    if not closed and fill_caps:
        extra = [path[0], path[-1]]
        c0, c1 = len(v), len(v) + 1
        for i in range(k):
            j = (i + 1) % k
            tris.append((c0, (i + 1) % k, i))  # start cap faces backwards
            tris.append((c1, (n - 1) * k + i, (n - 1) * k + j))
        v = np.vstack([v, extra])
    return Mesh(v, np.array(tris), path=path, path_closed=closed)


def _extrude_ribbon(path: np.ndarray, half_height: float, closed: bool,
                    fill_caps: bool) -> Mesh:
    n = len(path)
    lo = path + np.array([0.0, 0.0, -half_height])
    hi = path + np.array([0.0, 0.0, half_height])
    v = np.vstack([lo, hi])
    tris: list = []
    spans = n if closed else n - 1
    for s in range(spans):
        a, b = s, (s + 1) % n
        tris.append((a, b, n + b))
        tris.append((a, n + b, n + a))
    # fill_caps is a no-op for ribbons: the open ends are zero-area segments
    del fill_caps
    return Mesh(v, np.array(tris), path=path, path_closed=closed)


def _finish(path: np.ndarray, closed: bool, bevel_depth: float, extrude: float,
            fill_caps: bool) -> Mesh:
    if bevel_depth > 0 and extrude > 0:
        warnings.warn("both bevel_depth and extrude set; using bevel_depth",
                      GeometryWarning, stacklevel=3)
    if bevel_depth > 0:
        return _sweep_tube(path, bevel_depth, closed, fill_caps)
    if extrude > 0:
        return _extrude_ribbon(path, extrude, closed, fill_caps)
    warnings.warn("curve has bevel_depth=0 and extrude=0; it has no surface area",
                  GeometryWarning, stacklevel=3)
    m = Mesh.empty()
    m.path = path
    m.path_closed = closed
    return m


def make_curve_object(kind: str, **params) -> Mesh:
    """Build a curve object: bezier_curve, circle, or polyline."""
    params = dict(params)
    params.pop("name", None)
    params.pop("to_mesh", None)  # meshes are the only output form
    if kind == "polyline":
        closed = bool(params.pop("closed", False))
        pts = _check_points(params.pop("points", ()), 3 if closed else 2)
        if closed and np.linalg.norm(pts[0] - pts[-1]) < 1e-12:
            pts = pts[:-1]
            if len(pts) < 3:
                raise InvalidParam("points", "closed polyline needs 3 distinct points")
        bevel = _nonneg(params.pop("bevel_depth", 0.0), "bevel_depth")
        extrude = _nonneg(params.pop("extrude", 0.0), "extrude")
        caps = bool(params.pop("fill_caps", False))
        _reject(params, kind)
        return _finish(pts, closed, bevel, extrude, caps)
    if kind == "circle":
        radius = float(params.pop("radius", 1.0))
        if radius <= 0 or not math.isfinite(radius):
            raise InvalidParam("radius", "must be positive and finite")
        segments = int(params.pop("segments", 32))
        if segments < 3:
            raise InvalidParam("segments", "must be >= 3")
        center = np.asarray(params.pop("location", (0.0, 0.0, 0.0)), dtype=np.float64)
        bevel = _nonneg(params.pop("bevel_depth", 0.0), "bevel_depth")
        extrude = _nonneg(params.pop("extrude", 0.0), "extrude")
        _reject(params, kind)
        ang = np.arange(segments) * (2.0 * math.pi / segments)
        path = center + np.column_stack(
            [radius * np.cos(ang), radius * np.sin(ang), np.zeros(segments)]
        )
        return _finish(path, True, bevel, extrude, False)
    if kind == "bezier_curve":
        pts = _check_points(params.pop("points", ()), 2)
        bevel = _nonneg(params.pop("bevel_depth", 0.0), "bevel_depth")
        extrude = _nonneg(params.pop("extrude", 0.0), "extrude")
        caps = bool(params.pop("fill_caps", False))
        _reject(params, kind)
        path = _catmull_rom(pts, BEZIER_SAMPLES_PER_SPAN)
        return _finish(path, False, bevel, extrude, caps)
    raise UnknownPrimitive(kind)


def _reject(params: dict, kind: str) -> None:
    if params:
        raise InvalidParam(next(iter(params)), f"unknown parameter for '{kind}'")
