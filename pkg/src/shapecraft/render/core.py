"""Deterministic software rasterizer.

Produces the images shown to the vision evaluator: z-buffered Lambert-shaded
mesh renders and color-coded bounding-box renders. Three preset cameras give
front-left and front-right three-quarter views plus a rear top-down view.
Framing is automatic: the camera looks at the scene's bounding-box center
from a distance that keeps the whole box inside the frame with margin.
"""
from __future__ import annotations

import io
import math
from dataclasses import dataclass
from typing import Dict, List, Optional, Sequence, Tuple

import numpy as np
from PIL import Image as PilImage, ImageDraw

from ..errors import EmptyScene, MissingBounds
from ..geometry.core import Aabb, Mesh, compute_aabb
from ..gps import GpsGraph

FOV_DEGREES = 45.0
MARGIN_FRACTION = 0.9  # scene bounding sphere fits inside 90% of the frame
BACKGROUND = (235, 235, 235)
MESH_BASE_COLOR = (150, 160, 175)


@dataclass(frozen=True)
class Camera:
    """Orbit camera: azimuth around the up axis (z), elevation above the
    horizon, auto-fit distance, 45-degree vertical perspective FOV."""

    azimuth: float
    elevation: float
    name: str = ""

    def __post_init__(self):
        if not -90.0 < self.elevation < 90.0:
            raise ValueError("elevation must be in (-90, 90)")

    def direction(self) -> np.ndarray:
        """Unit vector from the look-at target toward the camera."""
        az = math.radians(self.azimuth)
        el = math.radians(self.elevation)
        return np.array([
            math.cos(el) * math.sin(az),
            -math.cos(el) * math.cos(az),
            math.sin(el),
        ])


def preset_cameras() -> List[Camera]:
    return [
        Camera(azimuth=45.0, elevation=30.0, name="front_left"),
        Camera(azimuth=-45.0, elevation=30.0, name="front_right"),
        Camera(azimuth=180.0, elevation=70.0, name="rear_top"),
    ]


@dataclass
class Image:
    pixels: np.ndarray  # (H, W, 3) uint8

    def __post_init__(self):
        if self.pixels.ndim != 3 or self.pixels.shape[2] != 3:
            raise ValueError("pixels must be (H, W, 3)")
        if self.pixels.shape[0] <= 0 or self.pixels.shape[1] <= 0:
            raise ValueError("image dimensions must be positive")

    @property
    def width(self) -> int:
        return self.pixels.shape[1]

    @property
    def height(self) -> int:
        return self.pixels.shape[0]

    def to_png(self) -> bytes:
        buf = io.BytesIO()
        PilImage.fromarray(self.pixels, "RGB").save(buf, format="PNG")
        return buf.getvalue()

    def save(self, path) -> None:
        from pathlib import Path
        Path(path).write_bytes(self.to_png())


class _View:
    """Precomputed camera frame for a scene bounding box."""

    def __init__(self, aabb: Aabb, cam: Camera, size: int):
        center = np.asarray(aabb.center, dtype=np.float64)
        radius = float(np.linalg.norm(np.asarray(aabb.size)) / 2.0)
        radius = max(radius, 1e-9)
        tan_half = math.tan(math.radians(FOV_DEGREES) / 2.0)
        distance = radius / (MARGIN_FRACTION * tan_half) + radius
        direction = cam.direction()
        self.eye = center + distance * direction
        forward = -direction
        world_up = np.array([0.0, 0.0, 1.0])
        if abs(float(forward @ world_up)) > 0.999:
            world_up = np.array([0.0, 1.0, 0.0])
        right = np.cross(forward, world_up)
        right /= np.linalg.norm(right)
        up = np.cross(right, forward)
        self.basis = np.stack([right, up, forward])  # rows
        self.size = size
        self.tan_half = tan_half
        self.near = distance * 1e-4

    def project(self, vertices: np.ndarray) -> Tuple[np.ndarray, np.ndarray]:
        """Return (pixel xy, camera-space depth) per vertex."""
        cam_space = (vertices - self.eye) @ self.basis.T
        depth = cam_space[:, 2]
        safe = np.maximum(depth, self.near)
        ndc = cam_space[:, :2] / (safe[:, None] * self.tan_half)
        px = (ndc[:, 0] * 0.5 + 0.5) * (self.size - 1)
        py = (0.5 - ndc[:, 1] * 0.5) * (self.size - 1)
        return np.stack([px, py], axis=1), depth


def _shade(color: Tuple[int, int, int], lambert: np.ndarray) -> np.ndarray:
    base = np.asarray(color, dtype=np.float64)
    return np.clip(base * (0.25 + 0.75 * lambert[:, None]), 0, 255)


def _raster_mesh(frame: np.ndarray, zbuf: np.ndarray, view: _View,
                 mesh: Mesh, color: Tuple[int, int, int],
                 alpha: float = 1.0, use_depth: bool = True) -> None:
    if mesh.num_triangles == 0:
        return
    xy, depth = view.project(mesh.vertices)
    tris = mesh.triangles
    # per-face Lambert term with the light at the camera (headlight)
    v = mesh.vertices
    e1 = v[tris[:, 1]] - v[tris[:, 0]]
    e2 = v[tris[:, 2]] - v[tris[:, 0]]
    fn = np.cross(e1, e2)
    norms = np.linalg.norm(fn, axis=1)
    norms[norms == 0] = 1.0
    fn /= norms[:, None]
    centroids = v[tris].mean(axis=1)
    to_eye = view.eye - centroids
    to_eye /= np.linalg.norm(to_eye, axis=1)[:, None]
    lambert = np.abs(np.einsum("ij,ij->i", fn, to_eye))
    colors = _shade(color, lambert)

    size = view.size
    for t in range(len(tris)):
        idx = tris[t]
        if np.any(depth[idx] <= view.near):
            continue
        p = xy[idx]
        z = depth[idx]
        x0 = max(int(math.floor(p[:, 0].min())), 0)
        x1 = min(int(math.ceil(p[:, 0].max())), size - 1)
        y0 = max(int(math.floor(p[:, 1].min())), 0)
        y1 = min(int(math.ceil(p[:, 1].max())), size - 1)
        if x1 < x0 or y1 < y0:
            continue
        xs = np.arange(x0, x1 + 1)
        ys = np.arange(y0, y1 + 1)
        gx, gy = np.meshgrid(xs, ys)
        d = (p[1, 0] - p[0, 0]) * (p[2, 1] - p[0, 1]) - \
            (p[2, 0] - p[0, 0]) * (p[1, 1] - p[0, 1])
        if abs(d) < 1e-12:
            continue
        w0 = ((p[1, 0] - gx) * (p[2, 1] - gy) - (p[2, 0] - gx) * (p[1, 1] - gy)) / d
        w1 = ((p[2, 0] - gx) * (p[0, 1] - gy) - (p[0, 0] - gx) * (p[2, 1] - gy)) / d
        w2 = 1.0 - w0 - w1
        inside = (w0 >= -1e-9) & (w1 >= -1e-9) & (w2 >= -1e-9)
        if not inside.any():
            continue
        # perspective-correct depth via 1/z interpolation
        inv_z = w0 / z[0] + w1 / z[1] + w2 / z[2]
        pix_z = np.where(inv_z > 0, 1.0 / np.maximum(inv_z, 1e-12), np.inf)
        if use_depth:
            mask = inside & (pix_z < zbuf[y0:y1 + 1, x0:x1 + 1])
            if not mask.any():
                continue
            zb = zbuf[y0:y1 + 1, x0:x1 + 1]
            zb[mask] = pix_z[mask]
        else:
            mask = inside
        region = frame[y0:y1 + 1, x0:x1 + 1]
        if alpha >= 1.0:
            region[mask] = colors[t]
        else:
            blended = region[mask] * (1.0 - alpha) + colors[t] * alpha
            region[mask] = blended


def render(meshes: Sequence[Mesh], cam: Camera, size: int = 512) -> Image:
    """Z-buffered Lambert render of the meshes against a neutral background."""
    if isinstance(meshes, Mesh):
        meshes = [meshes]
    meshes = [m for m in meshes if m.num_vertices > 0]
    if not meshes or all(m.num_triangles == 0 for m in meshes):
        raise EmptyScene("nothing to render")
    all_v = np.vstack([m.vertices for m in meshes])
    aabb = Aabb(tuple(all_v.min(axis=0)), tuple(all_v.max(axis=0)))
    view = _View(aabb, cam, size)
    frame = np.full((size, size, 3), BACKGROUND, dtype=np.float64)
    zbuf = np.full((size, size), np.inf)
    for m in meshes:
        _raster_mesh(frame, zbuf, view, m, MESH_BASE_COLOR)
    return Image(frame.astype(np.uint8))


# ---------------------------------------------------------------------------
# bounding-box renders
# ---------------------------------------------------------------------------

_BOX_TRIS = np.array([
    (0, 2, 1), (0, 3, 2),  # bottom (z-)
    (4, 5, 6), (4, 6, 7),  # top (z+)
    (0, 1, 5), (0, 5, 4),
    (1, 2, 6), (1, 6, 5),
    (2, 3, 7), (2, 7, 6),
    (3, 0, 4), (3, 4, 7),
], dtype=np.int64)

_BOX_EDGES = [(0, 1), (1, 2), (2, 3), (3, 0),
              (4, 5), (5, 6), (6, 7), (7, 4),
              (0, 4), (1, 5), (2, 6), (3, 7)]


def _box_corners(lo, hi) -> np.ndarray:
    (x0, y0, z0), (x1, y1, z1) = lo, hi
    return np.array([
        (x0, y0, z0), (x1, y0, z0), (x1, y1, z0), (x0, y1, z0),
        (x0, y0, z1), (x1, y0, z1), (x1, y1, z1), (x0, y1, z1),
    ], dtype=np.float64)


_DISTINCT_COLORS: List[Tuple[int, int, int]] = [
    (230, 25, 75), (60, 180, 75), (255, 225, 25), (67, 99, 216),
    (245, 130, 49), (145, 30, 180), (66, 212, 244), (240, 50, 230),
    (191, 239, 69), (250, 190, 212), (70, 153, 144), (220, 190, 255),
    (154, 99, 36), (255, 250, 200), (128, 0, 0), (170, 255, 195),
    (128, 128, 0), (255, 216, 177), (0, 0, 117), (169, 169, 169),
]


def palette(n: int) -> List[Tuple[int, int, int]]:
    """n visually distinct RGB colors (pairwise distance >= 40 for n <= 20);
    larger n falls back to golden-ratio hue stepping."""
    import colorsys
    out = list(_DISTINCT_COLORS[:n])
    hue = 0.0
    while len(out) < n:
        i = len(out)
        value = 0.95 if i % 2 == 0 else 0.6
        r, g, b = colorsys.hsv_to_rgb(hue, 0.85, value)
        out.append((int(round(r * 255)), int(round(g * 255)), int(round(b * 255))))
        hue = (hue + 0.618033988749895) % 1.0
    return out


def render_bboxes(graph: GpsGraph, cam: Camera,
                  size: int = 512) -> Tuple[Image, Dict[str, Tuple[int, int, int]]]:
    """Draw every node's bounding volume as a translucent colored box with a
    solid wireframe; returns the image and a node -> RGB legend in graph
    order."""
    if not graph.nodes:
        raise EmptyScene("graph has no nodes")
    for node in graph.nodes:
        if node.bounds is None:
            raise MissingBounds(f"node '{node.name}' has no bounding volume")
    colors = palette(len(graph.nodes))
    legend = {n.name: colors[i] for i, n in enumerate(graph.nodes)}

    lo = np.min([n.bounds.lo for n in graph.nodes], axis=0)
    hi = np.max([n.bounds.hi for n in graph.nodes], axis=0)
    view = _View(Aabb(tuple(lo), tuple(hi)), cam, size)

    frame = np.full((size, size, 3), BACKGROUND, dtype=np.float64)
    zbuf = np.full((size, size), np.inf)
    boxes = [_box_corners(n.bounds.lo, n.bounds.hi) for n in graph.nodes]
    for corners, color in zip(boxes, colors):
        box = Mesh(corners, _BOX_TRIS.copy())
        _raster_mesh(frame, zbuf, view, box, color, alpha=0.35, use_depth=False)

    pil = PilImage.fromarray(frame.astype(np.uint8), "RGB")
    draw = ImageDraw.Draw(pil)
    for corners, color in zip(boxes, colors):
        xy, depth = view.project(corners)
        if np.any(depth <= view.near):
            continue
        for a, b in _BOX_EDGES:
            draw.line([tuple(xy[a]), tuple(xy[b])], fill=color, width=2)
    return Image(np.asarray(pil, dtype=np.uint8).copy()), legend
