"""Geometry-quality metrics: surface point sampling, Hausdorff distance,
voxel intersection-over-ground-truth, compile rate, and a yes/no/unclear
visual question protocol."""
from __future__ import annotations

from dataclasses import dataclass
from typing import List, Optional, Sequence

import numpy as np
from scipy.spatial import cKDTree

from .backend import Backend, BackendConfig, ChatMessage
from .errors import EmptyMesh, EmptyVoxelization, OpenMesh
from .geometry.core import Mesh, compute_aabb, is_closed

DEFAULT_SAMPLE_POINTS = 10_000
DEFAULT_VOXEL_RESOLUTION = 64


def sample_points(mesh: Mesh, n: int, seed: int = 0) -> np.ndarray:
    """n points sampled uniformly by area over the mesh surface."""
    if mesh.num_vertices == 0 or mesh.num_triangles == 0:
        raise EmptyMesh("cannot sample an empty mesh")
    if n < 1:
        raise ValueError("n must be >= 1")
    v = mesh.vertices
    tris = mesh.triangles
    a, b, c = v[tris[:, 0]], v[tris[:, 1]], v[tris[:, 2]]
    areas = 0.5 * np.linalg.norm(np.cross(b - a, c - a), axis=1)
    total = areas.sum()
    if total <= 0:
        raise EmptyMesh("mesh has zero surface area")
    rng = np.random.default_rng(seed)
    face_idx = rng.choice(len(tris), size=n, p=areas / total)
    u = rng.random(n)
    w = rng.random(n)
    flip = u + w > 1.0
    u[flip] = 1.0 - u[flip]
    w[flip] = 1.0 - w[flip]
    return (a[face_idx] + u[:, None] * (b[face_idx] - a[face_idx])
            + w[:, None] * (c[face_idx] - a[face_idx]))


def hausdorff(a: np.ndarray, b: np.ndarray) -> float:
    """Symmetric Hausdorff distance between two point clouds."""
    a = np.asarray(a, dtype=np.float64)
    b = np.asarray(b, dtype=np.float64)
    if len(a) == 0 or len(b) == 0:
        raise ValueError("point clouds must be non-empty")
    d_ab = cKDTree(b).query(a)[0].max()
    d_ba = cKDTree(a).query(b)[0].max()
    return float(max(d_ab, d_ba))


def _voxelize(mesh: Mesh, lo: np.ndarray, scale: float,
              resolution: int) -> np.ndarray:
    """Solid occupancy on a resolution^3 grid over the unit cube frame
    defined by (lo, scale), via z-column crossing parity."""
    verts = (mesh.vertices - lo) * scale
    tris = mesh.triangles
    a, b, c = verts[tris[:, 0]], verts[tris[:, 1]], verts[tris[:, 2]]
    centers = (np.arange(resolution) + 0.5) / resolution
    occ = np.zeros((resolution, resolution, resolution), dtype=bool)

    # precompute 2D (xy) bounding boxes per triangle
    min_xy = np.minimum(np.minimum(a[:, :2], b[:, :2]), c[:, :2])
    max_xy = np.maximum(np.maximum(a[:, :2], b[:, :2]), c[:, :2])

    for ix, x in enumerate(centers):
        cand_x = (min_xy[:, 0] <= x) & (max_xy[:, 0] >= x)
        if not cand_x.any():
            continue
        for iy, y in enumerate(centers):
            cand = cand_x & (min_xy[:, 1] <= y) & (max_xy[:, 1] >= y)
            if not cand.any():
                continue
            ta, tb, tc = a[cand], b[cand], c[cand]
            # barycentric test in xy projection
            d = ((tb[:, 0] - ta[:, 0]) * (tc[:, 1] - ta[:, 1])
                 - (tc[:, 0] - ta[:, 0]) * (tb[:, 1] - ta[:, 1]))
            ok = np.abs(d) > 1e-15
            if not ok.any():
                continue
            ta, tb, tc, d = ta[ok], tb[ok], tc[ok], d[ok]
            w0 = ((tb[:, 0] - x) * (tc[:, 1] - y)
                  - (tc[:, 0] - x) * (tb[:, 1] - y)) / d
            w1 = ((tc[:, 0] - x) * (ta[:, 1] - y)
                  - (ta[:, 0] - x) * (tc[:, 1] - y)) / d
            w2 = 1.0 - w0 - w1
            hit = (w0 >= 0) & (w1 >= 0) & (w2 >= 0)
            if not hit.any():
                continue
            z = (w0[hit] * ta[hit, 2] + w1[hit] * tb[hit, 2]
                 + w2[hit] * tc[hit, 2])
            # parity: a cell center is inside when an odd number of surface
            # crossings lies above it
            above = np.sum(z[None, :] > centers[:, None], axis=1)
            occ[ix, iy, :] = (above % 2) == 1
    return occ


def iogt(generated: Mesh, ground_truth: Mesh,
         resolution: int = DEFAULT_VOXEL_RESOLUTION) -> float:
    """Voxel overlap of the generated solid with the ground-truth solid,
    divided by the ground-truth volume, in the ground truth's unit-cube
    frame (uniform scale)."""
    if resolution < 8:
        raise ValueError("resolution must be >= 8")
    for name, mesh in (("generated", generated), ("ground truth", ground_truth)):
        if mesh.num_triangles == 0:
            raise EmptyMesh(f"{name} mesh is empty")
        if not is_closed(mesh):
            raise OpenMesh(f"{name} mesh is not closed; "
                           "the interior test is undefined")
    gt_aabb = compute_aabb(ground_truth)
    lo = np.asarray(gt_aabb.min, dtype=np.float64)
    extent = max(np.asarray(gt_aabb.size, dtype=np.float64).max(), 1e-12)
    scale = 1.0 / extent
    occ_gt = _voxelize(ground_truth, lo, scale, resolution)
    if not occ_gt.any():
        raise EmptyVoxelization("ground truth voxelizes to nothing; "
                                "increase the resolution")
    occ_gen = _voxelize(generated, lo, scale, resolution)
    return float(np.logical_and(occ_gen, occ_gt).sum() / occ_gt.sum())


@dataclass(frozen=True)
class RunOutcome:
    """One pipeline run for compile-rate accounting."""
    compiled: bool


def compile_rate(results: Sequence) -> float:
    """Fraction of runs that produced a valid, executable shape."""
    if not results:
        raise ValueError("compile_rate needs at least one outcome")
    flags = [r.compiled if isinstance(r, RunOutcome) else bool(r)
             for r in results]
    return sum(flags) / len(flags)


def vqa_pass_rate(renders: Sequence, questions: Sequence[str],
                  backend: Backend,
                  cfg: Optional[BackendConfig] = None) -> float:
    """Ask yes/no/unclear questions about the renders; pass rate is the
    fraction answered yes. Malformed answers count as unclear."""
    from .agents.prompts import vqa_prompt
    if not questions:
        raise ValueError("vqa_pass_rate needs at least one question")
    cfg = cfg or BackendConfig()
    payloads = tuple(img.to_png() if hasattr(img, "to_png") else img
                     for img in renders)
    passed = 0
    for q in questions:
        reply = backend.complete(
            [ChatMessage("user", vqa_prompt(q), payloads)], cfg)
        answer = reply.strip().lower().strip(".!")
        if answer == "yes":
            passed += 1
    return passed / len(questions)
