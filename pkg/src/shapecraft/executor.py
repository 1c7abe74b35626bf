"""Node execution and assembly.

Each graph node is executed independently: nodes without code yield a
default cube that exactly fills their bounding volume; nodes with code run
through the shape-program interpreter and the result is affinely fitted
into the bounding volume. Assembly concatenates per-node meshes in graph
order, tagging each with the node name so component structure survives in
OBJ groups.
"""
from __future__ import annotations

import warnings
from dataclasses import dataclass, field
from typing import Dict, List, Optional, Tuple

import numpy as np

from .errors import EmptyMesh, GeometryWarning, MissingBounds, ShapecraftError
from .geometry.core import Mesh, compute_aabb, concat
from .geometry.primitives import make_primitive
from .gps import BoundingVolume, GpsGraph, GpsNode
from .program import Diagnostic, parse, execute


class NodeExecutionError(ShapecraftError):
    """A node's program failed to parse or execute."""

    def __init__(self, node_name: str, diagnostics: List[Diagnostic]):
        self.node_name = node_name
        self.diagnostics = diagnostics
        rendered = "; ".join(d.render() for d in diagnostics)
        super().__init__(f"node '{node_name}' failed: {rendered}")


def fit_to_bounds(mesh: Mesh, b: BoundingVolume, uniform: bool = False) -> Mesh:
    """Affinely map the mesh's bounding box onto `b`.

    Per-axis scale then translate; axes along which the mesh has zero extent
    keep scale 1 and are center-aligned. With `uniform=True` a single scale
    (the smallest per-axis factor) is used and the mesh is centered inside
    `b` instead of filling it.
    """
    if mesh.num_vertices == 0:
        raise EmptyMesh("cannot fit an empty mesh")
    aabb = compute_aabb(mesh)
    src_center = np.asarray(aabb.center, dtype=np.float64)
    src_size = np.asarray(aabb.size, dtype=np.float64)
    dst_center = np.asarray(b.center, dtype=np.float64)
    dst_size = np.asarray(b.size, dtype=np.float64)
    degenerate = src_size <= 1e-12
    scale = np.where(degenerate, 1.0, dst_size / np.where(degenerate, 1.0, src_size))
    if uniform:
        scale = np.full(3, float(scale.min()))
    out = mesh.copy()
    out.vertices = (mesh.vertices - src_center) * scale + dst_center
    return out


def execute_node(node: GpsNode, uniform: bool = False) -> Mesh:
    """Produce the node's geometry, fitted into its bounding volume."""
    if node.bounds is None:
        raise MissingBounds(f"node '{node.name}' has no bounding volume")
    if node.code is None or not node.code.strip():
        b = node.bounds
        mesh = make_primitive("cube", scale=tuple(s / 2 for s in b.size),
                              position=b.center)
        mesh.component_tag = node.name
        return mesh
    result = parse(node.code)
    if not result.ok:
        raise NodeExecutionError(node.name, result.diagnostics)
    run = execute(result.program)
    if not run.ok:
        raise NodeExecutionError(node.name, run.diagnostics)
    mesh = run.scene.result
    if mesh.num_vertices == 0:
        raise NodeExecutionError(node.name, [Diagnostic(
            1, "error", "program produced no geometry")])
    mesh = fit_to_bounds(mesh, node.bounds, uniform=uniform)
    mesh.component_tag = node.name
    return mesh


@dataclass
class AssemblyReport:
    meshes: Dict[str, Mesh] = field(default_factory=dict)
    failures: Dict[str, List[Diagnostic]] = field(default_factory=dict)

    @property
    def ok(self) -> bool:
        return not self.failures


def assemble(graph: GpsGraph, uniform: bool = False) -> Tuple[Mesh, AssemblyReport]:
    """Execute every node and concatenate the results in graph order.

    Failing nodes are skipped and listed in the report; the assembled mesh
    contains the successful components only.
    """
    report = AssemblyReport()
    parts: List[Mesh] = []
    for node in graph.nodes:
        try:
            mesh = execute_node(node, uniform=uniform)
        except NodeExecutionError as exc:
            report.failures[node.name] = exc.diagnostics
            continue
        except MissingBounds as exc:
            report.failures[node.name] = [Diagnostic(1, "error", str(exc))]
            continue
        report.meshes[node.name] = mesh
        parts.append(mesh)
    return concat(parts), report


def partial_geometry(graph: GpsGraph, node_name: str, uniform: bool = False) -> Mesh:
    """Geometry for a single node, bypassing full assembly."""
    return execute_node(graph.node(node_name), uniform=uniform)
