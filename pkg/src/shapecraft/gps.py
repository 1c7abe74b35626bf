"""Flat component graph: the shared memory the agents read and write.

A graph is a root summary plus an ordered list of nodes. Every node hangs
directly off the root (depth 1); there are no node-to-node edges. Nodes are
serialized one JSON object per line (JSONL) with keys `node`,
`shape_description`, `bounding_volume`, plus optional `bounds`, `code`, and
`best_score` for persistence.
"""
from __future__ import annotations

import json
import math
import re
from dataclasses import dataclass, field, replace
from typing import List, Optional, Tuple, Union

from .errors import InvalidParam
from .program.diagnostics import Diagnostic

NODE_NAME_RE = re.compile(r"^[a-z_][a-z0-9_]*$")


@dataclass(frozen=True)
class BoundingVolume:
    """Axis-aligned box: center plus full extents (length, width, height)
    along x, y, z. z is up."""

    center: Tuple[float, float, float]
    size: Tuple[float, float, float]

    def __post_init__(self):
        if len(self.center) != 3 or len(self.size) != 3:
            raise InvalidParam("bounds", "center and size must have 3 components")
        vals = tuple(self.center) + tuple(self.size)
        if not all(math.isfinite(v) for v in vals):
            raise InvalidParam("bounds", "components must be finite")
        if not all(s > 0 for s in self.size):
            raise InvalidParam("bounds", "extents must be strictly positive")
        object.__setattr__(self, "center", tuple(float(v) for v in self.center))
        object.__setattr__(self, "size", tuple(float(v) for v in self.size))

    def to_list(self) -> List[float]:
        return [*self.center, *self.size]

    @classmethod
    def from_list(cls, values) -> "BoundingVolume":
        if len(values) != 6:
            raise InvalidParam("bounds", "expected 6 numbers [cx,cy,cz,l,w,h]")
        return cls(center=tuple(values[:3]), size=tuple(values[3:]))

    @property
    def lo(self) -> Tuple[float, float, float]:
        return tuple(c - s / 2 for c, s in zip(self.center, self.size))

    @property
    def hi(self) -> Tuple[float, float, float]:
        return tuple(c + s / 2 for c, s in zip(self.center, self.size))

    @property
    def volume(self) -> float:
        return self.size[0] * self.size[1] * self.size[2]


@dataclass(frozen=True)
class GpsNode:
    name: str
    geometric_desc: str = ""
    positional_desc: str = ""
    bounds: Optional[BoundingVolume] = None
    code: Optional[str] = None
    best_score: Optional[int] = None

    def __post_init__(self):
        if not NODE_NAME_RE.match(self.name):
            raise InvalidParam(
                "name", f"{self.name!r} is not a valid node identifier")
        if self.best_score is not None and not 0 <= self.best_score <= 10:
            raise InvalidParam("best_score", "must be in [0, 10]")

    def with_(self, **changes) -> "GpsNode":
        return replace(self, **changes)


@dataclass(frozen=True)
class GpsGraph:
    root_summary: str = ""
    nodes: Tuple[GpsNode, ...] = field(default_factory=tuple)

    def __post_init__(self):
        object.__setattr__(self, "nodes", tuple(self.nodes))
        names = [n.name for n in self.nodes]
        if len(set(names)) != len(names):
            raise InvalidParam("nodes", "duplicate node names")

    def node(self, name: str) -> GpsNode:
        for n in self.nodes:
            if n.name == name:
                return n
        from .errors import UnknownNode
        raise UnknownNode(name)

    def has_node(self, name: str) -> bool:
        return any(n.name == name for n in self.nodes)

    def with_node(self, node: GpsNode) -> "GpsGraph":
        """Replace the node of the same name (or append if new)."""
        nodes = list(self.nodes)
        for i, n in enumerate(nodes):
            if n.name == node.name:
                nodes[i] = node
                break
        else:
            nodes.append(node)
        return GpsGraph(self.root_summary, tuple(nodes))


def strip_code_fence(text: str) -> str:
    """Remove a ``` fenced wrapper (with optional language tag) if present."""
    stripped = text.strip()
    m = re.match(r"^```[A-Za-z0-9_+-]*\n(.*?)\n?```$", stripped, re.DOTALL)
    return m.group(1) if m else text


_KNOWN_KEYS = {"node", "shape_description", "bounding_volume",
               "bounds", "code", "best_score"}


def parse_graph_jsonl(
    text: str, root_summary: str = ""
) -> Tuple[Optional[GpsGraph], List[Diagnostic]]:
    """Parse JSONL node lines. Returns (graph, diagnostics); graph is None
    when any error diagnostic was produced."""
    diagnostics: List[Diagnostic] = []
    nodes: List[GpsNode] = []
    seen = set()
    any_line = False
    for lineno, raw in enumerate(strip_code_fence(text).splitlines(), start=1):
        line = raw.strip()
        if not line:
            continue
        any_line = True
        try:
            obj = json.loads(line)
        except json.JSONDecodeError as exc:
            diagnostics.append(Diagnostic(lineno, "error", f"malformed JSON: {exc.msg}"))
            continue
        if not isinstance(obj, dict):
            diagnostics.append(Diagnostic(lineno, "error", "expected a JSON object"))
            continue
        name = obj.get("node")
        if not isinstance(name, str) or not NODE_NAME_RE.match(name):
            diagnostics.append(Diagnostic(
                lineno, "error",
                f"node name {name!r} is not a valid identifier "
                "(lowercase letters, digits, underscore; not digit-initial)"))
            continue
        if name in seen:
            diagnostics.append(Diagnostic(lineno, "error",
                                          f"duplicate node name '{name}'"))
            continue
        for key in obj:
            if key not in _KNOWN_KEYS:
                diagnostics.append(Diagnostic(lineno, "warning",
                                              f"ignoring unknown key '{key}'"))
        bounds = None
        if obj.get("bounds") is not None:
            try:
                bounds = BoundingVolume.from_list(obj["bounds"])
            except (InvalidParam, TypeError) as exc:
                diagnostics.append(Diagnostic(lineno, "error", f"bad bounds: {exc}"))
                continue
        best_score = obj.get("best_score")
        if best_score is not None and (
                not isinstance(best_score, int) or not 0 <= best_score <= 10):
            diagnostics.append(Diagnostic(lineno, "error",
                                          "best_score must be an integer in [0, 10]"))
            continue
        seen.add(name)
        nodes.append(GpsNode(
            name=name,
            geometric_desc=str(obj.get("shape_description", "")),
            positional_desc=str(obj.get("bounding_volume", "")),
            bounds=bounds,
            code=obj.get("code"),
            best_score=best_score,
        ))
    if not any_line:
        diagnostics.append(Diagnostic(1, "error", "no nodes"))
    if any(d.severity == "error" for d in diagnostics):
        return None, diagnostics
    return GpsGraph(root_summary=root_summary, nodes=tuple(nodes)), diagnostics


def serialize_graph(graph: GpsGraph) -> str:
    lines = []
    for n in graph.nodes:
        obj = {
            "node": n.name,
            "shape_description": n.geometric_desc,
            "bounding_volume": n.positional_desc,
        }
        if n.bounds is not None:
            obj["bounds"] = n.bounds.to_list()
        if n.code is not None:
            obj["code"] = n.code
        if n.best_score is not None:
            obj["best_score"] = n.best_score
        lines.append(json.dumps(obj, ensure_ascii=False))
    return "\n".join(lines) + ("\n" if lines else "")


def save_graph(path, graph: GpsGraph) -> None:
    from pathlib import Path
    Path(path).write_text(serialize_graph(graph), encoding="utf-8")


def load_graph(path, root_summary: str = "") -> GpsGraph:
    from pathlib import Path
    from .errors import UnparseableGraph
    graph, diags = parse_graph_jsonl(
        Path(path).read_text(encoding="utf-8"), root_summary)
    if graph is None:
        raise UnparseableGraph(
            "; ".join(d.render() for d in diags if d.severity == "error"))
    return graph


def graph_overview(graph: GpsGraph) -> str:
    """Deterministic human-readable digest given to the coder as context."""
    lines = [f"shape: {graph.root_summary or '(unnamed)'}",
             f"components ({len(graph.nodes)}):"]
    for n in graph.nodes:
        lines.append(f"- {n.name}: {n.geometric_desc}")
        lines.append(f"  placement: {n.positional_desc}")
        if n.bounds is not None:
            c, s = n.bounds.center, n.bounds.size
            lines.append(
                f"  bounds: center=({c[0]:.6g}, {c[1]:.6g}, {c[2]:.6g}) "
                f"size=({s[0]:.6g}, {s[1]:.6g}, {s[2]:.6g})")
    return "\n".join(lines) + "\n"
