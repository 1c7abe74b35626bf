"""Interpreter for shape programs.

Statements run in order against the geometry kernel. Objects live in a named
scene map; modifier calls look their operands up by identifier and replace
them in place. The final `result` is the concatenation (not a boolean union)
of every object still live when the program ends.
"""
from __future__ import annotations

import warnings
from dataclasses import dataclass, field
from typing import Any, Callable, Dict, List, Optional

from ..errors import GeometryError, GeometryWarning, ShapecraftError
from ..geometry.core import Mesh, concat
from ..geometry.curves import make_curve_object
from ..geometry.modifiers import ModifierSpec, apply_modifier
from ..geometry.primitives import make_primitive
from .diagnostics import Diagnostic
from .parser import ObjectRef, ShapeProgram, Statement

DEFAULT_STATEMENT_BUDGET = 10_000


@dataclass
class SceneObjects:
    objects: Dict[str, Mesh] = field(default_factory=dict)

    @property
    def result(self) -> Mesh:
        return concat(list(self.objects.values()))


@dataclass
class ExecutionResult:
    scene: Optional[SceneObjects]
    diagnostics: List[Diagnostic]

    @property
    def ok(self) -> bool:
        return self.scene is not None


class _RuntimeFailure(Exception):
    def __init__(self, message: str):
        super().__init__(message)
        self.message = message


# ---------------------------------------------------------------------------
# builtin registry
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class Builtin:
    name: str
    doc: str
    signature: str
    handler: Callable


_REGISTRY: Dict[str, Builtin] = {}


def _register(name: str, doc: str, signature: str):
    def wrap(fn):
        _REGISTRY[name] = Builtin(name=name, doc=doc, signature=signature, handler=fn)
        return fn
    return wrap


def builtin_registry() -> Dict[str, Builtin]:
    return dict(_REGISTRY)


def _primitive_handler(kind: str):
    def handler(scene: SceneObjects, st: Statement, args, kwargs):
        kwargs = dict(kwargs)
        obj_name = kwargs.pop("name", None)
        if args:
            if obj_name is not None:
                raise _RuntimeFailure(f"'{kind}' got multiple values for 'name'")
            if len(args) > 1:
                raise _RuntimeFailure(f"'{kind}' takes at most 1 positional argument")
            obj_name = args[0]
        mesh = make_primitive(kind, **kwargs)
        return _bind(scene, st, mesh, obj_name)
    return handler


def _curve_handler(kind: str):
    def handler(scene: SceneObjects, st: Statement, args, kwargs):
        kwargs = dict(kwargs)
        obj_name = kwargs.pop("name", None)
        if args:
            if obj_name is not None:
                raise _RuntimeFailure(f"'{kind}' got multiple values for 'name'")
            if len(args) > 1:
                raise _RuntimeFailure(f"'{kind}' takes at most 1 positional argument")
            obj_name = args[0]
        mesh = make_curve_object(kind, **kwargs)
        return _bind(scene, st, mesh, obj_name)
    return handler


def _bind(scene: SceneObjects, st: Statement, mesh: Mesh, obj_name) -> str:
    if obj_name is not None and not isinstance(obj_name, str):
        raise _RuntimeFailure("'name' must be a string")
    key = st.target or obj_name
    if key is None:
        key = f"_anon{len(scene.objects)}"
    mesh.component_tag = obj_name or key
    scene.objects[key] = mesh
    return key


def _lookup(scene: SceneObjects, ref: Any, what: str) -> str:
    if not isinstance(ref, ObjectRef):
        raise _RuntimeFailure(f"{what} must be an object reference")
    if ref.name not in scene.objects:
        raise _RuntimeFailure(f"unbound identifier '{ref.name}'")
    return ref.name


def _rebind_modified(scene: SceneObjects, st: Statement, key: str, mesh: Mesh) -> None:
    if st.target and st.target != key:
        # rename, preserving insertion order
        items = [(st.target, mesh) if k == key else (k, v)
                 for k, v in scene.objects.items()]
        scene.objects = dict(items)
    else:
        scene.objects[key] = mesh


def _modifier_handler(mod_name: str, aux_param: Optional[str] = None,
                      defaults: Optional[dict] = None):
    defaults = defaults or {}

    def handler(scene: SceneObjects, st: Statement, args, kwargs):
        args = list(args)
        if not args:
            raise _RuntimeFailure(f"'{mod_name}' needs a target object")
        key = _lookup(scene, args.pop(0), f"first argument of '{mod_name}'")
        aux = None
        aux_key = None
        if aux_param is not None:
            aux_ref = kwargs.pop(aux_param, None)
            if aux_ref is None and args:
                aux_ref = args.pop(0)
            if aux_ref is None:
                raise _RuntimeFailure(f"'{mod_name}' needs a second object ('{aux_param}')")
            aux_key = _lookup(scene, aux_ref, f"'{aux_param}' of '{mod_name}'")
            aux = scene.objects[aux_key]
        if args:
            raise _RuntimeFailure(f"'{mod_name}' takes at most "
                                  f"{2 if aux_param else 1} positional arguments")
        params = dict(defaults)
        remove = bool(kwargs.pop("remove", True)) if mod_name == "boolean" else False
        kwargs.pop("render_levels", None)  # parsed and ignored: single geometry path
        params.update(kwargs)
        mesh = apply_modifier(scene.objects[key], ModifierSpec(mod_name, params), aux)
        _rebind_modified(scene, st, key, mesh)
        if mod_name == "boolean" and remove and aux_key is not None and aux_key != key:
            del scene.objects[aux_key]
        return st.target or key
    return handler


for _kind, _doc, _sig in [
    ("cube", "Generates a cube (half-extent 1 per axis at scale 1).",
     'cube(name, position=(0,0,0), rotation=(0,0,0), scale=(1,1,1))'),
    ("sphere", "Creates a UV-sphere with customizable segments and rings.",
     'sphere(name, position=(0,0,0), rotation=(0,0,0), scale=(1,1,1), segments=32, rings=16)'),
    ("cylinder", "Adds a cylinder with adjustable vertex count and height.",
     'cylinder(name, position=(0,0,0), rotation=(0,0,0), scale=(1,1,1), vertices=32, depth=2)'),
    ("cone", "Creates a cone with specified base radius, height, and vertex count.",
     'cone(name, position=(0,0,0), rotation=(0,0,0), scale=(1,1,1), vertices=32, radius=1, depth=2)'),
    ("plane", "Adds a plane with adjustable size.",
     'plane(name, position=(0,0,0), rotation=(0,0,0), scale=(1,1,1), size=2)'),
    ("pyramid", "Constructs a square-based pyramid.",
     'pyramid(name, position=(0,0,0), rotation=(0,0,0), scale=(1,1,1), base_size=2, height=2)'),
    ("capsule", "Creates a capsule by combining hemispheres and a cylinder.",
     'capsule(name, position=(0,0,0), rotation=(0,0,0), scale=(1,1,1), radius=1, height=2, segments=32)'),
    ("prism", "Generates an n-sided prism.",
     'prism(name, position=(0,0,0), rotation=(0,0,0), scale=(1,1,1), sides=3, radius=1, height=2)'),
]:
    _register(_kind, _doc, _sig)(_primitive_handler(_kind))

for _kind, _doc, _sig in [
    ("bezier_curve", "Creates a smooth 3D curve through the control points; "
                     "fill_caps closes the tube ends when beveling.",
     'bezier_curve(name, points, bevel_depth=0.0, extrude=0.0, fill_caps=false)'),
    ("circle", "Generates a circle with specified radius and resolution.",
     'circle(name, location=(0,0,0), radius=1.0, segments=32, bevel_depth=0.0, extrude=0.0)'),
    ("polyline", "Creates straight-line segments; closed links the ends; "
                 "fill_caps closes the tube ends.",
     'polyline(name, points, closed=false, bevel_depth=0.0, extrude=0.0, fill_caps=false)'),
]:
    _register(_kind, _doc, _sig)(_curve_handler(_kind))

_register("boolean", "Performs INTERSECT/UNION/DIFFERENCE; removes obj_b if remove=true.",
          'boolean(obj_a, obj_b, operation="DIFFERENCE", remove=true)')(
    _modifier_handler("boolean", aux_param="obj_b"))
_register("subdivision", "Adds Loop subdivision; levels rounds of refinement.",
          'subdivision(obj, levels=2)')(
    _modifier_handler("subdivision", defaults={"levels": 2}))
_register("bevel", "Chamfers sharp edges; affect=EDGES or VERTICES.",
          'bevel(obj, width=0.1, segments=3, affect="EDGES")')(
    _modifier_handler("bevel", defaults={"width": 0.1, "segments": 3, "affect": "EDGES"}))
_register("array", "Duplicates object linearly count times with relative offset.",
          'array(obj, count=5, relative_offset=(1.2, 0, 0))')(
    _modifier_handler("array", defaults={"count": 5, "relative_offset": (1.2, 0.0, 0.0)}))
_register("mirror", "Mirrors object across X/Y/Z axes; use_clip clamps vertices "
                    "that cross the mirror plane.",
          'mirror(obj, axis=(1, 0, 0), use_clip=true)')(
    _modifier_handler("mirror", defaults={"axis": (True, False, False), "use_clip": True}))
_register("curve", "Deforms obj along a curve object's centerline.",
          'curve(obj, curve_obj, deform_axis="POS_X")')(
    _modifier_handler("curve", aux_param="curve_obj", defaults={"deform_axis": "POS_X"}))
_register("solidify", "Adds thickness to a mesh.",
          'solidify(obj, thickness=0.2)')(
    _modifier_handler("solidify", defaults={"thickness": 0.2}))


@_register("to_mesh", "Applies all modifiers and converts to mesh (no-op here: "
                      "every object already is a mesh).",
           'to_mesh(obj)')
def _to_mesh(scene: SceneObjects, st: Statement, args, kwargs):
    if len(args) != 1 or kwargs:
        raise _RuntimeFailure("'to_mesh' takes exactly 1 object argument")
    key = _lookup(scene, args[0], "argument of 'to_mesh'")
    if st.target and st.target != key:
        _rebind_modified(scene, st, key, scene.objects[key])
    return st.target or key


@_register("cube_bounding_box", "Generates a cube to serve as a bounding box; "
                                "scale components are half-extents.",
           'cube_bounding_box(name, position=(0,0,0), scale=(1,1,1))')
def _cube_bounding_box(scene: SceneObjects, st: Statement, args, kwargs):
    kwargs = dict(kwargs)
    obj_name = kwargs.pop("name", None)
    if args:
        if len(args) > 1 or obj_name is not None:
            raise _RuntimeFailure("'cube_bounding_box' takes at most 1 positional argument")
        obj_name = args[0]
    allowed = {"position", "scale", "rotation"}
    bad = set(kwargs) - allowed
    if bad:
        raise _RuntimeFailure(f"'cube_bounding_box' got unknown parameter '{sorted(bad)[0]}'")
    mesh = make_primitive("cube", **kwargs)
    return _bind(scene, st, mesh, obj_name)


# ---------------------------------------------------------------------------
# execution
# ---------------------------------------------------------------------------

def execute(program: ShapeProgram,
            max_statements: int = DEFAULT_STATEMENT_BUDGET) -> ExecutionResult:
    """Run a parsed program. Runtime errors stop execution; the returned
    diagnostics end with the failing statement's error."""
    scene = SceneObjects()
    diags: List[Diagnostic] = []
    for count, st in enumerate(program.statements):
        if count >= max_statements:
            diags.append(Diagnostic(st.line, "error",
                                    f"statement budget of {max_statements} exceeded"))
            return ExecutionResult(None, diags)
        if st.callee == "text":
            diags.append(Diagnostic(st.line, "error", "unsupported builtin 'text'"))
            return ExecutionResult(None, diags)
        builtin = _REGISTRY.get(st.callee)
        if builtin is None:
            diags.append(Diagnostic(st.line, "error", f"unknown builtin '{st.callee}'"))
            return ExecutionResult(None, diags)
        with warnings.catch_warnings(record=True) as caught:
            warnings.simplefilter("always", GeometryWarning)
            try:
                builtin.handler(scene, st, list(st.args), dict(st.kwargs))
            except _RuntimeFailure as exc:
                diags.append(Diagnostic(st.line, "error", exc.message))
                return ExecutionResult(None, diags)
            except GeometryError as exc:
                diags.append(Diagnostic(st.line, "error", str(exc)))
                return ExecutionResult(None, diags)
            except (TypeError, ValueError) as exc:
                diags.append(Diagnostic(st.line, "error",
                                        f"bad arguments to '{st.callee}': {exc}"))
                return ExecutionResult(None, diags)
            finally:
                for w in caught:
                    if issubclass(w.category, GeometryWarning):
                        diags.append(Diagnostic(st.line, "warning", str(w.message)))
    return ExecutionResult(scene, diags)


def run_source(source: str,
               max_statements: int = DEFAULT_STATEMENT_BUDGET) -> ExecutionResult:
    """Parse then execute; parse errors come back as a failed result."""
    from .parser import parse
    res = parse(source)
    if not res.ok:
        return ExecutionResult(None, res.diagnostics)
    return execute(res.program, max_statements=max_statements)


def library_documentation() -> str:
    """DSL reference text for the Coder prompt, generated from the registry
    so the documentation can never drift from the implementation."""
    lines = []
    for b in _REGISTRY.values():
        lines.append(f"# {b.doc}")
        lines.append(b.signature)
        lines.append("")
    return "\n".join(lines).rstrip() + "\n"
