"""DSL parser and interpreter: syntax, diagnostics, execution semantics,
and a 30-program golden corpus covering every builtin and error class."""
import pytest

from shapecraft.geometry.core import compute_aabb, signed_volume
from shapecraft.geometry.io import obj_dumps
from shapecraft.program import (builtin_registry, execute,
                                library_documentation, parse, run_source)
from shapecraft.program.diagnostics import Diagnostic, render_diagnostics
from shapecraft.program.parser import ObjectRef


# --- parser ------------------------------------------------------------------

def test_parse_binding_and_kwargs():
    r = parse('b = cube(name="body", scale=(1, 2, 1))')
    assert r.ok
    st = r.program.statements[0]
    assert (st.target, st.callee) == ("b", "cube")
    assert st.kwargs == {"name": "body", "scale": (1.0, 2.0, 1.0)}


def test_parse_positional_reference_and_list():
    r = parse('boolean(a, b, operation="UNION")\n'
              'p = polyline(points=[(0, 0, 0), (1, 0, 0)])')
    assert r.ok
    assert r.program.statements[0].args == [ObjectRef("a"), ObjectRef("b")]
    assert r.program.statements[1].kwargs["points"] == [(0, 0, 0), (1, 0, 0)]


def test_parse_comments_and_blank_lines():
    r = parse("# heading\n\ncube()  # trailing\n")
    assert r.ok and len(r.program.statements) == 1


def test_parse_booleans_and_negative_numbers():
    r = parse("c = cube(position=(-1, 2e-2, +3.5))\nmirror(c, use_clip=true)")
    assert r.ok
    assert r.program.statements[0].kwargs["position"] == (-1.0, 0.02, 3.5)
    assert r.program.statements[1].kwargs["use_clip"] is True


def test_parse_round_trip():
    src = ('p = polyline(points=[(0, 0, 0), (1, 0, 0), (1, 1, 0)], '
           'bevel_depth=0.1, fill_caps=true)\n')
    first = parse(src)
    again = parse(first.program.render())
    assert again.ok
    assert again.program.statements == first.program.statements


@pytest.mark.parametrize("src,fragment", [
    ("cube(scale=(1,", "unbalanced parenthesis"),
    ("cube(scale=(1, 2, 3, 4))", "2 or 3 components"),
    ("= cube()", "expected an identifier"),
    ('cube(name="a", name="b")', "duplicate keyword"),
    ('cube(name="a", 5)', "positional argument after keyword"),
    ("cube() cube()", "unexpected trailing input"),
])
def test_parse_errors(src, fragment):
    r = parse(src)
    assert not r.ok
    assert fragment in r.diagnostics[0].message


def test_diagnostic_rendering():
    d = Diagnostic(3, "error", "boom")
    assert d.render() == "line 3: error: boom"
    assert render_diagnostics([d, Diagnostic(5, "warning", "meh")]) == (
        "line 3: error: boom\nline 5: warning: meh")


# --- interpreter -------------------------------------------------------------

def test_execute_simple_scene():
    res = run_source('b = cube(name="body", scale=(1, 2, 1))')
    assert res.ok
    assert list(res.scene.objects) == ["b"]
    assert signed_volume(res.scene.result) == pytest.approx(16.0)


def test_boolean_removes_second_operand():
    res = run_source('a = cube(name="a")\n'
                     'b = cube(name="b", position=(5, 0, 0))\n'
                     'boolean(a, b, operation="UNION")')
    assert res.ok
    assert list(res.scene.objects) == ["a"]
    assert signed_volume(res.scene.result) == pytest.approx(16.0, rel=1e-6)


def test_boolean_keep_second_operand():
    res = run_source('a = cube()\nb = cube(position=(5, 0, 0))\n'
                     'boolean(a, b, operation="UNION", remove=false)')
    assert res.ok
    assert set(res.scene.objects) == {"a", "b"}


def test_result_is_concatenation_not_union():
    res = run_source("a = cube()\nb = cube(position=(5, 0, 0))")
    assert res.scene.result.num_vertices == 16


def test_text_builtin_rejected():
    res = run_source('t = text(text="hello")')
    assert not res.ok
    assert res.diagnostics[0].render() == (
        "line 1: error: unsupported builtin 'text'")


def test_unknown_builtin():
    res = run_source("helix()")
    assert not res.ok
    assert "unknown builtin 'helix'" in res.diagnostics[0].message


def test_unbound_identifier_runtime_error():
    res = run_source("cube()\nmirror(q)")
    assert not res.ok
    assert res.diagnostics[0].line == 2
    assert "unbound identifier 'q'" in res.diagnostics[0].message


def test_warning_is_line_numbered_and_nonfatal():
    res = run_source("c = circle(radius=1)")
    assert res.ok
    assert [d.severity for d in res.diagnostics] == ["warning"]
    assert res.diagnostics[0].line == 1


def test_cube_bounding_box_scale_is_half_extent():
    res = run_source('cube_bounding_box(name="b", position=(0, 0, 0.5), '
                     'scale=(1, 1, 0.1))')
    assert res.ok
    aabb = compute_aabb(res.scene.result)
    assert aabb.center == pytest.approx((0, 0, 0.5))
    assert aabb.size == pytest.approx((2, 2, 0.2))


def test_library_documentation_covers_registry():
    doc = library_documentation()
    for name in builtin_registry():
        assert name in doc


# --- golden corpus -----------------------------------------------------------
# 30 programs: every builtin and every failure class. `expect` is None for
# programs that must succeed, otherwise the exact rendered diagnostics.

CORPUS = [
    ("cube_basic", 'cube(name="c", position=(1, 0, 0), scale=(1, 2, 3))', None),
    ("sphere_basic", 's = sphere(segments=12, rings=6)', None),
    ("cylinder_basic", 'cylinder(vertices=16, depth=3)', None),
    ("cone_basic", 'cone(vertices=8, radius=2, depth=1)', None),
    ("plane_basic", 'plane(size=4)', None),
    ("pyramid_basic", 'pyramid(base_size=2, height=3)', None),
    ("capsule_basic", 'capsule(radius=0.5, height=2, segments=8)', None),
    ("prism_basic", 'prism(sides=6, radius=1, height=2)', None),
    ("rotated_cube", 'cube(rotation=(0.1, 0.2, 0.3))', None),
    ("bezier_tube", 'bezier_curve(points=[(0, 0, 0), (1, 1, 0), (2, 0, 0)], '
                    'bevel_depth=0.1, fill_caps=true)', None),
    ("circle_tube", 'circle(radius=1, segments=16, bevel_depth=0.1)', None),
    ("polyline_ribbon", 'polyline(points=[(0, 0, 0), (1, 0, 0), (1, 1, 0)], '
                        'extrude=0.2)', None),
    ("boolean_union", 'a = cube()\nb = cube(position=(5, 0, 0))\n'
                      'boolean(a, b, operation="UNION")', None),
    ("boolean_difference", 'a = cube()\nb = sphere(segments=8, rings=4, '
                           'position=(1, 0, 0))\n'
                           'boolean(a, b, operation="DIFFERENCE")', None),
    ("boolean_intersect", 'a = cube()\nb = cube(position=(1, 0, 0))\n'
                          'boolean(a, b, operation="INTERSECT", remove=false)',
     "line 3: warning: boolean operands share coplanar faces; second operand "
     "inflated by 2e-07 along vertex normals"),
    ("array_row", 'c = cube()\narray(c, count=4, relative_offset=(1, 0, 0))',
     None),
    ("mirror_x", 'c = cube(position=(2, 0, 0))\n'
                 'mirror(c, axis=(1, 0, 0), use_clip=false)', None),
    ("solidify_plane", 'p = plane()\nsolidify(p, thickness=0.2)', None),
    ("subdivide_cube", 'c = cube()\nsubdivision(c, levels=2)', None),
    ("bevel_cube", 'c = cube()\nbevel(c, width=0.2, segments=2)', None),
    ("curve_deform_rod",
     'rail = polyline(points=[(0, 0, 0), (2, 0, 0), (2, 2, 0)])\n'
     'rod = cylinder(vertices=8, depth=4, scale=(0.1, 0.1, 1))\n'
     'sub = subdivision(rod, levels=2)\n'
     'curve(sub, rail, deform_axis="POS_Z")',
     "line 1: warning: curve has bevel_depth=0 and extrude=0; it has no "
     "surface area"),
    ("to_mesh_noop", 'c = circle(radius=1, bevel_depth=0.1)\nto_mesh(c)', None),
    ("bbox_program", 'cube_bounding_box(name="b", position=(0, 0, 1), '
                     'scale=(1, 1, 1))', None),
    ("err_syntax", 'cube(scale=(1,', "line 1: error: unbalanced parenthesis "
                                     "in tuple"),
    ("err_text", 't = text(text="hi")',
     "line 1: error: unsupported builtin 'text'"),
    ("err_unknown_builtin", 'torus()', "line 1: error: unknown builtin 'torus'"),
    ("err_unbound", 'mirror(q)', "line 1: error: unbound identifier 'q'"),
    ("err_bad_param", 'cube(banana=3)',
     "line 1: error: invalid parameter 'banana': unknown parameter for 'cube'"),
    ("err_degenerate_curve", 'polyline(points=[(0, 0, 0), (0, 0, 0)], '
                             'bevel_depth=0.1)',
     "line 1: error: coincident consecutive control points"),
    ("err_open_boolean", 'p = plane()\nc = cube()\n'
                         'boolean(p, c, operation="UNION")',
     "line 3: error: first boolean operand is not a closed manifold"),
]


def _run_corpus_once():
    outputs = {}
    for name, src, _ in CORPUS:
        res = run_source(src)
        diag_text = render_diagnostics(res.diagnostics)
        obj = obj_dumps(list(res.scene.objects.values())) if res.ok else None
        outputs[name] = (diag_text, obj)
    return outputs


def test_corpus_has_thirty_programs():
    assert len(CORPUS) == 30
    assert len({name for name, _, _ in CORPUS}) == 30


def test_corpus_expected_diagnostics():
    for name, src, expect in CORPUS:
        res = run_source(src)
        if expect is None:
            assert res.ok, (name, render_diagnostics(res.diagnostics))
            assert not res.diagnostics, name
        else:
            assert render_diagnostics(res.diagnostics) == expect, name
            expect_ok = "error" not in expect
            assert res.ok is expect_ok, name


def test_corpus_byte_identical_across_runs():
    first = _run_corpus_once()
    second = _run_corpus_once()
    assert first == second
    assert any(obj is not None for _, obj in first.values())
