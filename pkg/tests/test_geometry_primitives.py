"""Primitive construction: vertex/triangle count formulas, closedness,
and analytic volumes."""
import math

import numpy as np
import pytest

from shapecraft.errors import InvalidParam, UnknownPrimitive
from shapecraft.geometry.core import (boundary_edge_count, compute_aabb,
                                      is_closed, signed_volume)
from shapecraft.geometry.primitives import PRIMITIVE_KINDS, make_primitive


def hemisphere_rings(segments):
    return max(1, segments // 4)


# (kind, params, expected vertices, expected triangles)
COUNT_CASES = [
    ("cube", {}, 8, 12),
    ("plane", {}, 4, 2),
    ("pyramid", {}, 5, 6),
    ("sphere", {"segments": 8, "rings": 4}, 8 * 3 + 2, 2 * 8 * 3),
    ("sphere", {"segments": 32, "rings": 16}, 32 * 15 + 2, 2 * 32 * 15),
    ("sphere", {"segments": 3, "rings": 3}, 3 * 2 + 2, 2 * 3 * 2),
    ("sphere", {"segments": 12, "rings": 7}, 12 * 6 + 2, 2 * 12 * 6),
    ("cylinder", {"vertices": 3}, 8, 12),
    ("cylinder", {"vertices": 16}, 34, 64),
    ("cylinder", {"vertices": 64, "depth": 5}, 130, 256),
    ("cone", {"vertices": 3}, 5, 6),
    ("cone", {"vertices": 24}, 26, 48),
    ("cone", {"vertices": 32, "radius": 2, "depth": 0.5}, 34, 64),
    ("prism", {"sides": 3}, 8, 12),
    ("prism", {"sides": 6}, 14, 24),
    ("prism", {"sides": 12, "radius": 3, "height": 1}, 26, 48),
    ("capsule", {"segments": 8},
     2 * hemisphere_rings(8) * 8 + 2, 4 * hemisphere_rings(8) * 8),
    ("capsule", {"segments": 32},
     2 * hemisphere_rings(32) * 32 + 2, 4 * hemisphere_rings(32) * 32),
    ("capsule", {"segments": 5, "radius": 0.5, "height": 3},
     2 * hemisphere_rings(5) * 5 + 2, 4 * hemisphere_rings(5) * 5),
    ("cube", {"scale": (2, 3, 4)}, 8, 12),
    ("pyramid", {"base_size": 4, "height": 0.5}, 5, 6),
]


@pytest.mark.parametrize("kind,params,nv,nt", COUNT_CASES)
def test_counts(kind, params, nv, nt):
    mesh = make_primitive(kind, **params)
    assert mesh.num_vertices == nv
    assert mesh.num_triangles == nt


@pytest.mark.parametrize("kind,params,nv,nt", COUNT_CASES)
def test_closedness(kind, params, nv, nt):
    mesh = make_primitive(kind, **params)
    if kind == "plane":
        assert boundary_edge_count(mesh) == 4
    else:
        assert is_closed(mesh)


def test_all_kinds_constructible():
    for kind in PRIMITIVE_KINDS:
        mesh = make_primitive(kind)
        assert mesh.num_vertices > 0


def test_cube_volume_and_extent():
    cube = make_primitive("cube")
    assert signed_volume(cube) == pytest.approx(8.0, abs=1e-12)
    aabb = compute_aabb(cube)
    assert aabb.min == pytest.approx((-1, -1, -1))
    assert aabb.max == pytest.approx((1, 1, 1))


def test_scaled_translated_cube():
    cube = make_primitive("cube", scale=(1, 2, 3), position=(10, 0, 0))
    assert signed_volume(cube) == pytest.approx(48.0, abs=1e-9)
    aabb = compute_aabb(cube)
    assert aabb.center == pytest.approx((10, 0, 0))


def test_sphere_volume_converges():
    sphere = make_primitive("sphere", segments=64, rings=32)
    assert signed_volume(sphere) == pytest.approx(4 / 3 * math.pi, rel=0.01)


def test_cylinder_volume_converges():
    cyl = make_primitive("cylinder", vertices=128, depth=2)
    assert signed_volume(cyl) == pytest.approx(math.pi * 2, rel=0.01)


def test_cone_volume_converges():
    cone = make_primitive("cone", vertices=128, radius=1, depth=3)
    assert signed_volume(cone) == pytest.approx(math.pi / 3 * 3, rel=0.01)


def test_pyramid_volume_exact():
    pyr = make_primitive("pyramid", base_size=2, height=3)
    assert signed_volume(pyr) == pytest.approx(4.0, abs=1e-9)


def test_prism_volume_exact():
    prism = make_primitive("prism", sides=6, radius=1, height=2)
    hex_area = 6 * (math.sqrt(3) / 4)
    assert signed_volume(prism) == pytest.approx(hex_area * 2, abs=1e-9)


def test_capsule_volume_converges():
    cap = make_primitive("capsule", radius=1, height=2, segments=64)
    expected = math.pi * 2 + 4 / 3 * math.pi
    assert signed_volume(cap) == pytest.approx(expected, rel=0.02)


def test_rotation_preserves_volume():
    a = make_primitive("cube")
    b = make_primitive("cube", rotation=(0.3, 0.7, 1.1))
    assert signed_volume(b) == pytest.approx(signed_volume(a), abs=1e-9)


def test_unknown_primitive():
    with pytest.raises(UnknownPrimitive):
        make_primitive("torus")


def test_invalid_params():
    with pytest.raises(InvalidParam):
        make_primitive("sphere", segments=2)
    with pytest.raises(InvalidParam):
        make_primitive("cylinder", depth=-1)
    with pytest.raises(InvalidParam):
        make_primitive("cube", bogus=1)
