"""Metric correctness: sampling, Hausdorff vs brute force, voxel overlap,
compile rate, and the visual-question protocol."""
import numpy as np
import pytest

from shapecraft.backend import BackendConfig, ScriptedBackend
from shapecraft.errors import EmptyMesh, OpenMesh
from shapecraft.geometry.core import Mesh
from shapecraft.geometry.primitives import make_primitive
from shapecraft.metrics import (compile_rate, hausdorff, iogt, sample_points,
                                vqa_pass_rate)


def brute_force_hausdorff(a, b):
    d = np.sqrt(((a[:, None, :] - b[None, :, :]) ** 2).sum(-1))
    return max(d.min(axis=1).max(), d.min(axis=0).max())


def test_sample_single_triangle_on_plane():
    tri = Mesh(np.array([[0, 0, 1.0], [1, 0, 1.0], [0, 1, 1.0]]),
               np.array([[0, 1, 2]]))
    pt = sample_points(tri, 1, seed=3)[0]
    assert abs(pt[2] - 1.0) < 1e-9


def test_sample_area_weighted_cube_faces():
    cube = make_primitive("cube")
    pts = sample_points(cube, 60000, seed=1)
    for axis in range(3):
        for sign in (-1, 1):
            share = np.mean(np.isclose(pts[:, axis], sign, atol=1e-12))
            assert share == pytest.approx(1 / 6, abs=0.01)


def test_sample_seed_deterministic():
    cube = make_primitive("cube")
    a = sample_points(cube, 500, seed=9)
    b = sample_points(cube, 500, seed=9)
    assert np.array_equal(a, b)
    c = sample_points(cube, 500, seed=10)
    assert not np.array_equal(a, c)


def test_sample_empty_mesh():
    with pytest.raises(EmptyMesh):
        sample_points(Mesh.empty(), 10)


def test_hausdorff_basics():
    a = np.array([[0.0, 0, 0]])
    b = np.array([[1.0, 0, 0]])
    assert hausdorff(a, a) == 0.0
    assert hausdorff(a, b) == pytest.approx(1.0)
    assert hausdorff(a, b) == hausdorff(b, a)


def test_hausdorff_equals_brute_force():
    rng = np.random.default_rng(0)
    for trial in range(20):
        a = rng.random((500, 3))
        b = rng.random((500, 3)) + rng.uniform(-0.5, 0.5, 3)
        fast = hausdorff(a, b)
        slow = brute_force_hausdorff(a, b)
        assert abs(fast - slow) < 1e-12, trial


def test_hausdorff_translation_invariant():
    rng = np.random.default_rng(5)
    a = rng.random((300, 3))
    b = rng.random((300, 3))
    shift = np.array([3.2, -1.5, 0.7])
    assert abs(hausdorff(a, b) - hausdorff(a + shift, b + shift)) < 1e-12


def test_iogt_self_is_one():
    cube = make_primitive("cube")
    assert iogt(cube, cube, 32) == 1.0
    assert iogt(cube, cube, 64) == 1.0


def test_iogt_half_cube():
    cube = make_primitive("cube")
    for res in (32, 64):
        half = make_primitive("cube", scale=(0.5, 1, 1), position=(-0.5, 0, 0))
        v = iogt(half, cube, res)
        assert abs(v - 0.5) <= 2 / res


def test_iogt_disjoint_zero():
    cube = make_primitive("cube")
    far = make_primitive("cube", position=(10, 0, 0))
    assert iogt(far, cube, 16) == 0.0


def test_iogt_open_mesh_rejected():
    with pytest.raises(OpenMesh):
        iogt(make_primitive("plane"), make_primitive("cube"), 16)


def test_iogt_resolution_floor():
    cube = make_primitive("cube")
    with pytest.raises(ValueError):
        iogt(cube, cube, 4)


def test_compile_rate():
    assert compile_rate([True, True, False, True, False]) == pytest.approx(0.6)
    assert compile_rate([True] * 4) == 1.0
    assert compile_rate([False]) == 0.0
    with pytest.raises(ValueError):
        compile_rate([])


def test_vqa_pass_rate():
    backend = ScriptedBackend.from_responses(
        ["yes", "Yes.", "no", "unclear", "maybe"])
    rate = vqa_pass_rate([b"png-bytes"], ["q1", "q2", "q3", "q4", "q5"],
                         backend, BackendConfig())
    assert rate == pytest.approx(0.4)
    with pytest.raises(ValueError):
        vqa_pass_rate([b"png"], [], backend)
