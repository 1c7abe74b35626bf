"""Part-graph types and JSONL serialization."""
import json

import pytest

from shapecraft.errors import InvalidParam, UnknownNode
from shapecraft.gps import (BoundingVolume, GpsGraph, GpsNode, graph_overview,
                            parse_graph_jsonl, serialize_graph,
                            strip_code_fence)


def test_parse_single_node():
    g, diags = parse_graph_jsonl(
        '{"node":"backrest","shape_description":"curved slab",'
        '"bounding_volume":"upper rear of chair"}')
    assert diags == []
    assert len(g.nodes) == 1
    n = g.nodes[0]
    assert (n.name, n.geometric_desc, n.positional_desc) == (
        "backrest", "curved slab", "upper rear of chair")
    assert n.bounds is None and n.code is None


def test_parse_empty_input_errors():
    g, diags = parse_graph_jsonl("")
    assert g is None
    assert diags[0].message == "no nodes"


def test_parse_duplicate_names():
    g, diags = parse_graph_jsonl('{"node":"leg"}\n{"node":"leg"}')
    assert g is None
    assert "duplicate node name 'leg'" in diags[0].message


def test_parse_bad_identifier():
    g, diags = parse_graph_jsonl('{"node":"4legs"}')
    assert g is None
    assert "not a valid identifier" in diags[0].message


def test_parse_malformed_json_line_numbered():
    g, diags = parse_graph_jsonl('{"node":"a"}\nnot json')
    assert g is None
    assert diags[0].line == 2


def test_parse_unknown_key_warns():
    g, diags = parse_graph_jsonl('{"node":"a","color":"red"}')
    assert g is not None
    assert diags[0].severity == "warning"


def test_fence_stripped():
    g, _ = parse_graph_jsonl('```jsonl\n{"node":"a"}\n```')
    assert g.nodes[0].name == "a"
    assert strip_code_fence("plain") == "plain"


def test_round_trip_preserves_everything():
    g = GpsGraph("a lamp", (
        GpsNode("base", "disk", "bottom",
                bounds=BoundingVolume((0, 0, 0.1), (1, 1, 0.2)),
                code='cylinder(name="b")', best_score=8),
        GpsNode("pole", "thin rod", "center"),
    ))
    text = serialize_graph(g)
    assert len(text.strip().splitlines()) == 2
    back, diags = parse_graph_jsonl(text, root_summary="a lamp")
    assert diags == []
    assert back.nodes == g.nodes


def test_serialized_bounds_are_six_numbers():
    g = GpsGraph("", (GpsNode("a", bounds=BoundingVolume((1, 2, 3), (2, 4, 6))),))
    line = json.loads(serialize_graph(g))
    assert line["bounds"] == [1, 2, 3, 2, 4, 6]


def test_order_preserved_for_many_nodes():
    nodes = tuple(GpsNode(f"part_{i}") for i in range(12))
    text = serialize_graph(GpsGraph("", nodes))
    assert len(text.strip().splitlines()) == 12
    back, _ = parse_graph_jsonl(text)
    assert [n.name for n in back.nodes] == [n.name for n in nodes]


def test_bounds_validation():
    with pytest.raises(InvalidParam):
        BoundingVolume((0, 0, 0), (1, -1, 1))
    with pytest.raises(InvalidParam):
        BoundingVolume.from_list([1, 2, 3])
    b = BoundingVolume((1, 2, 3), (2, 4, 6))
    assert b.lo == pytest.approx((0, 0, 0))
    assert b.hi == pytest.approx((2, 4, 6))
    assert b.volume == pytest.approx(48)


def test_graph_duplicate_rejected():
    with pytest.raises(InvalidParam):
        GpsGraph("", (GpsNode("a"), GpsNode("a")))


def test_unknown_node_lookup():
    g = GpsGraph("", (GpsNode("a"),))
    with pytest.raises(UnknownNode):
        g.node("b")


def test_overview_deterministic_and_complete():
    g = GpsGraph("a chair", (
        GpsNode("seat", "flat slab", "middle",
                bounds=BoundingVolume((0, 0, 1), (2, 2, 0.2))),
        GpsNode("leg", "thin post", "corner"),
    ))
    text = graph_overview(g)
    assert text == graph_overview(g)
    assert text.count("seat") == 1
    assert "bounds:" in text
    # without-bounds variant differs only in the bounds line
    g2 = GpsGraph(g.root_summary, (g.nodes[0].with_(bounds=None), g.nodes[1]))
    diff = set(text.splitlines()) - set(graph_overview(g2).splitlines())
    assert all("bounds:" in line for line in diff)
