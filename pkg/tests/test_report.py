import random

import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from orscene.model import (
    EdgeKind,
    NodeClass,
    NodeKind,
    ObjectPose,
    SceneEdge,
    SceneNode,
    build_graph,
)
from orscene.report import (
    APPEARED,
    DISAPPEARED,
    ChangeSet,
    ReporterConfig,
    diff_graphs,
    load_templates,
    render_report,
)

from .generators import random_graph


def node(nid, cls="medical_staff", pose=None, kind=NodeKind.REAL):
    return SceneNode(nid, NodeClass.parse(cls), kind, pose)


def box(center):
    return ObjectPose(center, (0.3, 0.3, 0.3))


def test_diff_identity_empty(demo_timeline):
    g = demo_timeline.frames[50]
    cs = diff_graphs(g, g)
    assert cs.is_empty() and len(cs) == 0


def test_staff_change_yields_factor_and_node_entries():
    g1 = build_graph([node("s1"), node("s2")], timestamp=1.0)
    g2 = build_graph([node("s1"), node("s2"), node("s3")], timestamp=1.0)
    cs = diff_graphs(g1, g2)
    assert [(c.factor, c.old, c.new) for c in cs.factor_changes] == [("staff_count", 2, 3)]
    assert [(c.change, c.node_id) for c in cs.node_changes] == [(APPEARED, "s3")]
    assert cs.edge_changes == ()


def test_patient_leaving():
    g1 = build_graph([node("p1", "patient", box((2, 2, 1))), node("s1")], timestamp=1.0)
    g2 = build_graph([node("s1")], timestamp=1.0)
    cs = diff_graphs(g1, g2)
    factors = {c.factor: (c.old, c.new) for c in cs.factor_changes}
    assert factors["has_patient"] == (True, False)
    assert factors["patient_position"] == ((2.0, 2.0, 1.0), None)
    assert [(c.change, c.node_id) for c in cs.node_changes] == [(DISAPPEARED, "p1")]


def test_movement_unreported_by_default():
    g1 = build_graph([node("p1", "patient", box((2, 2, 1)))], timestamp=1.0)
    g2 = build_graph([node("p1", "patient", box((4, 2, 1)))], timestamp=1.0)
    assert diff_graphs(g1, g2).is_empty()
    cs = diff_graphs(g1, g2, ReporterConfig(report_movement=True, movement_threshold=0.5))
    assert [c.factor for c in cs.factor_changes] == ["patient_position"]
    assert [c.change for c in cs.node_changes] == ["moved"]
    assert cs.node_changes[0].displacement == pytest.approx(2.0)


def test_edge_change_ordering_and_inversion():
    nodes = [node("a"), node("b"), node("c")]
    g1 = build_graph(nodes, [SceneEdge("a", "near", "b", EdgeKind.SPATIAL)], timestamp=2.0)
    g2 = build_graph(nodes, [SceneEdge("a", "near", "c", EdgeKind.SPATIAL)], timestamp=2.0)
    cs = diff_graphs(g1, g2)
    assert [(c.change, c.source, c.target) for c in cs.edge_changes] == [
        (DISAPPEARED, "a", "b"),
        (APPEARED, "a", "c"),
    ]


def test_render_sentences_from_templates():
    g1 = build_graph([node("s1"), node("s2")], timestamp=1.0)
    g2 = build_graph([node("s1"), node("s2"), node("s3")], timestamp=1.0)
    cs = diff_graphs(g1, g2)
    sentences = render_report(cs)
    assert sentences[0] == "Number of medical staff changed from 2 to 3."
    assert sentences[1] == "Medical staff 's3' entered the scene."


def test_c_arm_entry_sentence():
    g1 = build_graph([node("s1")], timestamp=1.0)
    g2 = build_graph([node("s1"), node("arm", "c_arm", box((5, 5, 1)))], timestamp=1.0)
    sentences = render_report(diff_graphs(g1, g2))
    assert "C-arm entered the scene." in sentences


def test_empty_changeset_renders_empty():
    assert render_report(ChangeSet()) == []


def test_report_length_matches_changeset(demo_timeline):
    a, b = demo_timeline.frames[1], demo_timeline.frames[20]
    cs = diff_graphs(a, b)
    assert len(render_report(cs)) == len(cs)


def test_custom_template_table(tmp_path):
    import json

    table = load_templates()
    table["factor"]["staff_count"] = "Staff: {old} -> {new}"
    path = tmp_path / "templates.json"
    path.write_text(json.dumps(table))
    g1 = build_graph([node("s1")], timestamp=0.0)
    g2 = build_graph([node("s1"), node("s2")], timestamp=0.0)
    cs = diff_graphs(g1, g2)
    assert render_report(cs, load_templates(path))[0] == "Staff: 1 -> 2"


def test_changeset_structured_export(demo_timeline):
    cs = diff_graphs(demo_timeline.frames[1], demo_timeline.frames[20])
    data = cs.to_dict()
    assert set(data) == {"factor_changes", "node_changes", "edge_changes"}
    total = sum(len(v) for v in data.values())
    assert total == len(cs)


@given(st.integers(min_value=0, max_value=10**9))
@settings(max_examples=100, deadline=None)
def test_diff_self_is_empty(seed):
    g = random_graph(random.Random(seed))
    assert diff_graphs(g, g).is_empty()


@given(st.integers(min_value=0, max_value=10**9))
@settings(max_examples=80, deadline=None)
def test_inversion_property(seed):
    rng = random.Random(seed)
    a, b = random_graph(rng), random_graph(rng)
    fwd = diff_graphs(a, b)
    rev = diff_graphs(b, a)
    assert {(c.factor, repr(c.old), repr(c.new)) for c in fwd.factor_changes} == {
        (c.factor, repr(c.new), repr(c.old)) for c in rev.factor_changes
    }
    flip = {APPEARED: DISAPPEARED, DISAPPEARED: APPEARED}
    assert {(flip[c.change], c.node_id) for c in fwd.node_changes} == {
        (c.change, c.node_id) for c in rev.node_changes
    }
    assert {(flip[c.change], c.source, c.relation, c.target) for c in fwd.edge_changes} == {
        (c.change, c.source, c.relation, c.target) for c in rev.edge_changes
    }


@given(st.integers(min_value=0, max_value=10**9))
@settings(max_examples=60, deadline=None)
def test_factor_compositional_soundness(seed):
    rng = random.Random(seed)
    a = random_graph(rng)
    b = random_graph(rng)
    c = random_graph(rng)
    if diff_graphs(a, b).is_empty() and diff_graphs(b, c).is_empty():
        assert diff_graphs(a, c).is_empty()
