import math
import random
from pathlib import Path

import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from orscene.bev import BevConfig, load_style, project_topdown, render_svg
from orscene.errors import MissingPoseError
from orscene.model import (
    NodeClass,
    NodeKind,
    ObjectPose,
    SceneNode,
    build_graph,
)
from orscene.timeline_io import load_timeline

from .generators import random_graph

DATA = Path(__file__).parent / "data"


def test_projection_drops_gravity_axis():
    n = SceneNode("box", NodeClass("ct"), NodeKind.REAL,
                  ObjectPose((2.0, 3.0, 1.0), (0.5, 0.5, 0.5)))
    layout = project_topdown(build_graph([n]))
    p = layout.placements["box"]
    assert (p.x, p.y) == (2.0, 3.0)
    assert p.shape == "rect" and p.half_w == 0.5


def test_virtual_nodes_get_margin_slots_in_id_order():
    nodes = [
        SceneNode("timer_1", NodeClass("timer"), NodeKind.VIRTUAL),
        SceneNode("ct_display_1", NodeClass("ct_display"), NodeKind.VIRTUAL),
    ]
    layout = project_topdown(build_graph(nodes))
    assert layout.virtual_anchors == {"ct_display_1": 0, "timer_1": 1}
    assert layout.placements == {}


def test_real_node_without_pose_rejected():
    g = build_graph([SceneNode("a", NodeClass("monitor"), NodeKind.REAL)])
    with pytest.raises(MissingPoseError):
        project_topdown(g)


def test_ground_plane_distances_preserved():
    a = SceneNode("a", NodeClass("ct"), NodeKind.REAL, ObjectPose((1.0, 1.0, 0.2), (0.1,) * 3))
    b = SceneNode("b", NodeClass("monitor"), NodeKind.REAL, ObjectPose((5.0, 1.0, 1.9), (0.1,) * 3))
    layout = project_topdown(build_graph([a, b]))
    pa, pb = layout.placements["a"], layout.placements["b"]
    assert math.hypot(pa.x - pb.x, pa.y - pb.y) == pytest.approx(4.0, abs=1e-12)


def test_bounds_contain_all_placements():
    far = SceneNode("far", NodeClass("ct"), NodeKind.REAL,
                    ObjectPose((25.0, -3.0, 0.5), (0.5,) * 3))
    layout = project_topdown(build_graph([far]), BevConfig(room_extent=10.0))
    xmin, ymin, xmax, ymax = layout.bounds
    p = layout.placements["far"]
    assert xmin <= p.x <= xmax and ymin <= p.y <= ymax


def test_empty_graph_renders_frame_only():
    layout = project_topdown(build_graph([]))
    svg = render_svg(layout)
    assert svg.count("<rect") == 2  # background + floor
    assert "<circle" not in svg and "<line" not in svg


def test_single_node_layout_has_one_shape():
    n = SceneNode("solo", NodeClass("monitor"), NodeKind.REAL,
                  ObjectPose((5.0, 5.0, 1.0), (0.3, 0.2, 0.2)))
    svg = render_svg(project_topdown(build_graph([n])))
    assert svg.count('fill="#ffd98a"') == 1


def test_all_edges_drawn(demo_timeline):
    g = demo_timeline.frames[60]
    layout = project_topdown(g, BevConfig(room_extent=10.0))
    assert len(layout.drawn_edges) == len(g.edges)
    svg = render_svg(layout)
    assert svg.count("<line") == len(g.edges)


def test_placement_plus_anchor_covers_every_node(demo_timeline):
    for g in demo_timeline.frames[::20]:
        layout = project_topdown(g, BevConfig(room_extent=10.0))
        assert len(layout.placements) + len(layout.virtual_anchors) == len(g.nodes)


def test_render_is_byte_deterministic(demo_timeline):
    g = demo_timeline.frames[70]
    layout = project_topdown(g, BevConfig(room_extent=10.0))
    assert render_svg(layout) == render_svg(layout)


def test_golden_svg_byte_identical():
    t = load_timeline(DATA / "bev_fixture.jsonl")
    layout = project_topdown(t.frames[0], BevConfig(room_extent=t.room_extent))
    expected = (DATA / "bev_golden.svg").read_text(encoding="utf-8")
    assert render_svg(layout) == expected


def test_layout_structured_export(demo_timeline):
    layout = project_topdown(demo_timeline.frames[60], BevConfig(room_extent=10.0))
    data = layout.to_dict()
    assert set(data) == {"placements", "virtual_anchors", "edges", "bounds"}
    assert len(data["placements"]) == len(layout.placements)


def test_style_overrides(tmp_path):
    import json

    style = load_style()
    style["classes"]["monitor"]["fill"] = "#123456"
    p = tmp_path / "style.json"
    p.write_text(json.dumps(style))
    n = SceneNode("m", NodeClass("monitor"), NodeKind.REAL,
                  ObjectPose((1.0, 1.0, 1.0), (0.2,) * 3))
    svg = render_svg(project_topdown(build_graph([n])), load_style(p))
    assert '#123456' in svg


@given(st.integers(min_value=0, max_value=10**9))
@settings(max_examples=60, deadline=None)
def test_pairwise_horizontal_distances_preserved(seed):
    g = random_graph(random.Random(seed), require_poses=True)
    layout = project_topdown(g)
    for node in g.nodes:
        if node.pose is None:
            continue
        cx, cy, _ = node.center
        p = layout.placements[node.id]
        assert abs(p.x - cx) <= 1e-9 and abs(p.y - cy) <= 1e-9
