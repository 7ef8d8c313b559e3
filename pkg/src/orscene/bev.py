"""Bird's-Eye-View layout and SVG rendering of a scene graph.

Real nodes are orthographically projected onto the floor plane (the
gravity coordinate is dropped, so horizontal pairwise distances are
preserved exactly). Virtual nodes without a pose are lined up in
margin slots beside the floor, in id order. Every graph edge is drawn,
dash-styled by its kind.
"""

from __future__ import annotations

import json
from dataclasses import dataclass
from importlib import resources
from pathlib import Path
from typing import Optional

from .errors import MissingPoseError
from .model import HumanPose, NodeKind, ObjectPose, SceneGraph

DISC = "disc"
RECT = "rect"


@dataclass(frozen=True)
class Placement:
    """Floor position and footprint of one projected node."""

    x: float
    y: float
    shape: str  # disc | rect
    node_class: str
    kind: str
    radius: float = 0.0
    half_w: float = 0.0
    half_h: float = 0.0
    yaw: float = 0.0


@dataclass(frozen=True)
class BevConfig:
    room_extent: float = 10.0
    padding: float = 0.5
    human_radius: float = 0.30

    @classmethod
    def from_dict(cls, data: dict) -> "BevConfig":
        return cls(**{k: float(v) for k, v in data.items() if k in
                      ("room_extent", "padding", "human_radius")})


@dataclass(frozen=True)
class BevLayout:
    placements: dict[str, Placement]
    virtual_anchors: dict[str, int]
    drawn_edges: tuple[tuple[str, str, str, str], ...]  # (src, dst, kind, relation)
    bounds: tuple[float, float, float, float]  # xmin, ymin, xmax, ymax

    def to_dict(self) -> dict:
        return {
            "placements": {
                nid: {
                    "x": p.x,
                    "y": p.y,
                    "shape": p.shape,
                    "class": p.node_class,
                    "kind": p.kind,
                    "radius": p.radius,
                    "half_w": p.half_w,
                    "half_h": p.half_h,
                    "yaw": p.yaw,
                }
                for nid, p in self.placements.items()
            },
            "virtual_anchors": dict(self.virtual_anchors),
            "edges": [list(e) for e in self.drawn_edges],
            "bounds": list(self.bounds),
        }


def project_topdown(graph: SceneGraph, cfg: BevConfig = BevConfig()) -> BevLayout:
    """Top-down layout: every node gets exactly one placement or anchor."""
    placements: dict[str, Placement] = {}
    anchors: dict[str, int] = {}
    slot = 0
    for node in graph.nodes:  # sorted by id
        if node.pose is None:
            if node.kind == NodeKind.REAL:
                raise MissingPoseError(node.id)
            anchors[node.id] = slot
            slot += 1
        elif isinstance(node.pose, ObjectPose):
            cx, cy, _ = node.pose.center
            placements[node.id] = Placement(
                x=cx,
                y=cy,
                shape=RECT,
                node_class=str(node.node_class),
                kind=node.kind.value,
                half_w=node.pose.halfextents[0],
                half_h=node.pose.halfextents[1],
                yaw=node.pose.yaw,
            )
        else:
            assert isinstance(node.pose, HumanPose)
            cx, cy, _ = node.pose.center
            placements[node.id] = Placement(
                x=cx,
                y=cy,
                shape=DISC,
                node_class=str(node.node_class),
                kind=node.kind.value,
                radius=cfg.human_radius,
            )

    pad = cfg.padding
    xmin, ymin = -pad, -pad
    xmax, ymax = cfg.room_extent + pad, cfg.room_extent + pad
    for p in placements.values():
        reach = max(p.radius, p.half_w, p.half_h)
        xmin = min(xmin, p.x - reach - pad)
        ymin = min(ymin, p.y - reach - pad)
        xmax = max(xmax, p.x + reach + pad)
        ymax = max(ymax, p.y + reach + pad)

    edges = tuple((e.source, e.target, e.kind.value, e.relation) for e in graph.edges)
    return BevLayout(placements, anchors, edges, (xmin, ymin, xmax, ymax))


# --- SVG rendering -----------------------------------------------------------

def load_style(path: Optional[str | Path] = None) -> dict:
    if path is not None:
        with open(path, encoding="utf-8") as fh:
            return json.load(fh)
    raw = resources.files("orscene").joinpath("data/bev_style.json").read_text("utf-8")
    return json.loads(raw)


def _f(v: float) -> str:
    # fixed two-decimal formatting keeps output byte-stable
    s = f"{v:.2f}"
    return "0.00" if s == "-0.00" else s


class _Svg:
    def __init__(self):
        self.parts: list[str] = []

    def add(self, line: str):
        self.parts.append(line)

    def text(self) -> str:
        return "\n".join(self.parts) + "\n"


def render_svg(layout: BevLayout, style: Optional[dict] = None) -> str:
    """Deterministic SVG document for a layout: same input, same bytes."""
    st = style if style is not None else load_style()
    scale = float(st["scale"])
    xmin, ymin, xmax, ymax = layout.bounds
    floor_w = (xmax - xmin) * scale
    floor_h = (ymax - ymin) * scale
    panel_w = float(st["panel_width"]) if layout.virtual_anchors else 0.0
    slot_h = float(st["slot_height"])
    width = floor_w + (float(st["panel_gap"]) + panel_w if panel_w else 0.0)
    height = max(floor_h, slot_h * (len(layout.virtual_anchors) + 0.5))

    def to_px(x: float, y: float) -> tuple[float, float]:
        return ((x - xmin) * scale, (ymax - y) * scale)

    def anchor_px(slot: int) -> tuple[float, float]:
        return (
            floor_w + float(st["panel_gap"]) + float(st["slot_width"]) / 2.0,
            slot_h * (slot + 0.5),
        )

    def point_of(node_id: str) -> tuple[float, float]:
        if node_id in layout.placements:
            p = layout.placements[node_id]
            return to_px(p.x, p.y)
        return anchor_px(layout.virtual_anchors[node_id])

    svg = _Svg()
    svg.add(
        f'<svg xmlns="http://www.w3.org/2000/svg" width="{_f(width)}" '
        f'height="{_f(height)}" viewBox="0 0 {_f(width)} {_f(height)}">'
    )
    svg.add(f'<rect x="0" y="0" width="{_f(width)}" height="{_f(height)}" fill="{st["background"]}"/>')
    svg.add(
        f'<rect x="0" y="0" width="{_f(floor_w)}" height="{_f(floor_h)}" '
        f'fill="{st["floor_fill"]}" stroke="{st["floor_stroke"]}" stroke-width="2"/>'
    )

    for src, dst, kind, relation in layout.drawn_edges:
        es = st["edge_styles"][kind]
        x1, y1 = point_of(src)
        x2, y2 = point_of(dst)
        dash = f' stroke-dasharray="{es["dasharray"]}"' if es["dasharray"] else ""
        svg.add(
            f'<line x1="{_f(x1)}" y1="{_f(y1)}" x2="{_f(x2)}" y2="{_f(y2)}" '
            f'stroke="{es["stroke"]}" stroke-width="{es["width"]}"{dash}>'
            f"<title>{relation}</title></line>"
        )

    label_size = st["label_size"]
    for nid, p in layout.placements.items():
        cls_style = st["classes"].get(p.node_class, st["class_default"])
        cx, cy = to_px(p.x, p.y)
        if p.shape == RECT:
            w_px, h_px = 2 * p.half_w * scale, 2 * p.half_h * scale
            deg = -p.yaw * 180.0 / 3.141592653589793
            svg.add(
                f'<rect x="{_f(cx - w_px / 2)}" y="{_f(cy - h_px / 2)}" '
                f'width="{_f(w_px)}" height="{_f(h_px)}" '
                f'transform="rotate({_f(deg)} {_f(cx)} {_f(cy)})" '
                f'fill="{cls_style["fill"]}" stroke="{cls_style["stroke"]}" stroke-width="1.5"/>'
            )
        else:
            svg.add(
                f'<circle cx="{_f(cx)}" cy="{_f(cy)}" r="{_f(p.radius * scale)}" '
                f'fill="{cls_style["fill"]}" stroke="{cls_style["stroke"]}" stroke-width="1.5"/>'
            )
        svg.add(
            f'<text x="{_f(cx)}" y="{_f(cy - max(p.radius, p.half_h) * scale - 4)}" '
            f'font-size="{label_size}" text-anchor="middle" fill="{st["label_fill"]}">{nid}</text>'
        )

    for nid, slot in sorted(layout.virtual_anchors.items(), key=lambda kv: kv[1]):
        ax, ay = anchor_px(slot)
        sw, sh = float(st["slot_width"]), slot_h - 10.0
        svg.add(
            f'<rect x="{_f(ax - sw / 2)}" y="{_f(ay - sh / 2)}" width="{_f(sw)}" height="{_f(sh)}" '
            f'rx="6" fill="#eef1f8" stroke="#3956a8" stroke-width="1.2" stroke-dasharray="3 3"/>'
        )
        svg.add(
            f'<text x="{_f(ax)}" y="{_f(ay + 4)}" font-size="{label_size}" '
            f'text-anchor="middle" fill="{st["label_fill"]}">{nid}</text>'
        )

    svg.add("</svg>")
    return svg.text()
