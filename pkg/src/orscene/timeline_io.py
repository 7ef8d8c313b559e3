"""Line-delimited timeline document format (version 1).

One JSON header record (timeline id, metadata, joint schema) followed by
one JSON frame record per scene graph, in timestamp order. The format
is append-friendly: live producers can emit one line per captured
frame. parse/write round-trip exactly.
"""

from __future__ import annotations

import json
from pathlib import Path
from typing import Optional

from .errors import GraphError, MalformedRecordError, SchemaVersionError
from .model import (
    JOINT_SCHEMA,
    HumanPose,
    NodeClass,
    NodeKind,
    EdgeKind,
    Pose,
    SceneEdge,
    SceneGraph,
    SceneNode,
    Timeline,
    build_graph,
)

SCHEMA_VERSION = 1


def pose_to_dict(pose: Optional[Pose]) -> Optional[dict]:
    if pose is None:
        return None
    if isinstance(pose, HumanPose):
        return {
            "type": "human",
            "keypoints": [list(p) if p is not None else None for p in pose.keypoints],
        }
    return {
        "type": "object",
        "center": list(pose.center),
        "halfextents": list(pose.halfextents),
        "yaw": pose.yaw,
    }


def pose_from_dict(data: Optional[dict]) -> Optional[Pose]:
    if data is None:
        return None
    if data["type"] == "human":
        return HumanPose(
            tuple(tuple(p) if p is not None else None for p in data["keypoints"])
        )
    if data["type"] == "object":
        from .model import ObjectPose

        return ObjectPose(
            tuple(data["center"]), tuple(data["halfextents"]), float(data.get("yaw", 0.0))
        )
    raise ValueError(f"unknown pose type {data['type']!r}")


def node_to_dict(node: SceneNode) -> dict:
    return {
        "id": node.id,
        "class": str(node.node_class),
        "kind": node.kind.value,
        "pose": pose_to_dict(node.pose),
        "attributes": dict(node.attributes),
    }


def node_from_dict(data: dict) -> SceneNode:
    return SceneNode(
        id=data["id"],
        node_class=NodeClass.parse(data["class"]),
        kind=NodeKind(data.get("kind", "real")),
        pose=pose_from_dict(data.get("pose")),
        attributes=data.get("attributes", {}),
    )


def edge_to_dict(edge: SceneEdge) -> dict:
    return {
        "source": edge.source,
        "relation": edge.relation,
        "target": edge.target,
        "kind": edge.kind.value,
    }


def edge_from_dict(data: dict) -> SceneEdge:
    return SceneEdge(
        source=data["source"],
        relation=data["relation"],
        target=data["target"],
        kind=EdgeKind(data.get("kind", "semantic")),
    )


def graph_to_record(graph: SceneGraph) -> dict:
    return {
        "record": "frame",
        "frame_index": graph.frame_index,
        "timestamp": graph.timestamp,
        "nodes": [node_to_dict(n) for n in graph.nodes],
        "edges": [edge_to_dict(e) for e in graph.edges],
    }


def _dumps(obj: dict) -> str:
    return json.dumps(obj, sort_keys=True, separators=(",", ":"))


def write_timeline(timeline: Timeline) -> str:
    """Serialize to the line-delimited document form."""
    lines = [
        _dumps(
            {
                "record": "header",
                "version": SCHEMA_VERSION,
                "id": timeline.id,
                "metadata": dict(timeline.metadata),
                "joint_schema": list(JOINT_SCHEMA),
            }
        )
    ]
    lines.extend(_dumps(graph_to_record(g)) for g in timeline.frames)
    return "\n".join(lines) + "\n"


def parse_timeline(document: str) -> Timeline:
    """Parse a document; every frame passes full graph validation.

    Raises SchemaVersionError or MalformedRecordError (with the 1-based
    line number); graph-construction errors propagate with frame context
    prepended to their message.
    """
    lines = [ln for ln in document.splitlines()]
    records: list[tuple[int, dict]] = []
    for lineno, line in enumerate(lines, start=1):
        if not line.strip():
            continue
        try:
            records.append((lineno, json.loads(line)))
        except json.JSONDecodeError as exc:
            raise MalformedRecordError(lineno, f"invalid JSON ({exc.msg})") from exc
    if not records:
        raise MalformedRecordError(1, "document is empty")

    header_line, header = records[0]
    if header.get("record") != "header":
        raise MalformedRecordError(header_line, "first record must be the header")
    if header.get("version") != SCHEMA_VERSION:
        raise SchemaVersionError(header.get("version"), SCHEMA_VERSION)
    declared = header.get("joint_schema")
    if declared is not None and tuple(declared) != JOINT_SCHEMA:
        raise MalformedRecordError(header_line, "joint schema does not match this artifact")
    if "id" not in header:
        raise MalformedRecordError(header_line, "header missing timeline id")

    frames: list[SceneGraph] = []
    prev_ts = None
    for position, (lineno, rec) in enumerate(records[1:]):
        if rec.get("record") != "frame":
            raise MalformedRecordError(lineno, f"expected a frame record, got {rec.get('record')!r}")
        for key in ("timestamp", "nodes", "edges"):
            if key not in rec:
                raise MalformedRecordError(lineno, f"frame record missing {key!r}")
        ts = float(rec["timestamp"])
        if prev_ts is not None and ts <= prev_ts:
            raise MalformedRecordError(lineno, f"timestamp {ts} not after previous {prev_ts}")
        prev_ts = ts
        declared_index = rec.get("frame_index", position)
        if declared_index != position:
            raise MalformedRecordError(
                lineno, f"frame_index {declared_index} at position {position}"
            )
        try:
            graph = build_graph(
                [node_from_dict(n) for n in rec["nodes"]],
                [edge_from_dict(e) for e in rec["edges"]],
                timestamp=ts,
                frame_index=position,
            )
        except GraphError as exc:
            exc.args = (f"frame {position} (line {lineno}): {exc.args[0]}",)
            raise
        except (KeyError, TypeError, ValueError) as exc:
            raise MalformedRecordError(lineno, f"bad frame payload: {exc}") from exc
        frames.append(graph)

    return Timeline(id=header["id"], frames=tuple(frames), metadata=header.get("metadata", {}))


def load_timeline(path: str | Path) -> Timeline:
    with open(path, encoding="utf-8") as fh:
        return parse_timeline(fh.read())


def save_timeline(timeline: Timeline, path: str | Path) -> None:
    Path(path).write_text(write_timeline(timeline), encoding="utf-8")
