"""Synthetic OR-procedure generator and ground-truth time warps.

A procedure script is a list of phases; each phase holds entity
templates (humans built from a parametric skeleton, equipment as boxes)
with optional start/end positions that are interpolated across the
phase, plus virtual nodes/edges to merge in. Relation edges are derived
per frame, so scripted device states and placements produce the
expected semantic edges.

Generation is deterministic for a fixed (script, seed): positions get
small seeded jitter, nothing else is random.
"""

from __future__ import annotations

import json
import math
import random
from dataclasses import dataclass, replace
from importlib import resources
from pathlib import Path
from typing import Optional

from .errors import EmptyScriptError, FieldError, WarpCoverageError
from .geometry import Point3, centroid
from .model import (
    HumanPose,
    NodeClass,
    NodeKind,
    EdgeKind,
    ObjectPose,
    SceneEdge,
    SceneGraph,
    SceneNode,
    Timeline,
    build_graph,
    merge_virtual,
)
from .relations import RelationConfig, with_derived_relations
from .sync import AlignmentPath

DEFAULT_SCRIPT = "vertebroplasty-demo"

# local skeleton offsets: (forward, lateral-left, height) per joint
_STANDING_OFFSETS = {
    "nose": (0.05, 0.0, 1.62),
    "left_eye": (0.04, 0.03, 1.64),
    "right_eye": (0.04, -0.03, 1.64),
    "left_ear": (0.0, 0.07, 1.62),
    "right_ear": (0.0, -0.07, 1.62),
    "left_shoulder": (0.0, 0.19, 1.45),
    "right_shoulder": (0.0, -0.19, 1.45),
    "left_elbow": (0.02, 0.23, 1.18),
    "right_elbow": (0.02, -0.23, 1.18),
    "left_wrist": (0.08, 0.24, 0.93),
    "right_wrist": (0.08, -0.24, 0.93),
    "left_hip": (0.0, 0.11, 0.98),
    "right_hip": (0.0, -0.11, 0.98),
    "left_knee": (0.01, 0.12, 0.52),
    "right_knee": (0.01, -0.12, 0.52),
    "left_ankle": (0.0, 0.13, 0.08),
    "right_ankle": (0.0, -0.13, 0.08),
}

# lying on the back: (toward-head, lateral-left, height above support)
_LYING_OFFSETS = {
    "nose": (0.75, 0.0, 0.18),
    "left_eye": (0.77, 0.03, 0.17),
    "right_eye": (0.77, -0.03, 0.17),
    "left_ear": (0.74, 0.06, 0.15),
    "right_ear": (0.74, -0.06, 0.15),
    "left_shoulder": (0.55, 0.19, 0.12),
    "right_shoulder": (0.55, -0.19, 0.12),
    "left_elbow": (0.28, 0.23, 0.10),
    "right_elbow": (0.28, -0.23, 0.10),
    "left_wrist": (0.02, 0.24, 0.10),
    "right_wrist": (0.02, -0.24, 0.10),
    "left_hip": (-0.05, 0.11, 0.12),
    "right_hip": (-0.05, -0.11, 0.12),
    "left_knee": (-0.45, 0.12, 0.10),
    "right_knee": (-0.45, -0.13, 0.10),
    "left_ankle": (-0.85, 0.13, 0.08),
    "right_ankle": (-0.85, -0.13, 0.08),
}


def build_skeleton(posture: str, at: Point3, facing: float = 0.0) -> dict[str, Point3]:
    """Anatomically plausible named keypoints for a scripted person."""
    offsets = _STANDING_OFFSETS if posture == "standing" else _LYING_OFFSETS
    if posture not in ("standing", "lying"):
        raise FieldError("script entity", f"unknown posture {posture!r}")
    cos_f, sin_f = math.cos(facing), math.sin(facing)
    points = {}
    for name, (fwd, lat, height) in offsets.items():
        dx = cos_f * fwd - sin_f * lat
        dy = sin_f * fwd + cos_f * lat
        points[name] = (at[0] + dx, at[1] + dy, at[2] + height)
    return points


def _lerp(a: list, b: list, t: float) -> Point3:
    return tuple(a[k] + (b[k] - a[k]) * t for k in range(3))


def load_script(name_or_path: str) -> dict:
    """Packaged demo script by name, or any script JSON by path."""
    if name_or_path in (DEFAULT_SCRIPT, "default"):
        raw = resources.files("orscene").joinpath("data/vertebroplasty_demo.json").read_text("utf-8")
        return json.loads(raw)
    with open(name_or_path, encoding="utf-8") as fh:
        return json.load(fh)


def _torso_or_head_target(graph_nodes: dict[str, dict[str, Point3]], which: str) -> Optional[Point3]:
    cfg = RelationConfig()
    joints = cfg.torso_joints if which == "patient_torso" else cfg.head_joints
    for points in graph_nodes.values():
        pts = [points[j] for j in joints if j in points]
        if pts:
            return centroid(pts)
    return None


def synth_procedure(
    script: dict,
    seed: int = 0,
    relation_cfg: RelationConfig = RelationConfig(),
    timeline_id: Optional[str] = None,
) -> Timeline:
    """Expand a procedure script into a timeline of derived scene graphs."""
    phases = script.get("phases", [])
    if not phases:
        raise EmptyScriptError()
    for phase in phases:
        if int(phase.get("frames", 0)) <= 0:
            raise FieldError(phase.get("name", "phase"), "phase frames must be > 0")

    rng = random.Random(seed)
    period = float(script.get("frame_period", 1.0))
    jitter = float(script.get("jitter", 0.01))
    frames: list[SceneGraph] = []
    index = 0

    for phase in phases:
        count = int(phase["frames"])
        for k in range(count):
            t = k / (count - 1) if count > 1 else 0.0
            nodes: list[SceneNode] = []
            human_points: dict[str, dict[str, Point3]] = {}
            pending_reach: list[tuple[str, object, tuple[float, float, float]]] = []

            for ent in phase.get("entities", []):
                at = ent["at"]
                pos = _lerp(at, ent.get("to", at), t)
                base = (
                    pos[0] + rng.gauss(0.0, jitter),
                    pos[1] + rng.gauss(0.0, jitter),
                    pos[2] + rng.gauss(0.0, jitter * 0.25),
                )
                if ent.get("shape", "human") == "box":
                    pose: object = ObjectPose(
                        center=base,
                        halfextents=tuple(ent["halfextents"]),
                        yaw=float(ent.get("yaw", 0.0)),
                    )
                else:
                    points = build_skeleton(
                        ent.get("posture", "standing"), base, float(ent.get("facing", 0.0))
                    )
                    points = {
                        name: (
                            p[0] + rng.gauss(0.0, jitter * 0.5),
                            p[1] + rng.gauss(0.0, jitter * 0.5),
                            p[2] + rng.gauss(0.0, jitter * 0.25),
                        )
                        for name, p in points.items()
                    }
                    if "reach" in ent:
                        offset = (
                            rng.uniform(-0.06, 0.06),
                            rng.uniform(-0.06, 0.06),
                            rng.uniform(-0.04, 0.04),
                        )
                        pending_reach.append((ent["id"], ent["reach"], offset))
                    human_points[ent["id"]] = points
                    pose = None  # built after reach resolution
                nodes.append(
                    SceneNode(
                        id=ent["id"],
                        node_class=NodeClass.parse(ent["class"]),
                        kind=NodeKind.REAL,
                        pose=pose,
                        attributes=ent.get("attributes", {}),
                    )
                )

            patient_points = {
                nid: pts
                for nid, pts in human_points.items()
                if any(n.id == nid and n.node_class.token == "patient" for n in nodes)
            }
            for ent_id, reach, offset in pending_reach:
                if isinstance(reach, str):
                    target = _torso_or_head_target(patient_points, reach)
                else:
                    target = tuple(reach)
                if target is None:
                    continue
                pts = human_points[ent_id]
                for wrist in ("left_wrist", "right_wrist"):
                    pts[wrist] = (
                        target[0] + offset[0],
                        target[1] + offset[1],
                        target[2] + offset[2],
                    )

            nodes = [
                replace(n, pose=HumanPose.from_named(human_points[n.id]))
                if n.id in human_points
                else n
                for n in nodes
            ]

            graph = build_graph(nodes, [], timestamp=period * index, frame_index=index)
            graph = with_derived_relations(graph, relation_cfg)

            vnodes = [
                SceneNode(
                    id=v["id"],
                    node_class=NodeClass.parse(v["class"]),
                    kind=NodeKind.VIRTUAL,
                    attributes=v.get("attributes", {}),
                )
                for v in phase.get("virtual_nodes", [])
            ]
            vedges = [
                SceneEdge(
                    source=e["source"],
                    relation=e["relation"],
                    target=e["target"],
                    kind=EdgeKind(e.get("kind", "virtual")),
                )
                for e in phase.get("virtual_edges", [])
            ]
            if vnodes or vedges:
                graph = merge_virtual(graph, vnodes, vedges)
            frames.append(graph)
            index += 1

    return Timeline(
        id=timeline_id or script.get("name", "synthetic"),
        frames=tuple(frames),
        metadata={
            "procedure": script.get("name", "synthetic"),
            "source": "synthetic",
            "room_extent": float(script.get("room_extent", 10.0)),
            "seed": seed,
        },
    )


# --- ground-truth time warps ---------------------------------------------------


@dataclass(frozen=True)
class WarpSpec:
    """Run-length time warp: (source index, repeat count) per source
    frame, in order, plus an optional set of source indices to drop."""

    runs: tuple[tuple[int, int], ...]
    drops: frozenset[int] = frozenset()

    def __post_init__(self):
        object.__setattr__(self, "runs", tuple((int(i), int(r)) for i, r in self.runs))
        object.__setattr__(self, "drops", frozenset(int(d) for d in self.drops))
        for pos, (src, reps) in enumerate(self.runs):
            if src != pos:
                raise WarpCoverageError(
                    f"runs must cover source indices in order; position {pos} holds {src}"
                )
            if reps < 1:
                raise WarpCoverageError(f"repeat count for source {src} must be >= 1")
        if not set(self.drops) <= set(range(len(self.runs))):
            raise WarpCoverageError("drop set references indices outside the covered range")
        if len(self.drops) >= len(self.runs):
            raise WarpCoverageError("warp would drop every frame")

    @property
    def source_length(self) -> int:
        return len(self.runs)


def identity_warp(m: int) -> WarpSpec:
    return WarpSpec(tuple((i, 1) for i in range(m)))


def random_warp(
    m: int, seed: int, max_repeat: int = 3, drop_prob: float = 0.1
) -> WarpSpec:
    """Seeded random warp: independent per-frame repeats and drops."""
    rng = random.Random(seed)
    runs = tuple((i, rng.randint(1, max_repeat)) for i in range(m))
    drops = frozenset(i for i in range(m) if rng.random() < drop_prob)
    if len(drops) >= m:
        drops = frozenset(list(drops)[: m - 1])
    return WarpSpec(runs, drops)


def apply_time_warp(timeline: Timeline, warp: WarpSpec) -> tuple[Timeline, AlignmentPath]:
    """Warp a timeline and return it with the ground-truth alignment.

    Warped frames are duplicates/drops of source frames with uniformly
    re-spaced timestamps. The ground-truth path pairs every warped frame
    with its source; a dropped source frame is paired with the last
    warped index before it, which keeps the path monotonic, continuous
    and correctly anchored at both ends.
    """
    m = len(timeline)
    if warp.source_length != m:
        raise WarpCoverageError(
            f"warp covers {warp.source_length} frames, timeline has {m}"
        )
    if m > 1:
        dt = (timeline.frames[-1].timestamp - timeline.frames[0].timestamp) / (m - 1)
    else:
        dt = 1.0

    warped: list[SceneGraph] = []
    steps: list[tuple[int, int]] = []
    j = 0
    for i, reps in warp.runs:
        if i in warp.drops:
            steps.append((i, max(j - 1, 0)))
            continue
        for _ in range(reps):
            warped.append(
                replace(timeline.frames[i], timestamp=j * dt, frame_index=j)
            )
            steps.append((i, j))
            j += 1

    truth = AlignmentPath(tuple(steps), tuple(0.0 for _ in steps))
    out = Timeline(
        id=f"{timeline.id}-warped",
        frames=tuple(warped),
        metadata={**timeline.metadata, "warped_from": timeline.id},
    )
    return out, truth
