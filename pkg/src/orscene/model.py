"""Scene-graph data model for operating-room procedures.

A scene graph is one timestamped snapshot of the room: a set of typed
nodes (real humans/objects plus virtual components such as device
signals, displays and timers) and a set of typed relation edges
(spatial, semantic or virtual). A timeline is an ordered sequence of
scene graphs.

All types are immutable values; construction goes through
:func:`build_graph`, which validates every structural invariant.
"""

from __future__ import annotations

import math
import re
from dataclasses import dataclass, field
from enum import Enum
from functools import cached_property
from statistics import median
from typing import Iterable, Mapping, Optional, Union

from .errors import (
    DanglingEdgeError,
    DuplicateEdgeError,
    DuplicateIdError,
    FieldError,
    KindViolationError,
    NegativeTimestampError,
    SelfLoopError,
)
from .geometry import Point3, centroid

# Fixed artifact-wide human joint naming (COCO multi-person keypoint order).
# Human poses always carry exactly this many slots; missing joints are
# stored as None, never omitted.
JOINT_SCHEMA: tuple[str, ...] = (
    "nose",
    "left_eye",
    "right_eye",
    "left_ear",
    "right_ear",
    "left_shoulder",
    "right_shoulder",
    "left_elbow",
    "right_elbow",
    "left_wrist",
    "right_wrist",
    "left_hip",
    "right_hip",
    "left_knee",
    "right_knee",
    "left_ankle",
    "right_ankle",
)

_JOINT_INDEX = {name: i for i, name in enumerate(JOINT_SCHEMA)}

_ATTR_KEY_RE = re.compile(r"^[a-z][a-z0-9_]*$")

# Closed node-class vocabulary; anything else travels as other(tag).
KNOWN_CLASS_TOKENS: frozenset[str] = frozenset(
    {
        "patient",
        "medical_staff",
        "c_arm",
        "ct",
        "monitor",
        "patient_monitoring",
        "endoscopic_visualization",
        "operating_table",
        "transporter_bed",
        "timer",
        "xray_image",
        "ecg_signal",
        "ct_display",
        "anesthetic_data",
    }
)


@dataclass(frozen=True)
class NodeClass:
    """Class label of a scene node.

    Either one of the closed vocabulary tokens, or the escape hatch
    ``other`` carrying a nonempty free-form tag.
    """

    token: str
    tag: Optional[str] = None

    def __post_init__(self):
        if self.token == "other":
            if not self.tag:
                raise FieldError("node class", "other() requires a nonempty tag")
        elif self.token not in KNOWN_CLASS_TOKENS:
            raise FieldError("node class", f"unknown class token {self.token!r}")
        elif self.tag is not None:
            raise FieldError("node class", f"{self.token!r} must not carry a tag")

    @classmethod
    def other(cls, tag: str) -> "NodeClass":
        return cls("other", tag)

    @classmethod
    def parse(cls, text: str) -> "NodeClass":
        if text.startswith("other:"):
            return cls.other(text[len("other:"):])
        return cls(text)

    def __str__(self) -> str:
        return f"other:{self.tag}" if self.token == "other" else self.token


PATIENT = NodeClass("patient")
MEDICAL_STAFF = NodeClass("medical_staff")
C_ARM = NodeClass("c_arm")
CT = NodeClass("ct")
MONITOR = NodeClass("monitor")
PATIENT_MONITORING = NodeClass("patient_monitoring")
ENDOSCOPIC_VISUALIZATION = NodeClass("endoscopic_visualization")
OPERATING_TABLE = NodeClass("operating_table")
TRANSPORTER_BED = NodeClass("transporter_bed")
TIMER = NodeClass("timer")
XRAY_IMAGE = NodeClass("xray_image")
ECG_SIGNAL = NodeClass("ecg_signal")
CT_DISPLAY = NodeClass("ct_display")
ANESTHETIC_DATA = NodeClass("anesthetic_data")


class NodeKind(str, Enum):
    REAL = "real"
    VIRTUAL = "virtual"


class EdgeKind(str, Enum):
    SPATIAL = "spatial"
    SEMANTIC = "semantic"
    VIRTUAL = "virtual"


def _check_finite(element: str, values: Iterable[float]):
    for v in values:
        if not math.isfinite(v):
            raise FieldError(element, f"non-finite coordinate {v!r}")


@dataclass(frozen=True)
class HumanPose:
    """Named 3D keypoints following :data:`JOINT_SCHEMA`.

    The keypoint tuple always has one slot per schema joint; a missing
    joint is None. At least one joint must be present.
    """

    keypoints: tuple[Optional[Point3], ...]

    def __post_init__(self):
        if len(self.keypoints) != len(JOINT_SCHEMA):
            raise FieldError(
                "human pose",
                f"expected {len(JOINT_SCHEMA)} keypoint slots, got {len(self.keypoints)}",
            )
        present = [p for p in self.keypoints if p is not None]
        if not present:
            raise FieldError("human pose", "all keypoints absent")
        for p in present:
            _check_finite("human pose", p)
        object.__setattr__(self, "keypoints", tuple(tuple(p) if p else None for p in self.keypoints))

    @classmethod
    def from_named(cls, points: Mapping[str, Point3]) -> "HumanPose":
        slots: list[Optional[Point3]] = [None] * len(JOINT_SCHEMA)
        for name, p in points.items():
            if name not in _JOINT_INDEX:
                raise FieldError("human pose", f"unknown joint name {name!r}")
            slots[_JOINT_INDEX[name]] = (float(p[0]), float(p[1]), float(p[2]))
        return cls(tuple(slots))

    def point(self, joint: str) -> Optional[Point3]:
        return self.keypoints[_JOINT_INDEX[joint]]

    def present_points(self) -> list[Point3]:
        return [p for p in self.keypoints if p is not None]

    @property
    def center(self) -> Point3:
        return centroid(self.present_points())

    @property
    def median_point(self) -> Point3:
        pts = self.present_points()
        return (
            median(p[0] for p in pts),
            median(p[1] for p in pts),
            median(p[2] for p in pts),
        )


@dataclass(frozen=True)
class ObjectPose:
    """Oriented box: center and half-extents in meters, yaw about +z."""

    center: Point3
    halfextents: Point3
    yaw: float = 0.0

    def __post_init__(self):
        _check_finite("object pose", (*self.center, *self.halfextents, self.yaw))
        if any(h <= 0 for h in self.halfextents):
            raise FieldError("object pose", f"halfextents must be > 0, got {self.halfextents}")
        object.__setattr__(self, "center", tuple(float(c) for c in self.center))
        object.__setattr__(self, "halfextents", tuple(float(h) for h in self.halfextents))


Pose = Union[HumanPose, ObjectPose]


@dataclass(frozen=True)
class SceneNode:
    """Real or virtual scene entity."""

    id: str
    node_class: NodeClass
    kind: NodeKind = NodeKind.REAL
    pose: Optional[Pose] = None
    attributes: Mapping[str, str] = field(default_factory=dict)

    def __post_init__(self):
        if not self.id:
            raise FieldError("node", "id must be nonempty")
        for key in self.attributes:
            if not _ATTR_KEY_RE.match(key):
                raise FieldError(self.id, f"attribute key {key!r} is not lowercase snake_case")
        object.__setattr__(self, "attributes", dict(self.attributes))

    @property
    def center(self) -> Optional[Point3]:
        if isinstance(self.pose, ObjectPose):
            return self.pose.center
        if isinstance(self.pose, HumanPose):
            return self.pose.center
        return None


@dataclass(frozen=True)
class SceneEdge:
    """Typed relation between two nodes of the same graph."""

    source: str
    relation: str
    target: str
    kind: EdgeKind = EdgeKind.SEMANTIC

    def __post_init__(self):
        if not self.relation:
            raise FieldError(f"{self.source}->{self.target}", "relation token must be nonempty")

    @property
    def triple(self) -> tuple[str, str, str]:
        return (self.source, self.relation, self.target)


@dataclass(frozen=True)
class SceneGraph:
    """One timestamped snapshot: node set plus typed edge set.

    Nodes are kept sorted by id and edges by triple, so structurally
    equal graphs compare equal regardless of construction order.
    """

    timestamp: float
    nodes: tuple[SceneNode, ...]
    edges: tuple[SceneEdge, ...]
    frame_index: int = 0

    @cached_property
    def _node_map(self) -> dict[str, SceneNode]:
        return {n.id: n for n in self.nodes}

    def node(self, node_id: str) -> SceneNode:
        return self._node_map[node_id]

    def has_node(self, node_id: str) -> bool:
        return node_id in self._node_map

    def nodes_of_class(self, node_class: NodeClass) -> list[SceneNode]:
        return [n for n in self.nodes if n.node_class == node_class]

    def edge_triples(self) -> set[tuple[str, str, str]]:
        return {e.triple for e in self.edges}


@dataclass(frozen=True)
class Timeline:
    """Ordered sequence of scene graphs with document metadata."""

    id: str
    frames: tuple[SceneGraph, ...]
    metadata: Mapping[str, object] = field(default_factory=dict)

    DEFAULT_ROOM_EXTENT = 10.0

    def __post_init__(self):
        object.__setattr__(self, "frames", tuple(self.frames))
        object.__setattr__(self, "metadata", dict(self.metadata))
        prev = -math.inf
        for pos, frame in enumerate(self.frames):
            if frame.frame_index != pos:
                raise FieldError(
                    self.id, f"frame at position {pos} has frame_index {frame.frame_index}"
                )
            if frame.timestamp <= prev:
                raise FieldError(
                    self.id, f"timestamps not strictly increasing at frame {pos}"
                )
            prev = frame.timestamp
        extent = self.metadata.get("room_extent")
        if extent is not None and not float(extent) > 0:
            raise FieldError(self.id, f"room extent must be > 0, got {extent}")

    @property
    def room_extent(self) -> float:
        extent = self.metadata.get("room_extent")
        return float(extent) if extent is not None else self.DEFAULT_ROOM_EXTENT

    def __len__(self) -> int:
        return len(self.frames)


def _canonical_nodes(nodes: Iterable[SceneNode]) -> tuple[SceneNode, ...]:
    return tuple(sorted(nodes, key=lambda n: n.id))


def _canonical_edges(edges: Iterable[SceneEdge]) -> tuple[SceneEdge, ...]:
    return tuple(sorted(edges, key=lambda e: (e.source, e.relation, e.target)))


def build_graph(
    nodes: Iterable[SceneNode],
    edges: Iterable[SceneEdge] = (),
    timestamp: float = 0.0,
    frame_index: int = 0,
) -> SceneGraph:
    """Validate raw node/edge descriptions and assemble a scene graph.

    Raises the first violated invariant, naming the offending element:
    NegativeTimestampError, DuplicateIdError, SelfLoopError,
    DanglingEdgeError, DuplicateEdgeError or KindViolationError.
    """
    if timestamp < 0:
        raise NegativeTimestampError(timestamp)
    node_list = list(nodes)
    seen: dict[str, SceneNode] = {}
    for n in node_list:
        if n.id in seen:
            raise DuplicateIdError(n.id)
        seen[n.id] = n
    edge_list = list(edges)
    triples: set[tuple[str, str, str]] = set()
    for e in edge_list:
        if e.source == e.target:
            raise SelfLoopError(e.source)
        for endpoint in (e.source, e.target):
            if endpoint not in seen:
                raise DanglingEdgeError(endpoint)
        if e.triple in triples:
            raise DuplicateEdgeError(e.triple)
        triples.add(e.triple)
        if e.kind == EdgeKind.VIRTUAL:
            if (
                seen[e.source].kind != NodeKind.VIRTUAL
                and seen[e.target].kind != NodeKind.VIRTUAL
            ):
                raise KindViolationError(
                    f"{e.source}-[{e.relation}]->{e.target}",
                    "virtual edge requires at least one virtual endpoint",
                )
    return SceneGraph(
        timestamp=float(timestamp),
        nodes=_canonical_nodes(node_list),
        edges=_canonical_edges(edge_list),
        frame_index=frame_index,
    )


def validate_graph(graph: SceneGraph) -> None:
    """Standalone validation pass; accepts exactly what build_graph emits."""
    build_graph(graph.nodes, graph.edges, graph.timestamp, graph.frame_index)


def merge_virtual(
    graph: SceneGraph,
    nodes: Iterable[SceneNode] = (),
    edges: Iterable[SceneEdge] = (),
) -> SceneGraph:
    """Return a new graph extended with virtual nodes and virtual edges.

    The input graph is left untouched. Added node ids must be disjoint
    from existing ids and every added node must be kind=virtual.
    """
    added_nodes = list(nodes)
    for n in added_nodes:
        if graph.has_node(n.id):
            raise DuplicateIdError(n.id)
        if n.kind != NodeKind.VIRTUAL:
            raise KindViolationError(n.id, "merge_virtual additions must have kind=virtual")
    return build_graph(
        list(graph.nodes) + added_nodes,
        list(graph.edges) + list(edges),
        graph.timestamp,
        graph.frame_index,
    )


def query_nodes(
    graph: SceneGraph,
    node_class: Optional[NodeClass] = None,
    kind: Optional[NodeKind] = None,
) -> list[SceneNode]:
    """All nodes matching the class/kind filter, ordered by id."""
    out = [
        n
        for n in graph.nodes
        if (node_class is None or n.node_class == node_class)
        and (kind is None or n.kind == kind)
    ]
    return sorted(out, key=lambda n: n.id)
