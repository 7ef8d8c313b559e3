"""Rule-based derivation of spatial and semantic edges from node poses.

All rules are explicit, threshold-driven and deterministic: the same
graph and config always produce the same edge set. Relations run
per-frame with no temporal smoothing.
"""

from __future__ import annotations

from dataclasses import dataclass
from enum import Enum
from typing import Optional

from .errors import FieldError, MissingPoseError
from .geometry import (
    Point3,
    box_to_box_distance,
    centroid,
    dist3,
    point_in_footprint,
    point_to_box_distance,
)
from .model import (
    C_ARM,
    CT,
    OPERATING_TABLE,
    PATIENT,
    EdgeKind,
    HumanPose,
    NodeKind,
    ObjectPose,
    SceneEdge,
    SceneGraph,
    SceneNode,
    build_graph,
)

# sign-difference tolerance for left/right and above/below
_AXIS_EPS = 1e-9


class SurgerySite(str, Enum):
    NONE = "none"
    TORSO = "torso"
    HEAD = "head"


@dataclass(frozen=True)
class RelationConfig:
    """Thresholds and frame conventions for the relation rules.

    Distances are meters. left/right and above/below are judged in the
    fixed room frame (lateral_axis / vertical_axis), not in any actor's
    egocentric frame.
    """

    tau_near: float = 1.5
    tau_touch: float = 0.10
    lying_band: float = 0.40
    torso_joints: tuple[str, ...] = (
        "left_shoulder",
        "right_shoulder",
        "left_hip",
        "right_hip",
    )
    head_joints: tuple[str, ...] = ("nose", "left_eye", "right_eye", "left_ear", "right_ear")
    hand_joints: tuple[str, ...] = ("left_wrist", "right_wrist")
    lateral_axis: Point3 = (1.0, 0.0, 0.0)
    vertical_axis: Point3 = (0.0, 0.0, 1.0)
    # extra slack beyond tau_touch for the operating_on_* reach test
    operate_slack: float = 0.15

    def __post_init__(self):
        if self.tau_near <= 0 or self.tau_touch <= 0 or self.lying_band <= 0:
            raise FieldError("relation config", "thresholds must be > 0")
        if self.tau_touch >= self.tau_near:
            raise FieldError("relation config", "tau_touch must be < tau_near")
        if set(self.torso_joints) & set(self.head_joints):
            raise FieldError("relation config", "torso and head joint sets must be disjoint")

    @property
    def operate_reach(self) -> float:
        return self.tau_touch + self.operate_slack

    @classmethod
    def from_dict(cls, data: dict) -> "RelationConfig":
        kwargs = {}
        for key in (
            "tau_near",
            "tau_touch",
            "lying_band",
            "operate_slack",
        ):
            if key in data:
                kwargs[key] = float(data[key])
        for key in ("torso_joints", "head_joints", "hand_joints"):
            if key in data:
                kwargs[key] = tuple(data[key])
        for key in ("lateral_axis", "vertical_axis"):
            if key in data:
                kwargs[key] = tuple(float(v) for v in data[key])
        return cls(**kwargs)


def _dot(a: Point3, b: Point3) -> float:
    return a[0] * b[0] + a[1] * b[1] + a[2] * b[2]


def _posed_real_nodes(graph: SceneGraph) -> list[SceneNode]:
    out = []
    for node in graph.nodes:  # already sorted by id
        if node.kind != NodeKind.REAL:
            continue
        if node.pose is None:
            raise MissingPoseError(node.id)
        out.append(node)
    return out


def _min_distance(a: SceneNode, b: SceneNode) -> float:
    pa, pb = a.pose, b.pose
    if isinstance(pa, HumanPose) and isinstance(pb, HumanPose):
        return min(dist3(p, q) for p in pa.present_points() for q in pb.present_points())
    if isinstance(pa, HumanPose) and isinstance(pb, ObjectPose):
        return min(
            point_to_box_distance(p, pb.center, pb.halfextents, pb.yaw)
            for p in pa.present_points()
        )
    if isinstance(pa, ObjectPose) and isinstance(pb, HumanPose):
        return _min_distance(b, a)
    assert isinstance(pa, ObjectPose) and isinstance(pb, ObjectPose)
    return box_to_box_distance(
        pa.center, pa.halfextents, pa.yaw, pb.center, pb.halfextents, pb.yaw
    )


def derive_spatial(graph: SceneGraph, cfg: RelationConfig = RelationConfig()) -> set[SceneEdge]:
    """Positional edges between real nodes.

    near: centroid distance < tau_near. touching: minimum point/box
    distance < tau_touch. left_of/right_of and above/below: signed
    coordinate differences in the room frame, emitted only for pairs
    that are already near. Pairs are emitted once, under canonical id
    ordering (source id < target id).
    """
    nodes = _posed_real_nodes(graph)
    edges: set[SceneEdge] = set()
    for i, a in enumerate(nodes):
        for b in nodes[i + 1:]:
            ca, cb = a.center, b.center
            if dist3(ca, cb) >= cfg.tau_near:
                continue
            edges.add(SceneEdge(a.id, "near", b.id, EdgeKind.SPATIAL))
            if _min_distance(a, b) < cfg.tau_touch:
                edges.add(SceneEdge(a.id, "touching", b.id, EdgeKind.SPATIAL))
            d_lat = _dot(cb, cfg.lateral_axis) - _dot(ca, cfg.lateral_axis)
            if d_lat > _AXIS_EPS:
                edges.add(SceneEdge(a.id, "left_of", b.id, EdgeKind.SPATIAL))
            elif d_lat < -_AXIS_EPS:
                edges.add(SceneEdge(a.id, "right_of", b.id, EdgeKind.SPATIAL))
            d_vert = _dot(ca, cfg.vertical_axis) - _dot(cb, cfg.vertical_axis)
            if d_vert > _AXIS_EPS:
                edges.add(SceneEdge(a.id, "above", b.id, EdgeKind.SPATIAL))
            elif d_vert < -_AXIS_EPS:
                edges.add(SceneEdge(a.id, "below", b.id, EdgeKind.SPATIAL))
    return edges


def _group_centroid(pose: HumanPose, joints: tuple[str, ...]) -> Optional[Point3]:
    pts = [pose.point(j) for j in joints]
    pts = [p for p in pts if p is not None]
    return centroid(pts) if pts else None


def derive_semantic(graph: SceneGraph, cfg: RelationConfig = RelationConfig()) -> set[SceneEdge]:
    """Meaning-bearing edges derived from poses and device states.

    lying_on(patient, operating_table): patient centroid horizontally
    inside the table footprint with vertical offset from the table
    surface within lying_band.

    getting_scanned(patient, device): device class is c_arm or ct, its
    ``state`` attribute is "acquiring", and the patient centroid is
    within tau_near of the device.

    operating_on_torso / operating_on_head (staff -> patient): any staff
    hand joint within tau_touch + operate_slack of the patient torso or
    head joint-group centroid.
    """
    nodes = _posed_real_nodes(graph)
    edges: set[SceneEdge] = set()
    patients = [n for n in nodes if n.node_class == PATIENT]

    for patient in patients:
        p_center = patient.center
        for table in nodes:
            if table.node_class != OPERATING_TABLE or not isinstance(table.pose, ObjectPose):
                continue
            box = table.pose
            surface_z = box.center[2] + box.halfextents[2]
            if (
                point_in_footprint(p_center, box.center, box.halfextents, box.yaw)
                and abs(p_center[2] - surface_z) <= cfg.lying_band
            ):
                edges.add(SceneEdge(patient.id, "lying_on", table.id, EdgeKind.SEMANTIC))

        for device in nodes:
            if device.node_class not in (C_ARM, CT):
                continue
            if device.attributes.get("state") != "acquiring":
                continue
            if dist3(p_center, device.center) < cfg.tau_near:
                edges.add(SceneEdge(patient.id, "getting_scanned", device.id, EdgeKind.SEMANTIC))

        if not isinstance(patient.pose, HumanPose):
            continue
        torso = _group_centroid(patient.pose, cfg.torso_joints)
        head = _group_centroid(patient.pose, cfg.head_joints)
        for staff in nodes:
            if staff.node_class.token != "medical_staff" or not isinstance(staff.pose, HumanPose):
                continue
            hands = [staff.pose.point(j) for j in cfg.hand_joints]
            hands = [h for h in hands if h is not None]
            if not hands:
                continue
            if torso is not None and any(dist3(h, torso) < cfg.operate_reach for h in hands):
                edges.add(SceneEdge(staff.id, "operating_on_torso", patient.id, EdgeKind.SEMANTIC))
            if head is not None and any(dist3(h, head) < cfg.operate_reach for h in hands):
                edges.add(SceneEdge(staff.id, "operating_on_head", patient.id, EdgeKind.SEMANTIC))
    return edges


def classify_surgery_site(graph: SceneGraph, cfg: Optional[RelationConfig] = None) -> SurgerySite:
    """Surgery-site category read off the graph's operating_on edges.

    torso wins when both torso and head edges are present, so the value
    stays a single deterministic categorical. cfg is accepted for
    interface symmetry with the derive functions but not consulted.
    """
    relations = {e.relation for e in graph.edges}
    if "operating_on_torso" in relations:
        return SurgerySite.TORSO
    if "operating_on_head" in relations:
        return SurgerySite.HEAD
    return SurgerySite.NONE


def with_derived_relations(
    graph: SceneGraph, cfg: RelationConfig = RelationConfig()
) -> SceneGraph:
    """Copy of the graph with derived spatial+semantic edges merged in.

    Derived edges whose (source, relation, target) triple already exists
    in the graph are skipped.
    """
    existing = graph.edge_triples()
    derived = [
        e
        for e in sorted(
            derive_spatial(graph, cfg) | derive_semantic(graph, cfg),
            key=lambda e: (e.source, e.relation, e.target),
        )
        if e.triple not in existing
    ]
    return build_graph(
        graph.nodes, list(graph.edges) + derived, graph.timestamp, graph.frame_index
    )
