"""Adapter for multi-view pose-annotation documents.

Consumes precomputed 3D annotations (per-frame person keypoints plus
object box poses, in the style of public multi-view OR datasets) and
produces a timeline of derived scene graphs. The adapter accepts 3D
keypoints only; 2D-only entries are rejected because projecting them
would require the camera pipeline that sits outside this package's
ingestion boundary.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Mapping, Optional

from .errors import (
    AdapterError,
    MissingCameraMetadataError,
    UnmappedJointError,
    UnmappedLabelError,
)
from .geometry import Point3
from .model import (
    JOINT_SCHEMA,
    HumanPose,
    NodeClass,
    NodeKind,
    ObjectPose,
    SceneGraph,
    SceneNode,
    Timeline,
    build_graph,
)
from .relations import RelationConfig, with_derived_relations


@dataclass(frozen=True)
class MappingConfig:
    """Source-to-artifact mapping for annotation ingestion.

    joint_map: source joint name -> artifact joint name; an empty
    string discards that source joint.
    label_map: source object label -> node class token.
    patient_tracks: person track ids ingested as patient instead of
    medical staff (public OR datasets rarely label the patient, so the
    designation is configuration).
    """

    joint_map: Mapping[str, str]
    label_map: Mapping[str, str]
    patient_tracks: frozenset = frozenset()
    min_score: float = 0.0
    timeline_id: str = "annotations"
    room_extent: float = 10.0
    frame_period: float = 1.0
    derive_relations: bool = True
    relation_cfg: RelationConfig = field(default_factory=RelationConfig)

    @classmethod
    def from_dict(cls, data: dict) -> "MappingConfig":
        return cls(
            joint_map=dict(data["joint_map"]),
            label_map=dict(data.get("label_map", {})),
            patient_tracks=frozenset(data.get("patient_tracks", ())),
            min_score=float(data.get("min_score", 0.0)),
            timeline_id=data.get("timeline_id", "annotations"),
            room_extent=float(data.get("room_extent", 10.0)),
            frame_period=float(data.get("frame_period", 1.0)),
            derive_relations=bool(data.get("derive_relations", True)),
        )


def _person_pose(person: dict, joint_names: list[str], cfg: MappingConfig) -> HumanPose:
    track = person.get("track_id", "?")
    kps = person.get("keypoints3d")
    if kps is None:
        raise MissingCameraMetadataError(f"person {track}")
    if len(kps) != len(joint_names):
        raise AdapterError(
            f"person {track}: {len(kps)} keypoints for {len(joint_names)} declared joints"
        )
    named: dict[str, Point3] = {}
    for source_name, entry in zip(joint_names, kps):
        target = cfg.joint_map[source_name]
        if not target or entry is None:
            continue
        if len(entry) >= 4 and entry[3] < cfg.min_score:
            continue
        named[target] = (float(entry[0]), float(entry[1]), float(entry[2]))
    if not named:
        raise AdapterError(f"person {track}: every keypoint absent or below min_score")
    return HumanPose.from_named(named)


def adapt_annotations(doc: dict, cfg: MappingConfig) -> Timeline:
    """One derived scene graph per annotated frame.

    Node ids come from source track ids, so they stay stable across
    frames. The adapter never invents nodes: each frame's node count
    equals its mapped annotation entries.
    """
    joint_names = doc.get("joint_names")
    if not joint_names:
        raise AdapterError("annotation document does not declare its joint naming")
    for name in joint_names:
        if name not in cfg.joint_map:
            raise UnmappedJointError(name)
        mapped = cfg.joint_map[name]
        if mapped and mapped not in JOINT_SCHEMA:
            # surface bad targets early, with the source name attached
            raise UnmappedJointError(f"{name} -> {mapped}")

    frames: list[SceneGraph] = []
    for position, frame in enumerate(doc.get("frames", [])):
        nodes: list[SceneNode] = []
        for person in frame.get("persons", []):
            track = person["track_id"]
            is_patient = track in cfg.patient_tracks or str(track) in {
                str(t) for t in cfg.patient_tracks
            }
            nodes.append(
                SceneNode(
                    id=f"person_{track}",
                    node_class=NodeClass.parse("patient" if is_patient else "medical_staff"),
                    kind=NodeKind.REAL,
                    pose=_person_pose(person, joint_names, cfg),
                    attributes=person.get("attributes", {}),
                )
            )
        for obj in frame.get("objects", []):
            label = obj.get("label", "")
            if label not in cfg.label_map:
                raise UnmappedLabelError(label)
            nodes.append(
                SceneNode(
                    id=str(obj.get("track_id", label)),
                    node_class=NodeClass.parse(cfg.label_map[label]),
                    kind=NodeKind.REAL,
                    pose=ObjectPose(
                        center=tuple(float(v) for v in obj["center"]),
                        halfextents=tuple(float(v) for v in obj["halfextents"]),
                        yaw=float(obj.get("yaw", 0.0)),
                    ),
                    attributes=obj.get("attributes", {}),
                )
            )
        timestamp = float(frame.get("timestamp", position * cfg.frame_period))
        graph = build_graph(nodes, [], timestamp=timestamp, frame_index=position)
        if cfg.derive_relations:
            graph = with_derived_relations(graph, cfg.relation_cfg)
        frames.append(graph)

    return Timeline(
        id=doc.get("id", cfg.timeline_id),
        frames=tuple(frames),
        metadata={
            "source": doc.get("source", "annotations"),
            "room_extent": cfg.room_extent,
        },
    )
