"""Factor-based distance between two scene graphs.

A graph is first reduced to a feature vector of elementary facts
(presence of patient, staff, devices; staff count; surgery site;
patient position; acquisition time). The distance between two graphs is
the weighted sum of per-factor normalized deltas, each in [0, 1], so a
weight's magnitude directly bounds its factor's contribution.
"""

from __future__ import annotations

import json
import math
from dataclasses import dataclass, field
from pathlib import Path
from typing import Mapping, Optional

from .errors import FieldError, MultiplePatientsError
from .geometry import Point3, dist3
from .model import (
    C_ARM,
    CT,
    ENDOSCOPIC_VISUALIZATION,
    MEDICAL_STAFF,
    MONITOR,
    PATIENT,
    PATIENT_MONITORING,
    HumanPose,
    ObjectPose,
    SceneGraph,
)
from .relations import SurgerySite, classify_surgery_site

# Canonical factor order; reports and serialized weights follow it.
FACTOR_ORDER: tuple[str, ...] = (
    "has_patient",
    "has_staff",
    "has_monitor",
    "has_c_arm",
    "has_patient_monitoring",
    "has_ct",
    "has_endoscopic_vis",
    "staff_count",
    "surgery_site",
    "patient_position",
    "acquisition_time",
)


@dataclass(frozen=True)
class FeatureVector:
    """Elementary facts extracted from one scene graph."""

    has_patient: bool
    has_staff: bool
    has_monitor: bool
    has_c_arm: bool
    has_patient_monitoring: bool
    has_ct: bool
    has_endoscopic_vis: bool
    staff_count: int
    surgery_site: SurgerySite
    patient_position: Optional[Point3]
    acquisition_time: float

    def __post_init__(self):
        if not self.has_patient and self.patient_position is not None:
            raise FieldError("feature vector", "patient_position requires has_patient")
        if (self.staff_count > 0) != self.has_staff:
            raise FieldError("feature vector", "staff_count and has_staff disagree")

    def value(self, factor: str):
        return getattr(self, factor)


@dataclass(frozen=True)
class WeightProfile:
    """Per-factor non-negative weights plus normalization constants.

    l_room normalizes patient-position deltas, t_max acquisition-time
    deltas. The default profile weighs every factor 1.
    """

    weights: Mapping[str, float] = field(
        default_factory=lambda: {k: 1.0 for k in FACTOR_ORDER}
    )
    l_room: float = 10.0
    t_max: float = 3600.0

    def __post_init__(self):
        w = dict(self.weights)
        unknown = set(w) - set(FACTOR_ORDER)
        if unknown:
            raise FieldError("weight profile", f"unknown factors: {sorted(unknown)}")
        for k in FACTOR_ORDER:
            w.setdefault(k, 0.0)
            if not math.isfinite(w[k]) or w[k] < 0:
                raise FieldError("weight profile", f"weight {k} must be >= 0, got {w[k]}")
        if self.l_room <= 0 or self.t_max <= 0:
            raise FieldError("weight profile", "l_room and t_max must be > 0")
        object.__setattr__(self, "weights", w)

    def __getitem__(self, factor: str) -> float:
        return self.weights[factor]

    def total_weight(self) -> float:
        return sum(self.weights.values())

    def scaled(self, alpha: float) -> "WeightProfile":
        return WeightProfile(
            {k: alpha * v for k, v in self.weights.items()}, self.l_room, self.t_max
        )

    def to_dict(self) -> dict:
        return {
            "weights": {k: self.weights[k] for k in FACTOR_ORDER},
            "l_room": self.l_room,
            "t_max": self.t_max,
        }

    @classmethod
    def from_dict(cls, data: Mapping) -> "WeightProfile":
        return cls(
            weights=dict(data.get("weights", {})),
            l_room=float(data.get("l_room", 10.0)),
            t_max=float(data.get("t_max", 3600.0)),
        )

    @classmethod
    def from_file(cls, path: str | Path) -> "WeightProfile":
        with open(path, encoding="utf-8") as fh:
            return cls.from_dict(json.load(fh))


def uniform_profile() -> WeightProfile:
    return WeightProfile()


def sync_default_profile() -> WeightProfile:
    """Alignment preset: acquisition time weighed 0, everything else 1.

    A monotone time term would dominate warping-path costs, so the
    synchronization preset mutes it.
    """
    weights = {k: 1.0 for k in FACTOR_ORDER}
    weights["acquisition_time"] = 0.0
    return WeightProfile(weights)


PRESETS = {
    "uniform": uniform_profile,
    "sync-default": sync_default_profile,
}


def resolve_profile(name_or_path: str) -> WeightProfile:
    """Look up a named preset, falling back to a JSON profile file."""
    if name_or_path in PRESETS:
        return PRESETS[name_or_path]()
    return WeightProfile.from_file(name_or_path)


def extract_features(graph: SceneGraph) -> FeatureVector:
    """Reduce a graph to its feature vector.

    Raises MultiplePatientsError if the graph holds more than one
    patient node (a sign of malformed ingestion).
    """
    patients = graph.nodes_of_class(PATIENT)
    if len(patients) > 1:
        raise MultiplePatientsError(tuple(n.id for n in patients))
    staff_count = len(graph.nodes_of_class(MEDICAL_STAFF))

    position: Optional[Point3] = None
    if patients:
        pose = patients[0].pose
        if isinstance(pose, ObjectPose):
            position = pose.center
        elif isinstance(pose, HumanPose):
            position = pose.median_point

    return FeatureVector(
        has_patient=bool(patients),
        has_staff=staff_count > 0,
        has_monitor=bool(graph.nodes_of_class(MONITOR)),
        has_c_arm=bool(graph.nodes_of_class(C_ARM)),
        has_patient_monitoring=bool(graph.nodes_of_class(PATIENT_MONITORING)),
        has_ct=bool(graph.nodes_of_class(CT)),
        has_endoscopic_vis=bool(graph.nodes_of_class(ENDOSCOPIC_VISUALIZATION)),
        staff_count=staff_count,
        surgery_site=classify_surgery_site(graph),
        patient_position=position,
        acquisition_time=graph.timestamp,
    )


def _position_delta(a: FeatureVector, b: FeatureVector, l_room: float) -> float:
    if a.has_patient != b.has_patient:
        return 1.0
    if not a.has_patient:
        return 0.0
    if a.patient_position is None and b.patient_position is None:
        return 0.0
    if a.patient_position is None or b.patient_position is None:
        # one patient located, the other not: treat as maximally apart
        return 1.0
    return min(1.0, dist3(a.patient_position, b.patient_position) / l_room)


def factor_delta(
    a: FeatureVector, b: FeatureVector, profile: WeightProfile
) -> dict[str, float]:
    """Per-factor normalized deltas, each in [0, 1], keyed by factor."""
    deltas: dict[str, float] = {}
    for flag in FACTOR_ORDER[:7]:
        deltas[flag] = float(a.value(flag) != b.value(flag))
    deltas["staff_count"] = abs(a.staff_count - b.staff_count) / max(
        a.staff_count, b.staff_count, 1
    )
    deltas["surgery_site"] = float(a.surgery_site != b.surgery_site)
    deltas["patient_position"] = _position_delta(a, b, profile.l_room)
    deltas["acquisition_time"] = min(
        1.0, abs(a.acquisition_time - b.acquisition_time) / profile.t_max
    )
    return deltas


def feature_distance(
    a: FeatureVector, b: FeatureVector, profile: WeightProfile
) -> float:
    deltas = factor_delta(a, b, profile)
    return sum(profile[k] * deltas[k] for k in FACTOR_ORDER)


def graph_distance(
    g1: SceneGraph, g2: SceneGraph, profile: WeightProfile = WeightProfile()
) -> float:
    """Weighted factor distance between two graphs.

    Symmetric, zero when the extracted feature vectors agree, and
    bounded above by the sum of the weights.
    """
    return feature_distance(extract_features(g1), extract_features(g2), profile)
