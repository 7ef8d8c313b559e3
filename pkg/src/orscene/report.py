"""Event-change reporting between two scene graphs.

diff_graphs computes the semantic difference (factor changes plus
appeared/disappeared nodes and relations); render_report turns it into
ordered sentences from an editable template table. Node identity across
frames is the id string; ingestion is responsible for keeping ids
stable.
"""

from __future__ import annotations

import json
from dataclasses import dataclass
from importlib import resources
from pathlib import Path
from typing import Optional

from .distance import FACTOR_ORDER, extract_features
from .geometry import dist3
from .model import SceneGraph
from .relations import SurgerySite

APPEARED = "appeared"
DISAPPEARED = "disappeared"
MOVED = "moved"


@dataclass(frozen=True)
class ReporterConfig:
    """Movement reporting is off by default: the reporter is
    change-of-state oriented, and pose jitter would flood it."""

    report_movement: bool = False
    movement_threshold: float = 0.25


@dataclass(frozen=True)
class FactorChange:
    factor: str
    old: object
    new: object


@dataclass(frozen=True)
class NodeChange:
    change: str  # appeared | disappeared | moved
    node_id: str
    node_class: str
    displacement: Optional[float] = None


@dataclass(frozen=True)
class EdgeChange:
    change: str  # appeared | disappeared
    source: str
    relation: str
    target: str
    kind: str


@dataclass(frozen=True)
class ChangeSet:
    """Ordered, duplicate-free difference between two graphs."""

    factor_changes: tuple[FactorChange, ...] = ()
    node_changes: tuple[NodeChange, ...] = ()
    edge_changes: tuple[EdgeChange, ...] = ()

    def __len__(self) -> int:
        return len(self.factor_changes) + len(self.node_changes) + len(self.edge_changes)

    def is_empty(self) -> bool:
        return len(self) == 0

    def to_dict(self) -> dict:
        return {
            "factor_changes": [
                {"factor": c.factor, "old": _jsonable(c.old), "new": _jsonable(c.new)}
                for c in self.factor_changes
            ],
            "node_changes": [
                {
                    "change": c.change,
                    "id": c.node_id,
                    "class": c.node_class,
                    **({"displacement": c.displacement} if c.displacement is not None else {}),
                }
                for c in self.node_changes
            ],
            "edge_changes": [
                {
                    "change": c.change,
                    "source": c.source,
                    "relation": c.relation,
                    "target": c.target,
                    "kind": c.kind,
                }
                for c in self.edge_changes
            ],
        }


def _jsonable(value):
    if isinstance(value, SurgerySite):
        return value.value
    if isinstance(value, tuple):
        return list(value)
    return value


def diff_graphs(
    g_old: SceneGraph, g_new: SceneGraph, cfg: ReporterConfig = ReporterConfig()
) -> ChangeSet:
    """Semantic difference between two graphs.

    Ordering is deterministic: factors in canonical factor order, then
    node changes by id, then edge changes by (source, relation, target).
    """
    f_old = extract_features(g_old)
    f_new = extract_features(g_new)

    factor_changes: list[FactorChange] = []
    for factor in FACTOR_ORDER:
        old, new = f_old.value(factor), f_new.value(factor)
        if factor == "patient_position":
            if (old is None) != (new is None):
                factor_changes.append(FactorChange(factor, old, new))
            elif (
                old is not None
                and new is not None
                and cfg.report_movement
                and dist3(old, new) > cfg.movement_threshold
            ):
                factor_changes.append(FactorChange(factor, old, new))
        elif old != new:
            factor_changes.append(FactorChange(factor, old, new))

    old_ids = {n.id for n in g_old.nodes}
    new_ids = {n.id for n in g_new.nodes}
    node_changes: list[NodeChange] = []
    for nid in sorted(old_ids | new_ids):
        if nid not in new_ids:
            node = g_old.node(nid)
            node_changes.append(NodeChange(DISAPPEARED, nid, str(node.node_class)))
        elif nid not in old_ids:
            node = g_new.node(nid)
            node_changes.append(NodeChange(APPEARED, nid, str(node.node_class)))
        elif cfg.report_movement:
            before, after = g_old.node(nid).center, g_new.node(nid).center
            if before is not None and after is not None:
                moved = dist3(before, after)
                if moved > cfg.movement_threshold:
                    node_changes.append(
                        NodeChange(MOVED, nid, str(g_new.node(nid).node_class), moved)
                    )

    old_edges = {e.triple: e for e in g_old.edges}
    new_edges = {e.triple: e for e in g_new.edges}
    edge_changes: list[EdgeChange] = []
    for triple in sorted(set(old_edges) | set(new_edges)):
        if triple not in new_edges:
            e = old_edges[triple]
            edge_changes.append(EdgeChange(DISAPPEARED, e.source, e.relation, e.target, e.kind.value))
        elif triple not in old_edges:
            e = new_edges[triple]
            edge_changes.append(EdgeChange(APPEARED, e.source, e.relation, e.target, e.kind.value))

    return ChangeSet(tuple(factor_changes), tuple(node_changes), tuple(edge_changes))


# --- rendering ---------------------------------------------------------------

_BOOLEAN_FACTORS = frozenset(FACTOR_ORDER[:7])


def load_templates(path: Optional[str | Path] = None) -> dict:
    """Template table: package default, or any user-edited JSON copy."""
    if path is not None:
        with open(path, encoding="utf-8") as fh:
            return json.load(fh)
    raw = resources.files("orscene").joinpath("data/report_templates.json").read_text("utf-8")
    return json.loads(raw)


def _format_value(value) -> str:
    if isinstance(value, bool):
        return str(int(value))
    if isinstance(value, SurgerySite):
        return value.value
    if isinstance(value, tuple):
        return "(" + ", ".join(f"{v:.2f}" for v in value) + ")"
    if value is None:
        return "unknown"
    if isinstance(value, float):
        return f"{value:g}"
    return str(value)


def _label(templates: dict, class_token: str) -> str:
    if class_token.startswith("other:"):
        return class_token[len("other:"):].replace("_", " ").capitalize()
    return templates["labels"].get(class_token, class_token.replace("_", " ").capitalize())


def render_report(changeset: ChangeSet, templates: Optional[dict] = None) -> list[str]:
    """One sentence per change, in changeset order."""
    t = templates if templates is not None else load_templates()
    sentences: list[str] = []

    for c in changeset.factor_changes:
        spec = t["factor"][c.factor]
        if c.factor in _BOOLEAN_FACTORS:
            sentences.append(spec[APPEARED if c.new else DISAPPEARED])
        else:
            sentences.append(
                spec.format(old=_format_value(c.old), new=_format_value(c.new))
            )

    for c in changeset.node_changes:
        table = t["node"][c.change]
        template = table.get(c.node_class, table["default"])
        sentences.append(
            template.format(
                id=c.node_id,
                label=_label(t, c.node_class),
                dist=f"{c.displacement:.2f}" if c.displacement is not None else "",
            )
        )

    for c in changeset.edge_changes:
        sentences.append(
            t["edge"][c.change].format(rel=c.relation, src=c.source, dst=c.target)
        )

    return sentences
