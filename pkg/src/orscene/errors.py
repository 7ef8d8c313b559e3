"""Exception hierarchy for the orscene package.

Every error names the offending element (node id, edge triple, line
number, ...) so callers can report precisely what was rejected.
"""

from __future__ import annotations


class OrSceneError(Exception):
    """Base class for all orscene errors."""


# --- graph construction / validation ---------------------------------------

class GraphError(OrSceneError):
    """Invalid scene-graph structure."""


class DuplicateIdError(GraphError):
    def __init__(self, node_id: str):
        self.node_id = node_id
        super().__init__(f"duplicate node id: {node_id!r}")


class DanglingEdgeError(GraphError):
    def __init__(self, node_id: str):
        self.node_id = node_id
        super().__init__(f"edge endpoint references undeclared node id: {node_id!r}")


class SelfLoopError(GraphError):
    def __init__(self, node_id: str):
        self.node_id = node_id
        super().__init__(f"edge connects node {node_id!r} to itself")


class DuplicateEdgeError(GraphError):
    def __init__(self, triple: tuple[str, str, str]):
        self.triple = triple
        super().__init__(f"duplicate edge triple: {triple!r}")


class NegativeTimestampError(GraphError):
    def __init__(self, timestamp: float):
        self.timestamp = timestamp
        super().__init__(f"timestamp must be >= 0, got {timestamp}")


class KindViolationError(GraphError):
    """A node or edge declares a kind that its context forbids."""

    def __init__(self, element: str, detail: str):
        self.element = element
        super().__init__(f"{element}: {detail}")


class FieldError(GraphError):
    """A field-level invariant failed (attribute keys, pose values, ...)."""

    def __init__(self, element: str, detail: str):
        self.element = element
        super().__init__(f"{element}: {detail}")


# --- relation derivation ----------------------------------------------------

class MissingPoseError(OrSceneError):
    def __init__(self, node_id: str):
        self.node_id = node_id
        super().__init__(f"real node {node_id!r} has no pose")


# --- feature extraction -----------------------------------------------------

class MultiplePatientsError(OrSceneError):
    def __init__(self, node_ids: tuple[str, ...]):
        self.node_ids = node_ids
        super().__init__(f"graph contains more than one patient node: {sorted(node_ids)}")


# --- synchronization ----------------------------------------------------------

class EmptyTimelineError(OrSceneError):
    def __init__(self, timeline_id: str):
        self.timeline_id = timeline_id
        super().__init__(f"timeline {timeline_id!r} has no frames")


class InstanceTooLargeError(OrSceneError):
    def __init__(self, m: int, n: int, limit: int):
        self.m, self.n, self.limit = m, n, limit
        super().__init__(f"exhaustive alignment limited to m+n <= {limit}, got {m}+{n}")


class IndexOutOfRangeError(OrSceneError, IndexError):
    def __init__(self, index: int, size: int):
        self.index, self.size = index, size
        super().__init__(f"frame index {index} out of range [0, {size})")


# --- timeline documents -------------------------------------------------------

class DocumentError(OrSceneError):
    """Invalid timeline document."""


class SchemaVersionError(DocumentError):
    def __init__(self, found, expected: int):
        self.found, self.expected = found, expected
        super().__init__(f"unsupported document schema version {found!r}, expected {expected}")


class MalformedRecordError(DocumentError):
    def __init__(self, line: int, detail: str):
        self.line = line
        super().__init__(f"line {line}: {detail}")


# --- annotation adapter ---------------------------------------------------------

class AdapterError(OrSceneError):
    """Invalid annotation input or mapping configuration."""


class UnmappedJointError(AdapterError):
    def __init__(self, joint: str):
        self.joint = joint
        super().__init__(f"source joint {joint!r} has no entry in the joint map")


class UnmappedLabelError(AdapterError):
    def __init__(self, label: str):
        self.label = label
        super().__init__(f"source label {label!r} has no entry in the label map")


class MissingCameraMetadataError(AdapterError):
    """Raised when an entry carries only 2D data; projecting it would need
    camera metadata, and this adapter accepts 3D annotations only."""

    def __init__(self, element: str):
        self.element = element
        super().__init__(
            f"{element}: entry has no 3D keypoints (2D-only input is not accepted)"
        )


# --- synthetic generator ----------------------------------------------------------

class EmptyScriptError(OrSceneError):
    def __init__(self):
        super().__init__("procedure script has no phases")


class WarpCoverageError(OrSceneError):
    def __init__(self, detail: str):
        super().__init__(detail)
