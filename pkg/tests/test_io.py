import json
import random
from pathlib import Path

import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from orscene.adapter import MappingConfig, adapt_annotations
from orscene.errors import (
    DuplicateIdError,
    EmptyScriptError,
    FieldError,
    MalformedRecordError,
    MissingCameraMetadataError,
    SchemaVersionError,
    UnmappedJointError,
    UnmappedLabelError,
    WarpCoverageError,
)
from orscene.model import JOINT_SCHEMA
from orscene.synth import (
    WarpSpec,
    apply_time_warp,
    identity_warp,
    load_script,
    random_warp,
    synth_procedure,
)
from orscene.timeline_io import load_timeline, parse_timeline, write_timeline

from .generators import random_timeline

DATA = Path(__file__).parent / "data"

MINIMAL_DOC = (
    '{"record":"header","version":1,"id":"mini","metadata":{"room_extent":10.0}}\n'
    '{"record":"frame","frame_index":0,"timestamp":0.0,"nodes":'
    '[{"id":"p1","class":"patient","kind":"real","pose":null,"attributes":{}}],"edges":[]}\n'
)

SCANNED_DOC = (
    '{"record":"header","version":1,"id":"scan","metadata":{}}\n'
    '{"record":"frame","frame_index":0,"timestamp":5.0,"nodes":['
    '{"id":"p1","class":"patient","kind":"real","pose":null,"attributes":{}},'
    '{"id":"arm","class":"c_arm","kind":"real","pose":null,"attributes":{"state":"acquiring"}}'
    '],"edges":[{"source":"p1","relation":"getting_scanned","target":"arm","kind":"semantic"}]}\n'
)


def test_parse_minimal_document():
    t = parse_timeline(MINIMAL_DOC)
    assert t.id == "mini" and len(t) == 1
    assert t.frames[0].nodes[0].id == "p1"


def test_parse_scanned_fixture():
    t = parse_timeline(SCANNED_DOC)
    (edge,) = t.frames[0].edges
    assert edge.triple == ("p1", "getting_scanned", "arm")


def test_header_only_round_trips():
    from orscene.model import Timeline

    t = Timeline("empty", (), {"room_extent": 5.0})
    assert parse_timeline(write_timeline(t)) == t


def test_out_of_order_timestamps_rejected():
    doc = MINIMAL_DOC + (
        '{"record":"frame","frame_index":1,"timestamp":0.0,"nodes":[],"edges":[]}\n'
    )
    with pytest.raises(MalformedRecordError) as exc:
        parse_timeline(doc)
    assert exc.value.line == 3


def test_schema_version_mismatch():
    with pytest.raises(SchemaVersionError):
        parse_timeline('{"record":"header","version":99,"id":"x","metadata":{}}\n')


def test_invalid_json_names_line():
    with pytest.raises(MalformedRecordError) as exc:
        parse_timeline(MINIMAL_DOC + "not-json\n")
    assert exc.value.line == 3


def test_graph_errors_carry_frame_context():
    doc = (
        '{"record":"header","version":1,"id":"bad","metadata":{}}\n'
        '{"record":"frame","frame_index":0,"timestamp":0.0,"nodes":['
        '{"id":"x","class":"monitor","kind":"real","pose":null,"attributes":{}},'
        '{"id":"x","class":"monitor","kind":"real","pose":null,"attributes":{}}],"edges":[]}\n'
    )
    with pytest.raises(DuplicateIdError) as exc:
        parse_timeline(doc)
    assert "frame 0" in str(exc.value)


def test_header_must_come_first():
    with pytest.raises(MalformedRecordError):
        parse_timeline('{"record":"frame","frame_index":0,"timestamp":0,"nodes":[],"edges":[]}\n')


@given(st.integers(min_value=0, max_value=10**9))
@settings(max_examples=80, deadline=None)
def test_round_trip_identity(seed):
    t = random_timeline(random.Random(seed))
    assert parse_timeline(write_timeline(t)) == t


def test_round_trip_demo(demo_timeline, tmp_path):
    text = write_timeline(demo_timeline)
    assert parse_timeline(text) == demo_timeline
    # and through the filesystem
    p = tmp_path / "demo.jsonl"
    p.write_text(text, encoding="utf-8")
    assert load_timeline(p) == demo_timeline


# --- annotation adapter -------------------------------------------------------

JOINT_MAP = {
    "head": "nose",
    "neck": "",  # no artifact equivalent; discarded
    "left_shoulder": "left_shoulder",
    "right_shoulder": "right_shoulder",
    "left_hip": "left_hip",
    "right_hip": "right_hip",
    "left_elbow": "left_elbow",
    "right_elbow": "right_elbow",
    "left_wrist": "left_wrist",
    "right_wrist": "right_wrist",
}


@pytest.fixture(scope="module")
def annotation_doc():
    return json.loads((DATA / "annotations_fixture.json").read_text())


def mapping(**kwargs):
    defaults = dict(joint_map=JOINT_MAP, label_map={"op_table": "operating_table"})
    defaults.update(kwargs)
    return MappingConfig(**defaults)


def test_adapter_maps_persons_to_staff(annotation_doc):
    t = adapt_annotations(annotation_doc, mapping())
    assert t.id == "or-day4-seq2"
    assert len(t) == 2
    frame0 = t.frames[0]
    staff = [n for n in frame0.nodes if n.node_class.token == "medical_staff"]
    assert {n.id for n in staff} == {"person_101", "person_7", "person_12"}
    # node count equals mapped entries: 3 persons + 1 object
    assert len(frame0.nodes) == 4


def test_adapter_patient_designation_and_lying_edge(annotation_doc):
    t = adapt_annotations(annotation_doc, mapping(patient_tracks=frozenset({101})))
    frame0 = t.frames[0]
    patient = frame0.node("person_101")
    assert patient.node_class.token == "patient"
    assert ("person_101", "lying_on", "table0") in frame0.edge_triples()


def test_adapter_unmapped_joint(annotation_doc):
    broken = dict(JOINT_MAP)
    del broken["neck"]
    with pytest.raises(UnmappedJointError) as exc:
        adapt_annotations(annotation_doc, mapping(joint_map=broken))
    assert exc.value.joint == "neck"


def test_adapter_unmapped_label(annotation_doc):
    with pytest.raises(UnmappedLabelError):
        adapt_annotations(annotation_doc, mapping(label_map={}))


def test_adapter_rejects_2d_only_entries(annotation_doc):
    doc = json.loads(json.dumps(annotation_doc))
    person = doc["frames"][0]["persons"][0]
    del person["keypoints3d"]
    person["keypoints2d"] = [[100, 200]] * 10
    with pytest.raises(MissingCameraMetadataError):
        adapt_annotations(doc, mapping())


def test_adapter_min_score_filters_joints(annotation_doc):
    t = adapt_annotations(annotation_doc, mapping(min_score=0.85))
    pose = t.frames[0].node("person_101").pose
    present = sum(1 for p in pose.keypoints if p is not None)
    # only head (0.91), left_shoulder (0.88) and right_shoulder (0.9) survive
    assert present == 3


# --- synthetic generator ---------------------------------------------------------

def test_synth_deterministic(demo_timeline):
    again = synth_procedure(load_script("default"), seed=7)
    assert again == demo_timeline
    other = synth_procedure(load_script("default"), seed=8)
    assert other != demo_timeline


def test_synth_demo_has_expected_span(demo_timeline):
    assert len(demo_timeline) >= 120
    assert demo_timeline.metadata["room_extent"] == 10.0


def test_synth_acquiring_phase_has_scanned_edge(demo_timeline):
    scanned = [
        g.frame_index
        for g in demo_timeline.frames
        if ("patient_1", "getting_scanned", "c_arm_1") in g.edge_triples()
    ]
    assert len(scanned) >= 20  # the whole acquisition phase


def test_synth_single_phase_script():
    script = {
        "name": "single",
        "frame_period": 1.0,
        "jitter": 0.0,
        "phases": [
            {
                "name": "only",
                "frames": 5,
                "entities": [
                    {"id": "m", "class": "monitor", "shape": "box",
                     "at": [2.0, 2.0, 1.0], "halfextents": [0.2, 0.2, 0.2]}
                ],
            }
        ],
    }
    t = synth_procedure(script, seed=1)
    assert len(t) == 5
    from orscene.distance import extract_features

    feats = [extract_features(g) for g in t.frames]
    assert all(f.has_monitor for f in feats)
    assert all(f.staff_count == 0 for f in feats)


def test_synth_empty_script_rejected():
    with pytest.raises(EmptyScriptError):
        synth_procedure({"name": "none", "phases": []}, seed=0)
    with pytest.raises(FieldError):
        synth_procedure(
            {"name": "zero", "phases": [{"name": "p", "frames": 0, "entities": []}]},
            seed=0,
        )


# --- time warps --------------------------------------------------------------------

def test_identity_warp_round_trip(demo_timeline):
    warped, truth = apply_time_warp(demo_timeline, identity_warp(len(demo_timeline)))
    assert [g.frame_index for g in warped.frames] == list(range(len(demo_timeline)))
    assert truth.steps == tuple((i, i) for i in range(len(demo_timeline)))
    assert all(a.nodes == b.nodes for a, b in zip(warped.frames, demo_timeline.frames))


def test_duplicate_every_frame_ground_truth():
    t = random_timeline(random.Random(0), n_frames=3)
    warp = WarpSpec(((0, 2), (1, 2), (2, 2)))
    warped, truth = apply_time_warp(t, warp)
    assert len(warped) == 6
    assert truth.steps == ((0, 0), (0, 1), (1, 2), (1, 3), (2, 4), (2, 5))


def test_dropped_frames_canonicalized():
    t = random_timeline(random.Random(1), n_frames=5)
    warp = WarpSpec(tuple((i, 1) for i in range(5)), drops=frozenset({0, 3}))
    warped, truth = apply_time_warp(t, warp)
    assert len(warped) == 3
    assert truth.steps == ((0, 0), (1, 0), (2, 1), (3, 1), (4, 2))


def test_warp_validation():
    with pytest.raises(WarpCoverageError):
        WarpSpec(((0, 1), (2, 1)))  # gap in coverage
    with pytest.raises(WarpCoverageError):
        WarpSpec(((0, 0),))  # zero repeats
    with pytest.raises(WarpCoverageError):
        WarpSpec(((0, 1),), drops=frozenset({0}))  # everything dropped
    with pytest.raises(WarpCoverageError):
        apply_time_warp(
            random_timeline(random.Random(2), n_frames=3), identity_warp(4)
        )


@given(st.integers(min_value=0, max_value=10**9))
@settings(max_examples=60, deadline=None)
def test_random_warp_truth_is_valid_path(seed):
    rng = random.Random(seed)
    t = random_timeline(rng, n_frames=rng.randint(2, 8))
    warp = random_warp(len(t), seed=seed)
    warped, truth = apply_time_warp(t, warp)
    # AlignmentPath construction validates monotonic continuity
    assert truth.steps[0] == (0, 0)
    assert truth.end == (len(t) - 1, len(warped) - 1)
    ts = [g.timestamp for g in warped.frames]
    assert all(b > a for a, b in zip(ts, ts[1:]))
