"""Scene-graph modeling, synchronization and monitoring for OR procedures."""

from .model import (
    JOINT_SCHEMA,
    EdgeKind,
    HumanPose,
    NodeClass,
    NodeKind,
    ObjectPose,
    SceneEdge,
    SceneGraph,
    SceneNode,
    Timeline,
    build_graph,
    merge_virtual,
    query_nodes,
    validate_graph,
)
from .relations import (
    RelationConfig,
    SurgerySite,
    classify_surgery_site,
    derive_semantic,
    derive_spatial,
    with_derived_relations,
)
from .distance import (
    FACTOR_ORDER,
    FeatureVector,
    WeightProfile,
    extract_features,
    factor_delta,
    feature_distance,
    graph_distance,
    resolve_profile,
    sync_default_profile,
    uniform_profile,
)
from .sync import (
    AlignmentPath,
    CostMatrix,
    alignment_from_dict,
    alignment_to_dict,
    alignment_to_json,
    brute_force_align,
    cost_matrix,
    dtw_align,
    recovery_fraction,
    warp_lookup,
)
from .report import ChangeSet, ReporterConfig, diff_graphs, render_report
from .bev import BevConfig, BevLayout, project_topdown, render_svg
from .timeline_io import load_timeline, parse_timeline, save_timeline, write_timeline
from .adapter import MappingConfig, adapt_annotations
from .synth import (
    WarpSpec,
    apply_time_warp,
    identity_warp,
    load_script,
    random_warp,
    synth_procedure,
)

__version__ = "0.1.0"
