"""Object proposal generalization toolkit.

Python surface over the C++ core: proposal metrics (AP, AR@k), NMS and
detection fusion, class replaceability similarity, prototypical class
selection, budgeted dataset construction, label-granularity relabeling, and
the synthetic world used for end-to-end trend studies.
"""

from ._core import (
    ApTable,
    ArTable,
    Box,
    BudgetConfig,
    BudgetedDataset,
    ConfigError,
    Dataset,
    Detection,
    DetectorModelConfig,
    FusionConfig,
    GtInstance,
    MetricConfig,
    NmsMode,
    ParseError,
    Proposal,
    ProposalSet,
    ProtoSelection,
    RelabelResult,
    ScoredBox,
    SemanticTree,
    SimConfig,
    SimilarityMatrix,
    SimWorld,
    ValidationError,
    adjusted_rand_index,
    average_precision,
    average_recall,
    box_from_xywh,
    build_budgeted_dataset,
    class_frequencies,
    compute_ap_table,
    fuse_detections_to_proposals,
    generate_world,
    iou,
    most_frequent_subset,
    nms,
    oracle_visual_clustering,
    random_subset,
    relabel_to_level,
    remove_by_source,
    semantic_frequency_clustering,
    similarity_matrix,
    simulate_detections,
)

__version__ = "0.1.0"

__all__ = [
    "ApTable",
    "ArTable",
    "Box",
    "BudgetConfig",
    "BudgetedDataset",
    "ConfigError",
    "Dataset",
    "Detection",
    "DetectorModelConfig",
    "FusionConfig",
    "GtInstance",
    "MetricConfig",
    "NmsMode",
    "ParseError",
    "Proposal",
    "ProposalSet",
    "ProtoSelection",
    "RelabelResult",
    "ScoredBox",
    "SemanticTree",
    "SimConfig",
    "SimilarityMatrix",
    "SimWorld",
    "ValidationError",
    "adjusted_rand_index",
    "average_precision",
    "average_recall",
    "box_from_xywh",
    "build_budgeted_dataset",
    "class_frequencies",
    "compute_ap_table",
    "fuse_detections_to_proposals",
    "generate_world",
    "iou",
    "most_frequent_subset",
    "nms",
    "oracle_visual_clustering",
    "random_subset",
    "relabel_to_level",
    "remove_by_source",
    "semantic_frequency_clustering",
    "similarity_matrix",
    "simulate_detections",
]
