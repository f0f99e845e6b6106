"""Feature-adapted graphs and oversegmenting dual graphs from scalar images."""

__version__ = "0.1.0"

from .adapt import AdaptConfig, AdaptResult, SalientPointSet, adapt_graph, residual
from .dual import DualGraph, build_dual, filter_by_saliency
from .evaluate import (
    RecallConfig,
    RecallCurve,
    SweepConfig,
    boundary_recall,
    distance_transform,
    recall_sweep,
)
from .export import gdl_record, node_saliency, read_jsonl, write_jsonl
from .graph import Graph, TriangulationSpec, graph_stats, uniform_triangulation
from .image import (
    Image,
    SyntheticShape,
    generate_synthetic,
    ground_truth_contour,
    load_image,
    save_image,
)
from .render import RenderSpec, render_graph, render_svg
from .salient import DetectorConfig, EdgeProfile, SalientPoint, detect_edge

__all__ = [
    "AdaptConfig",
    "AdaptResult",
    "DetectorConfig",
    "DualGraph",
    "EdgeProfile",
    "Graph",
    "Image",
    "RecallConfig",
    "RecallCurve",
    "RenderSpec",
    "SalientPoint",
    "SalientPointSet",
    "SweepConfig",
    "SyntheticShape",
    "TriangulationSpec",
    "adapt_graph",
    "boundary_recall",
    "build_dual",
    "detect_edge",
    "distance_transform",
    "filter_by_saliency",
    "gdl_record",
    "generate_synthetic",
    "graph_stats",
    "ground_truth_contour",
    "load_image",
    "node_saliency",
    "read_jsonl",
    "recall_sweep",
    "render_graph",
    "render_svg",
    "residual",
    "save_image",
    "uniform_triangulation",
    "write_jsonl",
]
