"""Iterative graph adaptation.

Each iteration detects a salient point on every edge, then moves every node
to the unweighted centroid of the salient points on its incident edges. The
loop stops when the mean node displacement drops below the residual threshold
or after the iteration cap. Topology never changes.
"""
from __future__ import annotations

import json
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

from .graph import Graph
from .image import Image
from .salient import DetectorConfig, SalientPoint, detect_all_edges

RESULT_SCHEMA_VERSION = 1


@dataclass(frozen=True)
class AdaptConfig:
    max_iterations: int = 10
    residual_threshold: float = 0.1  # pixels
    detector: DetectorConfig = field(default_factory=DetectorConfig)
    clamp_to_extent: bool = True

    def __post_init__(self):
        if self.max_iterations < 1:
            raise ValueError("max_iterations must be at least 1")
        if self.residual_threshold <= 0.0:
            raise ValueError("residual_threshold must be positive")


@dataclass(frozen=True)
class SalientPointSet:
    """Per-edge detection results as parallel arrays indexed by edge."""

    t_hat: np.ndarray
    positions: np.ndarray
    saliency: np.ndarray

    def __len__(self) -> int:
        return len(self.t_hat)

    def point(self, edge_index: int) -> SalientPoint:
        return SalientPoint(
            int(edge_index),
            float(self.t_hat[edge_index]),
            self.positions[edge_index],
            float(self.saliency[edge_index]),
        )


@dataclass(frozen=True)
class AdaptResult:
    graph: Graph
    salient: SalientPointSet  # recomputed on the final node positions
    residual_history: list[float]
    iterations: int


def residual(before: np.ndarray, after: np.ndarray) -> float:
    """Mean Euclidean displacement between two position lists."""
    before = np.asarray(before, dtype=np.float64)
    after = np.asarray(after, dtype=np.float64)
    if before.shape != after.shape:
        raise ValueError("position lists must have equal shapes")
    return float(np.mean(np.linalg.norm(after - before, axis=-1)))


def adapt_graph(img: Image, initial: Graph, cfg: AdaptConfig | None = None) -> AdaptResult:
    """Adapt a graph to an image; returns the final graph and salient points."""
    cfg = cfg or AdaptConfig()
    hi = np.array(img.dims, dtype=np.float64) - 1.0
    pos = np.array(initial.nodes, dtype=np.float64)
    if np.any(pos < 0.0) or np.any(pos > hi):
        raise ValueError("initial node positions must lie inside the image extent")
    edges = initial.edges
    degree = initial.degrees.astype(np.float64)
    history: list[float] = []
    for _ in range(cfg.max_iterations):
        _, _, sp = detect_all_edges(img, pos, edges, cfg.detector)
        new = np.zeros_like(pos)
        np.add.at(new, edges[:, 0], sp)
        np.add.at(new, edges[:, 1], sp)
        new /= degree[:, None]
        if cfg.clamp_to_extent:
            np.clip(new, 0.0, hi, out=new)
        r = residual(pos, new)
        history.append(r)
        pos = new
        if r < cfg.residual_threshold:
            break
    # one extra pass so the reported points are consistent with final positions
    t, s, sp = detect_all_edges(img, pos, edges, cfg.detector)
    return AdaptResult(
        graph=initial.with_positions(pos),
        salient=SalientPointSet(t, sp, s),
        residual_history=history,
        iterations=len(history),
    )


def result_to_dict(result: AdaptResult, config: dict | None = None) -> dict:
    doc = {
        "schema_version": RESULT_SCHEMA_VERSION,
        "type": "adapted-graph",
        "graph": result.graph.to_dict(),
        "salient": {
            "t_hat": result.salient.t_hat.tolist(),
            "positions": result.salient.positions.tolist(),
            "saliency": result.salient.saliency.tolist(),
        },
        "residual_history": [float(r) for r in result.residual_history],
        "iterations": result.iterations,
    }
    if config is not None:
        doc["config"] = config
    return doc


def result_from_dict(doc: dict) -> AdaptResult:
    if doc.get("type") != "adapted-graph":
        raise ValueError("not an adapted-graph document")
    if doc.get("schema_version") != RESULT_SCHEMA_VERSION:
        raise ValueError(f"unsupported schema version {doc.get('schema_version')!r}")
    sal = doc["salient"]
    return AdaptResult(
        graph=Graph.from_dict(doc["graph"]),
        salient=SalientPointSet(
            np.asarray(sal["t_hat"], dtype=np.float64),
            np.asarray(sal["positions"], dtype=np.float64),
            np.asarray(sal["saliency"], dtype=np.float64),
        ),
        residual_history=[float(r) for r in doc["residual_history"]],
        iterations=int(doc["iterations"]),
    )


def save_result(result: AdaptResult, path, config: dict | None = None) -> None:
    Path(path).write_text(json.dumps(result_to_dict(result, config)))


def load_result(path) -> AdaptResult:
    return result_from_dict(json.loads(Path(path).read_text()))
