"""Export adapted graphs as line-delimited JSON for graph-learning pipelines.

One record per image. Node features are the interpolated image intensity at
the node position, the mean saliency of the node's incident edges, or both
(in that order). Per-edge saliency is always exported alongside.
"""
from __future__ import annotations

import json
from pathlib import Path

import numpy as np

from .adapt import AdaptResult
from .image import Image

SCHEMA_VERSION = 1

FEATURE_MODES = ("intensity", "saliency", "both")


def node_saliency(adapted: AdaptResult) -> np.ndarray:
    """Per-node mean saliency over incident edges."""
    g = adapted.graph
    if len(adapted.salient) != g.edge_count:
        raise ValueError("adapted result must carry one salient point per edge")
    acc = np.zeros(g.node_count)
    s = adapted.salient.saliency
    np.add.at(acc, g.edges[:, 0], s)
    np.add.at(acc, g.edges[:, 1], s)
    return acc / g.degrees


def gdl_record(
    adapted: AdaptResult,
    img: Image,
    features: str = "both",
    label: int | None = None,
) -> dict:
    """Build one export record for an adapted graph."""
    if features not in FEATURE_MODES:
        raise ValueError(f"unknown feature mode {features!r}")
    g = adapted.graph
    columns = []
    names = []
    if features in ("intensity", "both"):
        columns.append(img.sample_many(g.nodes))
        names.append("intensity")
    if features in ("saliency", "both"):
        columns.append(node_saliency(adapted))
        names.append("saliency")
    feats = np.stack(columns, axis=1)
    record = {
        "schema_version": SCHEMA_VERSION,
        "nodes": g.nodes.tolist(),
        "edges": g.edges.tolist(),
        "node_features": feats.tolist(),
        "feature_names": names,
        "edge_saliency": adapted.salient.saliency.tolist(),
    }
    if label is not None:
        record["label"] = int(label)
    return record


def write_jsonl(records, path) -> None:
    with open(path, "w") as fh:
        for record in records:
            fh.write(json.dumps(record, separators=(",", ":")))
            fh.write("\n")


def read_jsonl(path) -> list[dict]:
    """Read and validate an exported dataset; errors carry the line number."""
    records = []
    expected_dim = None
    with open(path) as fh:
        for lineno, line in enumerate(fh, start=1):
            line = line.strip()
            if not line:
                continue
            try:
                record = json.loads(line)
            except json.JSONDecodeError as exc:
                raise ValueError(f"{path}:{lineno}: invalid JSON ({exc})") from exc
            for key in ("nodes", "edges", "node_features", "feature_names"):
                if key not in record:
                    raise ValueError(f"{path}:{lineno}: missing field {key!r}")
            if len(record["node_features"]) != len(record["nodes"]):
                raise ValueError(f"{path}:{lineno}: one feature row per node required")
            dims = {len(row) for row in record["node_features"]}
            if len(dims) > 1:
                raise ValueError(f"{path}:{lineno}: ragged feature rows")
            dim = dims.pop() if dims else 0
            if expected_dim is None:
                expected_dim = dim
            elif dim != expected_dim:
                raise ValueError(
                    f"{path}:{lineno}: feature dimension {dim} != {expected_dim} seen earlier"
                )
            records.append(record)
    return records
