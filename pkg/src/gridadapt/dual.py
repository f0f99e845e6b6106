"""Oversegmenting dual graph: salient points as nodes, product saliency edges.

Two pairing rules are supported. ``shared-face`` (default) joins the salient
points of primal edges that belong to a common triangle, which partitions the
plane into hexagons and triangles on a uniform lattice. ``shared-node`` joins
salient points of every primal-edge pair incident to a common node.
"""
from __future__ import annotations

import itertools
import json
from dataclasses import dataclass
from pathlib import Path

import numpy as np

from .adapt import AdaptResult

SCHEMA_VERSION = 1

PAIRINGS = ("shared-face", "shared-node")


@dataclass(frozen=True)
class DualGraph:
    node_positions: np.ndarray  # (Nd, d) salient point positions
    node_saliency: np.ndarray   # per-node saliency (the primal edge's, unchanged)
    primal_edge: np.ndarray     # primal edge index behind each dual node
    edges: np.ndarray           # (Ed, 2) dual node index pairs
    edge_saliency: np.ndarray   # product of the two endpoint saliencies

    @property
    def node_count(self) -> int:
        return len(self.node_positions)

    @property
    def edge_count(self) -> int:
        return len(self.edges)

    def to_dict(self) -> dict:
        return {
            "schema_version": SCHEMA_VERSION,
            "type": "dual-graph",
            "nodes": self.node_positions.tolist(),
            "node_saliency": self.node_saliency.tolist(),
            "primal_edge": self.primal_edge.tolist(),
            "edges": self.edges.tolist(),
            "edge_saliency": self.edge_saliency.tolist(),
        }

    @classmethod
    def from_dict(cls, doc: dict) -> "DualGraph":
        if doc.get("type") != "dual-graph":
            raise ValueError("not a dual-graph document")
        if doc.get("schema_version") != SCHEMA_VERSION:
            raise ValueError(f"unsupported schema version {doc.get('schema_version')!r}")
        return cls(
            np.asarray(doc["nodes"], dtype=np.float64),
            np.asarray(doc["node_saliency"], dtype=np.float64),
            np.asarray(doc["primal_edge"], dtype=np.int64),
            np.asarray(doc["edges"], dtype=np.int64).reshape(-1, 2),
            np.asarray(doc["edge_saliency"], dtype=np.float64),
        )

    def save(self, path) -> None:
        Path(path).write_text(json.dumps(self.to_dict()))

    @classmethod
    def load(cls, path) -> "DualGraph":
        return cls.from_dict(json.loads(Path(path).read_text()))


def build_dual(adapted: AdaptResult, pairing: str = "shared-face") -> DualGraph:
    """Construct the dual graph of an adapted graph.

    One dual node per primal edge (indices coincide before filtering). Output
    edge ordering is deterministic (lexicographic by primal edge index).
    """
    if pairing not in PAIRINGS:
        raise ValueError(f"unknown pairing rule {pairing!r}")
    graph = adapted.graph
    sal = adapted.salient
    if len(sal) != graph.edge_count:
        raise ValueError("adapted result must carry one salient point per primal edge")
    if pairing == "shared-face":
        f = graph.faces
        if len(f) == 0:
            raise ValueError("shared-face pairing requires a face list")
        pairs = np.concatenate([f[:, [0, 1]], f[:, [0, 2]], f[:, [1, 2]]])
    else:
        combos = [
            pair
            for incident in graph.adjacency
            for pair in itertools.combinations(sorted(int(e) for e in incident), 2)
        ]
        pairs = np.array(combos, dtype=np.int64).reshape(-1, 2)
    pairs = np.unique(np.sort(pairs, axis=1), axis=0)
    edge_saliency = sal.saliency[pairs[:, 0]] * sal.saliency[pairs[:, 1]]
    return DualGraph(
        node_positions=np.array(sal.positions, dtype=np.float64),
        node_saliency=np.array(sal.saliency, dtype=np.float64),
        primal_edge=np.arange(graph.edge_count, dtype=np.int64),
        edges=pairs,
        edge_saliency=edge_saliency,
    )


def filter_by_saliency(d: DualGraph, s_min: float) -> DualGraph:
    """Keep dual nodes with saliency > s_min and edges whose endpoints survive."""
    if s_min < 0.0:
        raise ValueError("s_min must be nonnegative")
    keep = d.node_saliency > s_min
    remap = np.full(d.node_count, -1, dtype=np.int64)
    remap[keep] = np.arange(int(keep.sum()))
    edge_keep = keep[d.edges[:, 0]] & keep[d.edges[:, 1]]
    return DualGraph(
        node_positions=d.node_positions[keep],
        node_saliency=d.node_saliency[keep],
        primal_edge=d.primal_edge[keep],
        edges=remap[d.edges[edge_keep]],
        edge_saliency=d.edge_saliency[edge_keep],
    )
