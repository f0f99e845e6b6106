"""Graph container and the uniform triangulated lattice initializer.

Node positions use array index order (row, col). Topology is immutable after
construction; adaptation replaces node positions wholesale.
"""
from __future__ import annotations

import json
from dataclasses import dataclass
from functools import cached_property
from pathlib import Path

import numpy as np

SCHEMA_VERSION = 1


@dataclass(frozen=True)
class TriangulationSpec:
    """Requested node count and the image extent the lattice must cover."""

    node_count: int
    image_dims: tuple[int, int]

    @property
    def lattice_side(self) -> int:
        return max(2, int(round(float(np.sqrt(self.node_count)))))

    @property
    def realized_node_count(self) -> int:
        """Nearest achievable lattice size (always a square number)."""
        return self.lattice_side ** 2


class Graph:
    """Nodes with d-dimensional positions, undirected edges, triangle faces.

    Faces are stored as triples of edge indices. Every node must be incident
    to at least one edge (the adaptation update is undefined otherwise).
    """

    def __init__(self, nodes, edges, faces=None, validate: bool = True):
        self.nodes = np.array(nodes, dtype=np.float64)
        self.edges = np.array(edges, dtype=np.int64).reshape(-1, 2)
        self.faces = (
            np.zeros((0, 3), np.int64) if faces is None else np.array(faces, np.int64).reshape(-1, 3)
        )
        if validate:
            self._validate()

    def _validate(self) -> None:
        n = len(self.nodes)
        if self.nodes.ndim != 2:
            raise ValueError("nodes must be an (N, d) array")
        e = self.edges
        if len(e) and (e.min() < 0 or e.max() >= n):
            raise ValueError("edge references a node index out of range")
        if np.any(e[:, 0] == e[:, 1]):
            raise ValueError("graph contains a self-loop")
        key = np.sort(e, axis=1)
        if len(np.unique(key, axis=0)) != len(e):
            raise ValueError("graph contains duplicate edges")
        degree = np.bincount(e.ravel(), minlength=n)
        if np.any(degree == 0):
            raise ValueError("graph contains a node with no incident edges")
        if len(self.faces) and (self.faces.min() < 0 or self.faces.max() >= len(e)):
            raise ValueError("face references an edge index out of range")

    @property
    def node_count(self) -> int:
        return len(self.nodes)

    @property
    def edge_count(self) -> int:
        return len(self.edges)

    @property
    def face_count(self) -> int:
        return len(self.faces)

    @cached_property
    def adjacency(self) -> list[np.ndarray]:
        """Per-node array of incident edge indices."""
        adj: list[list[int]] = [[] for _ in range(self.node_count)]
        for ei, (i, j) in enumerate(self.edges):
            adj[int(i)].append(ei)
            adj[int(j)].append(ei)
        return [np.array(a, dtype=np.int64) for a in adj]

    @cached_property
    def degrees(self) -> np.ndarray:
        return np.bincount(self.edges.ravel(), minlength=self.node_count)

    def face_node_triples(self) -> np.ndarray:
        """Node-index triples per face, ordered positively (CCW in (x=col, y=row))."""
        triples = np.empty((self.face_count, 3), np.int64)
        for fi, (e1, e2, e3) in enumerate(self.faces):
            ids = sorted(set(self.edges[e1]) | set(self.edges[e2]) | set(self.edges[e3]))
            if len(ids) != 3:
                raise ValueError(f"face {fi} does not form a triangle")
            a, b, c = ids
            p = self.nodes[[a, b, c]]
            # cross product in (col, row) frame; swap to enforce positive area
            cross = (p[1, 1] - p[0, 1]) * (p[2, 0] - p[0, 0]) - (p[1, 0] - p[0, 0]) * (
                p[2, 1] - p[0, 1]
            )
            triples[fi] = (a, b, c) if cross >= 0 else (a, c, b)
        return triples

    def with_positions(self, nodes: np.ndarray) -> "Graph":
        """Same topology with replaced node positions."""
        nodes = np.asarray(nodes, dtype=np.float64)
        if nodes.shape != self.nodes.shape:
            raise ValueError("replacement positions must match the node array shape")
        return Graph(nodes, self.edges, self.faces, validate=False)

    def to_dict(self) -> dict:
        return {
            "schema_version": SCHEMA_VERSION,
            "nodes": self.nodes.tolist(),
            "edges": self.edges.tolist(),
            "faces": self.faces.tolist(),
        }

    @classmethod
    def from_dict(cls, doc: dict) -> "Graph":
        if doc.get("schema_version") != SCHEMA_VERSION:
            raise ValueError(f"unsupported graph schema version {doc.get('schema_version')!r}")
        return cls(doc["nodes"], doc["edges"], doc.get("faces"))

    def save(self, path) -> None:
        Path(path).write_text(json.dumps(self.to_dict()))

    @classmethod
    def load(cls, path) -> "Graph":
        return cls.from_dict(json.loads(Path(path).read_text()))


def uniform_triangulation(spec: TriangulationSpec) -> Graph:
    """Triangulated square lattice whose bounding box equals the image extent.

    The lattice is n x n nodes (n = nearest integer to sqrt(node_count)) with
    one diagonal per cell, all in the same direction, which gives interior
    nodes degree 6 and edge counts of (n-1)(3n-1).
    """
    if spec.node_count < 4:
        raise ValueError("node_count must be at least 4")
    dims = tuple(spec.image_dims)
    if len(dims) != 2:
        raise ValueError("uniform triangulation covers 2-D extents only")
    if min(dims) < 3:
        raise ValueError("image extent must be at least 3 pixels per axis")
    n = spec.lattice_side
    rows = np.linspace(0.0, dims[0] - 1.0, n)
    cols = np.linspace(0.0, dims[1] - 1.0, n)
    rr, cc = np.meshgrid(rows, cols, indexing="ij")
    nodes = np.stack([rr.ravel(), cc.ravel()], axis=1)

    edge_index: dict[tuple[int, int], int] = {}
    edges: list[tuple[int, int]] = []

    def edge(a: int, b: int) -> int:
        key = (a, b) if a < b else (b, a)
        idx = edge_index.get(key)
        if idx is None:
            idx = len(edges)
            edge_index[key] = idx
            edges.append(key)
        return idx

    faces: list[tuple[int, int, int]] = []
    for i in range(n - 1):
        for j in range(n - 1):
            tl = i * n + j
            tr = tl + 1
            bl = tl + n
            br = bl + 1
            diag = edge(tr, bl)
            faces.append((edge(tl, tr), diag, edge(tl, bl)))
            faces.append((edge(tr, br), edge(bl, br), diag))
    return Graph(nodes, np.array(edges), np.array(faces))


def graph_stats(g: Graph) -> dict:
    """Node/edge/face counts and the degree histogram."""
    degrees = g.degrees
    hist = {int(d): int(c) for d, c in zip(*np.unique(degrees, return_counts=True))}
    return {
        "node_count": g.node_count,
        "edge_count": g.edge_count,
        "face_count": g.face_count,
        "degree_histogram": hist,
    }
