"""Boundary-recall benchmark harness.

Recall at a saliency threshold s_min is the fraction of dual-graph nodes with
saliency above s_min that lie within d_min pixels of the ground-truth
contour, measured on the exact Euclidean distance transform of the contour
mask. The sweep runs the full pipeline over shapes x node counts x noise
levels x seeds x detector methods and emits plot-ready long-format CSV.
"""
from __future__ import annotations

import csv
import itertools
import os
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

from .adapt import AdaptConfig, adapt_graph
from .dual import DualGraph, build_dual
from .graph import TriangulationSpec, uniform_triangulation
from .image import Image, SyntheticShape, generate_synthetic, ground_truth_contour
from .salient import DetectorConfig

_EDT_INF = 1e20

EDT_LOOKUPS = ("bilinear", "nearest")


def default_s_min_grid(count: int = 32, log2_lo: float = -15.0, log2_hi: float = 0.0) -> np.ndarray:
    """Log-spaced saliency thresholds spanning log2(s) in [log2_lo, log2_hi]."""
    return 2.0 ** np.linspace(log2_lo, log2_hi, count)


@dataclass(frozen=True)
class RecallConfig:
    d_min: float = 2.0  # pixels
    s_min_grid: np.ndarray = field(default_factory=default_s_min_grid)
    edt_lookup: str = "bilinear"

    def __post_init__(self):
        if self.d_min <= 0.0:
            raise ValueError("d_min must be positive")
        grid = np.asarray(self.s_min_grid, dtype=np.float64)
        if len(grid) == 0 or np.any(np.diff(grid) <= 0):
            raise ValueError("s_min_grid must be non-empty and strictly increasing")
        if self.edt_lookup not in EDT_LOOKUPS:
            raise ValueError(f"unknown EDT lookup mode {self.edt_lookup!r}")


@dataclass(frozen=True)
class RecallPoint:
    s_min: float
    recall: float | None  # None when no dual node clears the threshold
    total: int
    positive: int


@dataclass(frozen=True)
class RecallCurve:
    points: list[RecallPoint]
    metadata: dict


def _edt_1d_sq(f: np.ndarray) -> np.ndarray:
    """Lower-envelope-of-parabolas pass over squared distances."""
    n = len(f)
    out = np.empty(n)
    v = np.zeros(n, dtype=np.int64)
    z = np.empty(n + 1)
    k = 0
    z[0] = -_EDT_INF
    z[1] = _EDT_INF
    for q in range(1, n):
        s = ((f[q] + q * q) - (f[v[k]] + v[k] * v[k])) / (2 * q - 2 * v[k])
        while s <= z[k]:
            k -= 1
            s = ((f[q] + q * q) - (f[v[k]] + v[k] * v[k])) / (2 * q - 2 * v[k])
        k += 1
        v[k] = q
        z[k] = s
        z[k + 1] = _EDT_INF
    k = 0
    for q in range(n):
        while z[k + 1] < q:
            k += 1
        out[q] = (q - v[k]) ** 2 + f[v[k]]
    return out


def distance_transform(mask: np.ndarray) -> np.ndarray:
    """Exact Euclidean distance to the nearest true pixel (two-pass EDT)."""
    mask = np.asarray(mask, dtype=bool)
    if not mask.any():
        raise ValueError("mask has no true pixels; no boundary to measure against")
    sq = np.where(mask, 0.0, _EDT_INF)
    for ax in range(mask.ndim):
        sq = np.apply_along_axis(_edt_1d_sq, ax, sq)
    return np.sqrt(sq)


def _lookup_distances(edt: np.ndarray, positions: np.ndarray, mode: str) -> np.ndarray:
    hi = np.array(edt.shape, dtype=np.float64) - 1.0
    pos = np.clip(positions, 0.0, hi)
    if mode == "bilinear":
        return Image(edt).sample_many(pos)
    idx = np.rint(pos).astype(np.int64)
    return edt[tuple(idx.T)]


def boundary_recall(
    dual: DualGraph,
    contour_mask: np.ndarray,
    cfg: RecallConfig | None = None,
    edt: np.ndarray | None = None,
    metadata: dict | None = None,
) -> RecallCurve:
    """Recall of the dual graph's salient points against a contour mask.

    The EDT may be precomputed and passed in (it only depends on the mask).
    """
    cfg = cfg or RecallConfig()
    if edt is None:
        edt = distance_transform(contour_mask)
    dists = _lookup_distances(edt, dual.node_positions, cfg.edt_lookup)
    s = dual.node_saliency
    points = []
    for s_min in np.asarray(cfg.s_min_grid, dtype=np.float64):
        sel = s > s_min
        total = int(np.count_nonzero(sel))
        positive = int(np.count_nonzero(dists[sel] < cfg.d_min))
        rec = positive / total if total else None
        points.append(RecallPoint(float(s_min), rec, total, positive))
    return RecallCurve(points, dict(metadata or {}))


_ALL_SHAPES = [s.value for s in SyntheticShape]


@dataclass(frozen=True)
class SweepConfig:
    shapes: tuple = tuple(_ALL_SHAPES)
    node_counts: tuple = (64, 100, 144, 196, 256, 324, 400)
    noise_sigmas: tuple = (0.0,)
    seeds: tuple = (0,)
    methods: tuple = ("slic", "robust")
    size: int = 128
    lam: float = 0.4
    samples_per_edge: int | None = None
    max_iterations: int = 10
    residual_threshold: float = 0.1
    recall: RecallConfig = field(default_factory=RecallConfig)


def _sweep_cell(cfg: SweepConfig, edt_cache: dict, shape, nodes, sigma, seed, method) -> RecallCurve:
    img = generate_synthetic(shape, cfg.size, sigma, seed)
    edt = edt_cache[shape]
    spec = TriangulationSpec(nodes, (cfg.size, cfg.size))
    lattice = uniform_triangulation(spec)
    detector = DetectorConfig(method=method, lam=cfg.lam, samples_per_edge=cfg.samples_per_edge)
    adapt_cfg = AdaptConfig(
        max_iterations=cfg.max_iterations,
        residual_threshold=cfg.residual_threshold,
        detector=detector,
    )
    result = adapt_graph(img, lattice, adapt_cfg)
    dual = build_dual(result)
    meta = {
        "shape": str(SyntheticShape(shape).value),
        "method": method,
        "nodes_requested": int(nodes),
        "nodes": int(spec.realized_node_count),
        "sigma": float(sigma),
        "seed": int(seed),
        "size": int(cfg.size),
        "lam": float(cfg.lam),
    }
    return boundary_recall(dual, None, cfg.recall, edt=edt, metadata=meta)


def recall_sweep(cfg: SweepConfig | None = None) -> list[RecallCurve]:
    """Full factorial sweep; deterministic given the seed list.

    Cells are independent; set GRIDADAPT_THREADS > 1 to run them in a thread
    pool (results keep the factorial ordering regardless).
    """
    cfg = cfg or SweepConfig()
    edt_cache = {
        shape: distance_transform(ground_truth_contour(shape, cfg.size)) for shape in cfg.shapes
    }
    cells = list(
        itertools.product(cfg.shapes, cfg.node_counts, cfg.noise_sigmas, cfg.seeds, cfg.methods)
    )
    workers = int(os.environ.get("GRIDADAPT_THREADS", "1"))
    if workers > 1:
        with ThreadPoolExecutor(max_workers=workers) as pool:
            return list(pool.map(lambda c: _sweep_cell(cfg, edt_cache, *c), cells))
    return [_sweep_cell(cfg, edt_cache, *cell) for cell in cells]


def average_over_node_counts(curves: list[RecallCurve]) -> list[RecallCurve]:
    """Aggregate curves across node counts by pooling counts at each s_min."""
    groups: dict[tuple, list[RecallCurve]] = {}
    for curve in curves:
        m = curve.metadata
        key = (m.get("shape"), m.get("method"), m.get("sigma"), m.get("seed"))
        groups.setdefault(key, []).append(curve)
    out = []
    for key, members in groups.items():
        n_points = len(members[0].points)
        points = []
        for i in range(n_points):
            total = sum(c.points[i].total for c in members)
            positive = sum(c.points[i].positive for c in members)
            rec = positive / total if total else None
            points.append(RecallPoint(members[0].points[i].s_min, rec, total, positive))
        meta = dict(members[0].metadata)
        meta["nodes"] = "avg"
        meta["nodes_requested"] = "avg"
        meta["node_counts"] = sorted({c.metadata.get("nodes") for c in members})
        out.append(RecallCurve(points, meta))
    return out


_CSV_COLUMNS = (
    "shape",
    "method",
    "sigma",
    "seed",
    "nodes_requested",
    "nodes",
    "s_min",
    "total",
    "positive",
    "recall",
)


def write_csv(curves: list[RecallCurve], path) -> None:
    """One row per (curve, s_min) in plot-ready long format."""
    with open(path, "w", newline="") as fh:
        writer = csv.writer(fh)
        writer.writerow(_CSV_COLUMNS)
        for curve in curves:
            m = curve.metadata
            for p in curve.points:
                writer.writerow(
                    [
                        m.get("shape", ""),
                        m.get("method", ""),
                        m.get("sigma", ""),
                        m.get("seed", ""),
                        m.get("nodes_requested", ""),
                        m.get("nodes", ""),
                        repr(p.s_min),
                        p.total,
                        p.positive,
                        "" if p.recall is None else repr(p.recall),
                    ]
                )


def plot_recall_curves(curves: list[RecallCurve], path, title: str | None = None) -> None:
    """Recall vs log2(s_min), one panel per method, one line per noise level."""
    from matplotlib.figure import Figure

    methods = sorted({c.metadata.get("method", "") for c in curves})
    fig = Figure(figsize=(6 * len(methods), 4.5))
    axes = fig.subplots(1, len(methods), squeeze=False)[0]
    for ax, method in zip(axes, methods):
        sigmas = sorted({c.metadata.get("sigma", 0.0) for c in curves})
        for sigma in sigmas:
            members = [
                c
                for c in curves
                if c.metadata.get("method") == method and c.metadata.get("sigma") == sigma
            ]
            if not members:
                continue
            pooled = average_over_node_counts(members)
            n_points = len(pooled[0].points)
            xs, ys = [], []
            for i in range(n_points):
                total = sum(c.points[i].total for c in pooled)
                positive = sum(c.points[i].positive for c in pooled)
                if total:
                    xs.append(np.log2(pooled[0].points[i].s_min))
                    ys.append(positive / total)
            gray = 0.8 * (sigma / max(sigmas) if max(sigmas) > 0 else 0.0)
            ax.plot(xs, ys, color=(gray, gray, gray), label=f"sigma={sigma:g}")
        ax.set_xlabel("log2(s_min)")
        ax.set_ylabel("boundary recall")
        ax.set_ylim(0.0, 1.05)
        ax.set_title(method)
        ax.legend(fontsize=8)
    if title:
        fig.suptitle(title)
    fig.tight_layout()
    fig.savefig(Path(path), dpi=120)
