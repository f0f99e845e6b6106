import csv
import os

import numpy as np
import pytest

from gridadapt.dual import DualGraph
from gridadapt.evaluate import (
    RecallConfig,
    SweepConfig,
    average_over_node_counts,
    boundary_recall,
    default_s_min_grid,
    distance_transform,
    plot_recall_curves,
    recall_sweep,
    write_csv,
)


def brute_force_edt(mask: np.ndarray) -> np.ndarray:
    rr, cc = np.nonzero(mask)
    r, c = np.meshgrid(np.arange(mask.shape[0]), np.arange(mask.shape[1]), indexing="ij")
    sq = np.min(
        (r.ravel()[:, None] - rr) ** 2 + (c.ravel()[:, None] - cc) ** 2, axis=1
    ).reshape(mask.shape)
    return np.sqrt(sq.astype(np.float64))


def hand_dual(positions, saliency) -> DualGraph:
    positions = np.asarray(positions, dtype=np.float64)
    saliency = np.asarray(saliency, dtype=np.float64)
    n = len(positions)
    edges = np.array([[i, i + 1] for i in range(n - 1)], dtype=np.int64).reshape(-1, 2)
    return DualGraph(
        node_positions=positions,
        node_saliency=saliency,
        primal_edge=np.arange(n, dtype=np.int64),
        edges=edges,
        edge_saliency=saliency[edges[:, 0]] * saliency[edges[:, 1]] if n > 1 else np.zeros(0),
    )


class TestDistanceTransform:
    def test_matches_brute_force_on_random_masks(self):
        rng = np.random.default_rng(11)
        for _ in range(10):
            mask = rng.random((16, 24)) < 0.08
            if not mask.any():
                mask[rng.integers(16), rng.integers(24)] = True
            np.testing.assert_array_equal(distance_transform(mask), brute_force_edt(mask))

    def test_single_point(self):
        mask = np.zeros((8, 8), dtype=bool)
        mask[2, 5] = True
        edt = distance_transform(mask)
        assert edt[2, 5] == 0.0
        assert edt[2, 6] == 1.0
        assert edt[5, 1] == pytest.approx(5.0)

    def test_empty_mask_rejected(self):
        with pytest.raises(ValueError, match="no true pixels"):
            distance_transform(np.zeros((4, 4), dtype=bool))


class TestRecallConfig:
    def test_validation(self):
        with pytest.raises(ValueError):
            RecallConfig(d_min=0.0)
        with pytest.raises(ValueError):
            RecallConfig(s_min_grid=np.array([0.5, 0.2]))
        with pytest.raises(ValueError):
            RecallConfig(s_min_grid=np.array([]))
        with pytest.raises(ValueError):
            RecallConfig(edt_lookup="cubic")

    def test_default_grid_spans_log2_range(self):
        grid = default_s_min_grid()
        assert len(grid) == 32
        assert grid[0] == pytest.approx(2.0**-15)
        assert grid[-1] == pytest.approx(1.0)
        assert np.all(np.diff(np.log2(grid)) > 0)


class TestBoundaryRecall:
    def test_counts_on_hand_built_dual(self):
        mask = np.zeros((16, 16), dtype=bool)
        mask[:, 8] = True  # contour along column 8
        dual = hand_dual(
            positions=[[2.0, 8.0], [5.0, 9.0], [7.0, 1.0], [12.0, 8.5]],
            saliency=[0.9, 0.8, 0.7, 0.05],
        )
        cfg = RecallConfig(d_min=2.0, s_min_grid=np.array([0.01, 0.1, 0.75]))
        curve = boundary_recall(dual, mask, cfg)
        # s_min = 0.01 keeps all 4 (3 near contour), 0.1 keeps first 3 (2 near),
        # 0.75 keeps the first two (both near)
        got = [(p.total, p.positive) for p in curve.points]
        assert got == [(4, 3), (3, 2), (2, 2)]
        assert curve.points[0].recall == pytest.approx(0.75)

    def test_recall_none_when_nothing_kept(self):
        mask = np.zeros((8, 8), dtype=bool)
        mask[4, 4] = True
        dual = hand_dual([[4.0, 4.0]], [0.1])
        cfg = RecallConfig(s_min_grid=np.array([0.5]))
        curve = boundary_recall(dual, mask, cfg)
        assert curve.points[0].recall is None
        assert curve.points[0].total == 0

    def test_precomputed_edt_equivalent(self):
        mask = np.zeros((8, 8), dtype=bool)
        mask[3] = True
        dual = hand_dual([[2.0, 2.0], [6.0, 6.0]], [1.0, 1.0])
        a = boundary_recall(dual, mask)
        b = boundary_recall(dual, None, edt=distance_transform(mask))
        assert [(p.total, p.positive) for p in a.points] == [(p.total, p.positive) for p in b.points]

    def test_nearest_lookup_mode(self):
        mask = np.zeros((8, 8), dtype=bool)
        mask[0, 0] = True
        dual = hand_dual([[0.4, 0.4]], [1.0])
        cfg = RecallConfig(d_min=0.5, s_min_grid=np.array([0.1]), edt_lookup="nearest")
        curve = boundary_recall(dual, mask, cfg)
        # rounds to (0, 0), distance 0 < 0.5
        assert curve.points[0].positive == 1

    def test_metadata_carried(self):
        mask = np.zeros((8, 8), dtype=bool)
        mask[1, 1] = True
        dual = hand_dual([[1.0, 1.0]], [1.0])
        curve = boundary_recall(dual, mask, metadata={"shape": "unit"})
        assert curve.metadata["shape"] == "unit"


SMALL_SWEEP = SweepConfig(
    shapes=("vertical", "circle"),
    node_counts=(49, 64),
    noise_sigmas=(0.0,),
    seeds=(0,),
    methods=("robust",),
    size=64,
    recall=RecallConfig(s_min_grid=default_s_min_grid(8)),
)


class TestSweep:
    def test_factorial_cell_count_and_metadata(self):
        curves = recall_sweep(SMALL_SWEEP)
        assert len(curves) == 2 * 2
        shapes = [c.metadata["shape"] for c in curves]
        assert shapes == ["vertical", "vertical", "circle", "circle"]
        for c in curves:
            assert c.metadata["method"] == "robust"
            assert len(c.points) == 8

    def test_thread_pool_gives_identical_results(self):
        serial = recall_sweep(SMALL_SWEEP)
        os.environ["GRIDADAPT_THREADS"] = "3"
        try:
            parallel = recall_sweep(SMALL_SWEEP)
        finally:
            del os.environ["GRIDADAPT_THREADS"]
        for a, b in zip(serial, parallel):
            assert a.metadata == b.metadata
            assert [(p.total, p.positive) for p in a.points] == [
                (p.total, p.positive) for p in b.points
            ]

    def test_average_pools_counts(self):
        curves = recall_sweep(SMALL_SWEEP)
        pooled = average_over_node_counts(curves)
        assert len(pooled) == 2  # one per shape
        by_shape = {c.metadata["shape"]: c for c in pooled}
        for shape, agg in by_shape.items():
            members = [c for c in curves if c.metadata["shape"] == shape]
            for i, p in enumerate(agg.points):
                assert p.total == sum(m.points[i].total for m in members)
                assert p.positive == sum(m.points[i].positive for m in members)

    def test_csv_long_format(self, tmp_path):
        curves = recall_sweep(SMALL_SWEEP)
        path = tmp_path / "out.csv"
        write_csv(curves, path)
        with open(path, newline="") as fh:
            rows = list(csv.DictReader(fh))
        assert len(rows) == 4 * 8
        first = rows[0]
        assert first["shape"] == "vertical"
        assert first["method"] == "robust"
        assert int(first["total"]) >= 0
        recall = first["recall"]
        assert recall == "" or 0.0 <= float(recall) <= 1.0

    def test_plot_written(self, tmp_path):
        curves = recall_sweep(SMALL_SWEEP)
        path = tmp_path / "curves.png"
        plot_recall_curves(curves, path, title="test")
        assert path.stat().st_size > 0
