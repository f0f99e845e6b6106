import numpy as np
import pytest

from gridadapt.adapt import (
    AdaptConfig,
    adapt_graph,
    load_result,
    residual,
    result_from_dict,
    result_to_dict,
    save_result,
)
from gridadapt.graph import TriangulationSpec, uniform_triangulation
from gridadapt.image import Image, SyntheticShape, generate_synthetic
from gridadapt.salient import DetectorConfig


def vertical_image(size=64) -> Image:
    rr, cc = np.meshgrid(np.arange(size), np.arange(size), indexing="ij")
    return Image((cc < size // 2).astype(float))


class TestConfig:
    def test_validation(self):
        with pytest.raises(ValueError):
            AdaptConfig(max_iterations=0)
        with pytest.raises(ValueError):
            AdaptConfig(residual_threshold=0.0)


class TestResidual:
    def test_mean_euclidean_displacement(self):
        before = np.array([[0.0, 0.0], [1.0, 1.0]])
        after = np.array([[3.0, 4.0], [1.0, 1.0]])
        assert residual(before, after) == pytest.approx(2.5)

    def test_shape_mismatch(self):
        with pytest.raises(ValueError):
            residual(np.zeros((2, 2)), np.zeros((3, 2)))


class TestAdaptGraph:
    def test_constant_image_update_matches_midpoint_centroid_map(self):
        # on a constant image every salient point is the edge midpoint, so
        # each iteration must equal the explicit midpoint-centroid map
        img = Image(np.full((32, 32), 0.3))
        g = uniform_triangulation(TriangulationSpec(25, img.dims))
        cfg = AdaptConfig(max_iterations=3, residual_threshold=1e-12, clamp_to_extent=False)
        result = adapt_graph(img, g, cfg)
        pos = np.array(g.nodes)
        for _ in range(3):
            mids = 0.5 * (pos[g.edges[:, 0]] + pos[g.edges[:, 1]])
            new = np.zeros_like(pos)
            np.add.at(new, g.edges[:, 0], mids)
            np.add.at(new, g.edges[:, 1], mids)
            new /= g.degrees[:, None]
            pos = new
        np.testing.assert_allclose(result.graph.nodes, pos, atol=1e-9)

    def test_residual_history_matches_positions(self):
        img = generate_synthetic(SyntheticShape.CIRCLE, 64)
        g = uniform_triangulation(TriangulationSpec(49, img.dims))
        r1 = adapt_graph(img, g, AdaptConfig(max_iterations=1, residual_threshold=1e-9))
        assert r1.iterations == 1
        assert r1.residual_history[0] == pytest.approx(residual(g.nodes, r1.graph.nodes))

    def test_stops_when_residual_below_threshold(self):
        img = generate_synthetic(SyntheticShape.VERTICAL, 64)
        g = uniform_triangulation(TriangulationSpec(49, img.dims))
        result = adapt_graph(img, g, AdaptConfig(max_iterations=50, residual_threshold=1.0))
        assert result.iterations < 50
        assert result.residual_history[-1] < 1.0
        assert all(r >= 1.0 for r in result.residual_history[:-1])

    def test_iteration_cap_respected(self):
        img = generate_synthetic(SyntheticShape.VERTICAL, 64)
        g = uniform_triangulation(TriangulationSpec(49, img.dims))
        result = adapt_graph(img, g, AdaptConfig(max_iterations=4, residual_threshold=1e-9))
        assert result.iterations == 4

    def test_topology_preserved(self):
        img = generate_synthetic(SyntheticShape.DONUT, 64)
        g = uniform_triangulation(TriangulationSpec(49, img.dims))
        result = adapt_graph(img, g)
        np.testing.assert_array_equal(result.graph.edges, g.edges)
        np.testing.assert_array_equal(result.graph.faces, g.faces)

    def test_clamp_keeps_nodes_inside_extent(self):
        img = generate_synthetic(SyntheticShape.CIRCLE, 64, noise_sigma_pct=0.5, seed=1)
        g = uniform_triangulation(TriangulationSpec(49, img.dims))
        result = adapt_graph(img, g, AdaptConfig(max_iterations=5))
        assert result.graph.nodes.min() >= 0.0
        assert result.graph.nodes[:, 0].max() <= 63.0
        assert result.graph.nodes[:, 1].max() <= 63.0

    def test_initial_positions_outside_extent_rejected(self):
        img = vertical_image(32)
        g = uniform_triangulation(TriangulationSpec(16, (64, 64)))
        with pytest.raises(ValueError, match="extent"):
            adapt_graph(img, g)

    def test_salient_points_recomputed_on_final_positions(self):
        from gridadapt.salient import detect_all_edges

        img = generate_synthetic(SyntheticShape.DIAG, 64)
        g = uniform_triangulation(TriangulationSpec(49, img.dims))
        cfg = AdaptConfig()
        result = adapt_graph(img, g, cfg)
        t, s, pos = detect_all_edges(img, result.graph.nodes, g.edges, cfg.detector)
        np.testing.assert_allclose(result.salient.t_hat, t)
        np.testing.assert_allclose(result.salient.saliency, s)
        np.testing.assert_allclose(result.salient.positions, pos)

    def test_crossing_edges_attract_nodes_to_boundary(self):
        img = vertical_image(64)
        g = uniform_triangulation(TriangulationSpec(100, img.dims))
        result = adapt_graph(img, g, AdaptConfig(detector=DetectorConfig(method="robust")))
        cols = result.salient.positions[:, 1]
        strong = result.salient.saliency > 0.5
        assert strong.any()
        assert np.all(np.abs(cols[strong] - 31.5) < 2.0)

    def test_detector_choice_changes_nothing_on_symmetric_input(self):
        img = Image(np.full((32, 32), 1.0))
        g = uniform_triangulation(TriangulationSpec(16, img.dims))
        res_r = adapt_graph(img, g, AdaptConfig(detector=DetectorConfig(method="robust")))
        res_s = adapt_graph(img, g, AdaptConfig(detector=DetectorConfig(method="slic")))
        np.testing.assert_allclose(res_r.graph.nodes, res_s.graph.nodes)


class TestSerialization:
    def _result(self):
        img = generate_synthetic(SyntheticShape.CORNER, 48)
        g = uniform_triangulation(TriangulationSpec(25, img.dims))
        return adapt_graph(img, g, AdaptConfig(max_iterations=2, residual_threshold=1e-6))

    def test_roundtrip(self, tmp_path):
        result = self._result()
        path = tmp_path / "r.json"
        save_result(result, path, config={"note": "test"})
        loaded = load_result(path)
        np.testing.assert_allclose(loaded.graph.nodes, result.graph.nodes)
        np.testing.assert_array_equal(loaded.graph.edges, result.graph.edges)
        np.testing.assert_allclose(loaded.salient.saliency, result.salient.saliency)
        np.testing.assert_allclose(loaded.salient.positions, result.salient.positions)
        assert loaded.iterations == result.iterations
        assert loaded.residual_history == result.residual_history

    def test_wrong_document_type_rejected(self):
        doc = result_to_dict(self._result())
        doc["type"] = "dual-graph"
        with pytest.raises(ValueError, match="adapted-graph"):
            result_from_dict(doc)

    def test_wrong_schema_rejected(self):
        doc = result_to_dict(self._result())
        doc["schema_version"] = 42
        with pytest.raises(ValueError, match="schema"):
            result_from_dict(doc)

    def test_salient_point_accessor(self):
        result = self._result()
        p = result.salient.point(3)
        assert p.edge_index == 3
        assert p.t_hat == result.salient.t_hat[3]
        assert p.saliency == result.salient.saliency[3]
