import numpy as np
import pytest

from gridadapt.graph import Graph, TriangulationSpec, graph_stats, uniform_triangulation


def lattice(k: int, dims=(128, 128)) -> Graph:
    return uniform_triangulation(TriangulationSpec(k, dims))


class TestTriangulationSpec:
    @pytest.mark.parametrize("k,n", [(49, 7), (100, 10), (90, 9), (110, 10), (4, 2)])
    def test_lattice_side_rounds_sqrt(self, k, n):
        assert TriangulationSpec(k, (32, 32)).lattice_side == n

    def test_realized_node_count_is_square(self):
        spec = TriangulationSpec(90, (32, 32))
        assert spec.realized_node_count == 81


class TestUniformTriangulation:
    @pytest.mark.parametrize("k,edges", [(49, 120), (64, 161), (81, 208), (100, 261), (121, 320)])
    def test_edge_counts(self, k, edges):
        g = lattice(k)
        assert g.node_count == k
        assert g.edge_count == edges

    def test_face_count(self):
        g = lattice(100)
        n = 10
        assert g.face_count == 2 * (n - 1) ** 2

    def test_euler_characteristic(self):
        # planar connected graph, outer face not stored: V - E + F = 1
        for k in (16, 49, 100):
            g = lattice(k)
            assert g.node_count - g.edge_count + g.face_count == 1

    def test_interior_degree_is_six(self):
        g = lattice(100)
        hist = graph_stats(g)["degree_histogram"]
        assert hist[6] == 8 * 8  # interior nodes of a 10x10 lattice
        assert sum(hist.values()) == 100

    def test_bounding_box_spans_image_extent(self):
        g = lattice(64, dims=(100, 60))
        assert g.nodes[:, 0].min() == 0.0 and g.nodes[:, 0].max() == 99.0
        assert g.nodes[:, 1].min() == 0.0 and g.nodes[:, 1].max() == 59.0

    def test_faces_reference_their_three_edges(self):
        g = lattice(49)
        for face in g.faces:
            nodes = set(g.edges[face].ravel())
            assert len(nodes) == 3

    def test_too_few_nodes_rejected(self):
        with pytest.raises(ValueError):
            lattice(3)

    def test_non_2d_extent_rejected(self):
        with pytest.raises(ValueError):
            uniform_triangulation(TriangulationSpec(49, (32, 32, 32)))


class TestGraphValidation:
    def test_self_loop_rejected(self):
        with pytest.raises(ValueError, match="self-loop"):
            Graph([[0, 0], [1, 1]], [[0, 1], [1, 1]])

    def test_duplicate_edge_rejected(self):
        with pytest.raises(ValueError, match="duplicate"):
            Graph([[0, 0], [1, 1]], [[0, 1], [1, 0]])

    def test_isolated_node_rejected(self):
        with pytest.raises(ValueError, match="no incident edges"):
            Graph([[0, 0], [1, 1], [2, 2]], [[0, 1]])

    def test_edge_index_out_of_range_rejected(self):
        with pytest.raises(ValueError, match="out of range"):
            Graph([[0, 0], [1, 1]], [[0, 5]])

    def test_face_index_out_of_range_rejected(self):
        with pytest.raises(ValueError, match="face"):
            Graph([[0, 0], [1, 1]], [[0, 1]], faces=[[0, 1, 2]])


class TestGraphAccessors:
    def test_adjacency_and_degrees_agree(self):
        g = lattice(49)
        for node, incident in enumerate(g.adjacency):
            assert len(incident) == g.degrees[node]
            for ei in incident:
                assert node in g.edges[ei]

    def test_face_node_triples_positively_oriented(self):
        g = lattice(49)
        triples = g.face_node_triples()
        p = g.nodes[triples]
        # signed area in the (col, row) frame must be positive
        cross = (p[:, 1, 1] - p[:, 0, 1]) * (p[:, 2, 0] - p[:, 0, 0]) - (
            p[:, 1, 0] - p[:, 0, 0]
        ) * (p[:, 2, 1] - p[:, 0, 1])
        assert np.all(cross > 0)

    def test_with_positions_keeps_topology(self):
        g = lattice(16)
        moved = g.with_positions(g.nodes + 0.25)
        np.testing.assert_array_equal(moved.edges, g.edges)
        np.testing.assert_array_equal(moved.faces, g.faces)
        with pytest.raises(ValueError):
            g.with_positions(np.zeros((3, 2)))


class TestGraphSerialization:
    def test_roundtrip(self, tmp_path):
        g = lattice(49)
        path = tmp_path / "g.json"
        g.save(path)
        loaded = Graph.load(path)
        np.testing.assert_array_equal(loaded.nodes, g.nodes)
        np.testing.assert_array_equal(loaded.edges, g.edges)
        np.testing.assert_array_equal(loaded.faces, g.faces)

    def test_unknown_schema_rejected(self):
        doc = lattice(16).to_dict()
        doc["schema_version"] = 99
        with pytest.raises(ValueError, match="schema"):
            Graph.from_dict(doc)
