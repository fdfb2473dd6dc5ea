import numpy as np
import pytest

from conftest import dijkstra_sssp
from ppbary.network import (
    EdgePoint,
    Network,
    NetworkSpace,
    build_distance_matrix,
    project_to_network,
    read_edge_list,
    read_vertex_coords,
)


def random_connected_network(rng, n_max=50):
    n = int(rng.integers(2, n_max + 1))
    edges = []
    for v in range(1, n):  # random spanning tree
        u = int(rng.integers(0, v))
        edges.append((u, v, float(rng.uniform(0.1, 2.0))))
    for _ in range(int(rng.integers(0, n))):  # extra chords
        u, v = rng.integers(0, n, size=2)
        if u != v:
            edges.append((int(u), int(v), float(rng.uniform(0.1, 2.0))))
    return Network(n_vertices=n, edges=edges)


def adjacency_of(net):
    adj = {}
    for u, v, w in zip(net.edge_u, net.edge_v, net.edge_len):
        adj.setdefault(int(u), []).append((int(v), float(w)))
        adj.setdefault(int(v), []).append((int(u), float(w)))
    return adj


class TestNetwork:
    def test_parallel_edges_reduced_to_min(self):
        net = Network(2, [(0, 1, 3.0), (0, 1, 1.0), (1, 0, 2.0)])
        assert net.n_edges == 1
        assert net.edge_len[0] == 1.0

    def test_disconnected_rejected(self):
        with pytest.raises(ValueError):
            Network(4, [(0, 1, 1.0), (2, 3, 1.0)])

    def test_nonpositive_length_rejected(self):
        with pytest.raises(ValueError):
            Network(2, [(0, 1, 0.0)])

    def test_edge_point_snaps_to_vertices(self):
        net = Network(2, [(0, 1, 2.0)])
        assert net.edge_point(0, 0.0) == 0
        assert net.edge_point(0, 2.0) == 1
        mid = net.edge_point(0, 1.0)
        assert isinstance(mid, EdgePoint) and mid.offset == 1.0

    def test_offset_out_of_range(self):
        net = Network(2, [(0, 1, 2.0)])
        with pytest.raises(ValueError):
            net.edge_point(0, 2.5)


class TestDistanceMatrix:
    def test_triangle_graph_unit_edges(self):
        net = Network(3, [(0, 1, 1.0), (1, 2, 1.0), (0, 2, 1.0)])
        view = build_distance_matrix(net)
        off = view.matrix[~np.eye(3, dtype=bool)]
        assert np.allclose(off, 1.0)
        assert np.allclose(np.diag(view.matrix), 0.0)

    def test_midpoint_data_point_distance(self):
        # path a - b - c, unit edges, point at the middle of a-b:
        # to c = 0.5 (reach b) + 1.0 = 1.5; to a = 0.5
        net = Network(3, [(0, 1, 1.0), (1, 2, 1.0)])
        view = build_distance_matrix(net, [EdgePoint(0, 0.5)])
        r = view.index_of(EdgePoint(0, 0.5))
        assert view.matrix[r, 0] == pytest.approx(0.5)
        assert view.matrix[r, 2] == pytest.approx(1.5)

    def test_longer_path_hand_computed(self):
        # a - b (length 1) - c (length 2); middle of a-b is 0.5 + 2 = 2.5 from c
        net = Network(3, [(0, 1, 1.0), (1, 2, 2.0)])
        view = build_distance_matrix(net, [EdgePoint(0, 0.5)])
        r = view.index_of(EdgePoint(0, 0.5))
        assert view.matrix[r, 2] == pytest.approx(2.5)

    def test_matches_dijkstra_oracle(self, rng):
        for _ in range(10):
            net = random_connected_network(rng)
            view = build_distance_matrix(net)
            adj = adjacency_of(net)
            for src in range(net.n_vertices):
                ref = dijkstra_sssp(net.n_vertices, adj, src)
                assert np.allclose(view.matrix[src], ref, atol=1e-12)

    def test_insertion_preserves_vertex_distances(self, rng):
        net = random_connected_network(rng, n_max=20)
        base = build_distance_matrix(net)
        pts = []
        for _ in range(5):
            e = int(rng.integers(net.n_edges))
            pts.append(EdgePoint(e, float(rng.uniform(0, net.edge_len[e]))))
        aug = build_distance_matrix(net, pts)
        v = net.n_vertices
        assert np.allclose(aug.matrix[:v, :v], base.matrix, atol=1e-12)

    def test_identical_points_share_row(self):
        net = Network(2, [(0, 1, 1.0)])
        view = build_distance_matrix(net, [EdgePoint(0, 0.5), EdgePoint(0, 0.5)])
        assert view.n_rows == 3

    def test_two_points_same_edge(self):
        net = Network(2, [(0, 1, 4.0)])
        view = build_distance_matrix(net, [EdgePoint(0, 1.0), EdgePoint(0, 3.0)])
        a = view.index_of(EdgePoint(0, 1.0))
        b = view.index_of(EdgePoint(0, 3.0))
        assert view.matrix[a, b] == pytest.approx(2.0)

    def test_metric_axioms_hold(self, rng):
        net = random_connected_network(rng, n_max=15)
        view = build_distance_matrix(net)
        m = view.matrix
        assert np.allclose(m, m.T)
        n = m.shape[0]
        for _ in range(200):
            i, j, k = rng.integers(0, n, size=3)
            assert m[i, j] <= m[i, k] + m[k, j] + 1e-12


class TestProjection:
    def unit_square_net(self):
        coords = np.array([[0.0, 0.0], [1.0, 0.0], [1.0, 1.0], [0.0, 1.0]])
        edges = [(0, 1, 1.0), (1, 2, 1.0), (2, 3, 1.0), (3, 0, 1.0)]
        return Network(4, edges, coords=coords)

    def test_point_on_edge_projects_to_itself(self):
        net = self.unit_square_net()
        loc = project_to_network([0.5, 0.0], net)
        assert isinstance(loc, EdgePoint)
        assert loc.edge == 0 and loc.offset == pytest.approx(0.5)

    def test_tie_goes_to_lowest_edge_id(self):
        # the square's center is equidistant from all four edges
        net = self.unit_square_net()
        loc = project_to_network([0.5, 0.5], net)
        assert loc.edge == 0

    def test_requires_coordinates(self):
        net = Network(2, [(0, 1, 1.0)])
        with pytest.raises(ValueError):
            project_to_network([0.0, 0.0], net)

    def test_against_dense_sampling_oracle(self, rng):
        net = self.unit_square_net()
        step = 1e-4
        for _ in range(100):
            p = rng.random(2) * 2 - 0.5
            loc = project_to_network(p, net)
            got = np.linalg.norm(net.point_coords(loc) - p)
            best = np.inf
            for e in range(net.n_edges):
                a = net.coords[net.edge_u[e]]
                b = net.coords[net.edge_v[e]]
                ts = np.arange(0.0, 1.0 + step, step)[:, None]
                cand = a + ts * (b - a)
                best = min(best, float(np.linalg.norm(cand - p, axis=1).min()))
            assert got <= best + 1e-3


class TestNetworkSpace:
    def test_for_data_round_trips_locations(self):
        net = Network(3, [(0, 1, 1.0), (1, 2, 1.0)])
        raw = [EdgePoint(0, 0.25), 2, EdgePoint(0, 0.25)]
        space, idx = NetworkSpace.for_data(net, raw)
        assert idx[0] == idx[2]
        assert space.view.location_of(idx[1]) == 2
        assert space.distance(idx[0], idx[1]) == pytest.approx(1.75)

    def test_center_requires_order_one(self):
        from ppbary.core import UnsupportedConfigError

        net = Network(2, [(0, 1, 1.0)])
        space, _ = NetworkSpace.for_data(net, [])
        with pytest.raises(UnsupportedConfigError):
            space.center([0], 2)

    def test_tie_averaged_location_projects_midpoint(self):
        # cluster {a, c} on the path a-b-c; ties {a,b,c} average to b
        coords = np.array([[0.0, 0.0], [1.0, 0.0], [2.0, 0.0]])
        net = Network(3, [(0, 1, 1.0), (1, 2, 1.0)], coords=coords)
        space, idx = NetworkSpace.for_data(net, [0, 2])
        loc = space.tie_averaged_location(idx)
        assert loc == 1 or (isinstance(loc, EdgePoint) and abs(loc.offset - 1.0) < 1e-9)


class TestFileParsing:
    def test_edge_list_round_trip(self, tmp_path):
        path = tmp_path / "g.txt"
        path.write_text("a b 1.5\nb c 2.0  # comment\n\nc a 0.5\n", encoding="utf-8")
        net = read_edge_list(path)
        assert net.n_vertices == 3
        assert net.n_edges == 3
        assert sorted(net.vertex_labels) == ["a", "b", "c"]

    def test_edge_list_bad_line(self, tmp_path):
        path = tmp_path / "g.txt"
        path.write_text("a b\n", encoding="utf-8")
        with pytest.raises(ValueError):
            read_edge_list(path)

    def test_coords_file(self, tmp_path):
        gpath = tmp_path / "g.txt"
        gpath.write_text("a b 1.0\n", encoding="utf-8")
        net = read_edge_list(gpath)
        cpath = tmp_path / "c.txt"
        cpath.write_text("a 0.0 0.0\nb 1.0 0.0\n", encoding="utf-8")
        read_vertex_coords(cpath, net)
        assert np.allclose(net.coords, [[0.0, 0.0], [1.0, 0.0]])

    def test_coords_missing_vertex(self, tmp_path):
        gpath = tmp_path / "g.txt"
        gpath.write_text("a b 1.0\n", encoding="utf-8")
        net = read_edge_list(gpath)
        cpath = tmp_path / "c.txt"
        cpath.write_text("a 0.0 0.0\n", encoding="utf-8")
        with pytest.raises(ValueError):
            read_vertex_coords(cpath, net)
