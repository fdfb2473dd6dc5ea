"""Edge-weighted undirected graphs as a ground space: data points inserted
onto edges, an all-pairs shortest-path matrix over vertices plus data points
(computed once and reused everywhere), and planar projection helpers.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np
from scipy.sparse import coo_matrix
from scipy.sparse.csgraph import connected_components, shortest_path

from .core import GroundSpace, UnsupportedConfigError
from .location import network_median_center

SNAP_TOL = 1e-12


@dataclass(frozen=True)
class EdgePoint:
    """A point along an edge, ``offset`` length units from the first endpoint."""

    edge: int
    offset: float


class Network:
    """Connected simple graph with positive edge lengths.

    Vertices are integers ``0..n_vertices-1``; parallel edges are reduced to
    the shortest one and self loops are dropped.  Planar vertex coordinates
    are optional and only needed for projection and plotting.
    """

    def __init__(self, n_vertices: int, edges, coords=None):
        if n_vertices < 1:
            raise ValueError("a network needs at least one vertex")
        self.n_vertices = int(n_vertices)
        best: dict[tuple[int, int], float] = {}
        for u, v, length in edges:
            u, v, length = int(u), int(v), float(length)
            if not (0 <= u < n_vertices and 0 <= v < n_vertices):
                raise ValueError(f"edge ({u}, {v}) references an unknown vertex")
            if length <= 0 or not np.isfinite(length):
                raise ValueError(f"edge ({u}, {v}) has nonpositive length {length}")
            if u == v:
                continue
            key = (min(u, v), max(u, v))
            if key not in best or length < best[key]:
                best[key] = length
        items = sorted(best.items())
        self.edge_u = np.array([k[0] for k, _ in items], dtype=np.int64)
        self.edge_v = np.array([k[1] for k, _ in items], dtype=np.int64)
        self.edge_len = np.array([l for _, l in items], dtype=float)
        self.coords = None
        if coords is not None:
            c = np.asarray(coords, dtype=float)
            if c.shape != (self.n_vertices, 2):
                raise ValueError("coords must be an (n_vertices, 2) array")
            self.coords = c
        self._check_connected()

    @property
    def n_edges(self) -> int:
        return self.edge_u.size

    def _adjacency(self):
        w = np.concatenate([self.edge_len, self.edge_len])
        r = np.concatenate([self.edge_u, self.edge_v])
        c = np.concatenate([self.edge_v, self.edge_u])
        return coo_matrix((w, (r, c)), shape=(self.n_vertices, self.n_vertices)).tocsr()

    def _check_connected(self):
        n_comp, _ = connected_components(self._adjacency(), directed=False)
        if n_comp > 1:
            raise ValueError("network must be connected for finite distances")

    def edge_point(self, edge: int, offset: float):
        """Canonical location for (edge, offset): a vertex or an EdgePoint."""
        if not (0 <= edge < self.n_edges):
            raise ValueError(f"edge index {edge} out of range")
        length = self.edge_len[edge]
        if not (-SNAP_TOL <= offset <= length + SNAP_TOL):
            raise ValueError(f"offset {offset} outside [0, {length}] on edge {edge}")
        if offset <= SNAP_TOL:
            return int(self.edge_u[edge])
        if offset >= length - SNAP_TOL:
            return int(self.edge_v[edge])
        return EdgePoint(edge=int(edge), offset=float(offset))

    def point_coords(self, loc) -> np.ndarray:
        if self.coords is None:
            raise ValueError("network has no vertex coordinates")
        if isinstance(loc, EdgePoint):
            a = self.coords[self.edge_u[loc.edge]]
            b = self.coords[self.edge_v[loc.edge]]
            t = loc.offset / self.edge_len[loc.edge]
            return a + t * (b - a)
        return self.coords[int(loc)]


def read_edge_list(path) -> Network:
    """Parse "u v length" lines (plus optional "# comment" lines).

    Vertex labels may be arbitrary tokens; they are numbered in order of
    first appearance and the mapping is kept on the returned network as
    ``vertex_labels``.
    """
    labels: dict[str, int] = {}
    edges = []
    with open(path, encoding="utf-8") as fh:
        for lineno, line in enumerate(fh, 1):
            line = line.split("#", 1)[0].strip()
            if not line:
                continue
            parts = line.split()
            if len(parts) != 3:
                raise ValueError(f"{path}:{lineno}: expected 'u v length'")
            u, v, raw = parts
            for lab in (u, v):
                if lab not in labels:
                    labels[lab] = len(labels)
            try:
                length = float(raw)
            except ValueError as exc:
                raise ValueError(f"{path}:{lineno}: bad length {raw!r}") from exc
            edges.append((labels[u], labels[v], length))
    if not edges:
        raise ValueError(f"{path}: no edges found")
    net = Network(n_vertices=len(labels), edges=edges)
    net.vertex_labels = list(labels)
    return net


def read_vertex_coords(path, net: Network) -> None:
    """Attach "id x y" planar coordinates to a parsed network in place."""
    label_to_index = {lab: i for i, lab in enumerate(getattr(net, "vertex_labels", []))}
    coords = np.full((net.n_vertices, 2), np.nan)
    with open(path, encoding="utf-8") as fh:
        for lineno, line in enumerate(fh, 1):
            line = line.split("#", 1)[0].strip()
            if not line:
                continue
            parts = line.split()
            if len(parts) != 3:
                raise ValueError(f"{path}:{lineno}: expected 'id x y'")
            lab, xs, ys = parts
            idx = label_to_index.get(lab)
            if idx is None:
                try:
                    idx = int(lab)
                except ValueError as exc:
                    raise ValueError(f"{path}:{lineno}: unknown vertex {lab!r}") from exc
            if not (0 <= idx < net.n_vertices):
                raise ValueError(f"{path}:{lineno}: unknown vertex {lab!r}")
            coords[idx] = (float(xs), float(ys))
    if np.isnan(coords).any():
        raise ValueError(f"{path}: coordinates missing for some vertices")
    net.coords = coords


@dataclass
class DistanceMatrixView:
    """Shortest-path distances over vertices and inserted data points.

    Row ``r < n_vertices`` is vertex ``r``; later rows are interior edge
    points listed in ``points``.  Data points at identical locations share a
    row.  The matrix is exact and symmetric, so it satisfies the metric
    axioms by construction.
    """

    matrix: np.ndarray
    n_vertices: int
    points: list
    _index: dict

    def index_of(self, loc) -> int:
        if isinstance(loc, EdgePoint):
            key = ("e", loc.edge, loc.offset)
        else:
            key = ("v", int(loc))
        try:
            return self._index[key]
        except KeyError:
            raise ValueError(f"location {loc!r} is not covered by the distance matrix")

    def location_of(self, row: int):
        return self.points[row]

    @property
    def n_rows(self) -> int:
        return self.matrix.shape[0]


def build_distance_matrix(net: Network, data_points=()) -> DistanceMatrixView:
    """Exact all-pairs shortest paths among vertices and data points.

    Interior data points logically split their edge into a chain, so the
    vertex-to-vertex distances are unchanged by insertion.
    """
    canonical = [
        net.edge_point(dp.edge, dp.offset) if isinstance(dp, EdgePoint) else int(dp)
        for dp in data_points
    ]
    for dp in canonical:
        if isinstance(dp, int) and not (0 <= dp < net.n_vertices):
            raise ValueError(f"vertex {dp} not on the network")

    interior: dict[tuple[int, float], int] = {}
    points: list = list(range(net.n_vertices))
    for dp in canonical:
        if isinstance(dp, EdgePoint):
            key = (dp.edge, dp.offset)
            if key not in interior:
                interior[key] = len(points)
                points.append(dp)

    by_edge: dict[int, list[tuple[float, int]]] = {}
    for (edge, offset), row in interior.items():
        by_edge.setdefault(edge, []).append((offset, row))

    rows, cols, weights = [], [], []

    def add(u, v, w):
        rows.append(u)
        cols.append(v)
        weights.append(w)

    for e in range(net.n_edges):
        u, v, length = int(net.edge_u[e]), int(net.edge_v[e]), float(net.edge_len[e])
        if e not in by_edge:
            add(u, v, length)
            continue
        chain = sorted(by_edge[e])
        prev_node, prev_off = u, 0.0
        for off, node in chain:
            add(prev_node, node, off - prev_off)
            prev_node, prev_off = node, off
        add(prev_node, v, length - prev_off)

    n = len(points)
    graph = coo_matrix((weights, (rows, cols)), shape=(n, n)).tocsr()
    matrix = shortest_path(graph, method="D", directed=False)
    matrix = np.minimum(matrix, matrix.T)  # enforce exact symmetry

    index = {("v", i): i for i in range(net.n_vertices)}
    for (edge, offset), row in interior.items():
        index[("e", edge, offset)] = row
    return DistanceMatrixView(matrix=matrix, n_vertices=net.n_vertices, points=points, _index=index)


def project_to_network(coords, net: Network):
    """Nearest point (planar Euclidean) on any edge segment.

    Requires vertex coordinates; the offset along the winning edge is the
    projection fraction times the edge length.  Exact ties go to the lowest
    edge index.
    """
    if net.coords is None:
        raise ValueError("projection needs vertex coordinates")
    p = np.asarray(coords, dtype=float)
    if p.shape != (2,):
        raise ValueError("expected planar coordinates (x, y)")
    best_d2, best_loc = np.inf, None
    for e in range(net.n_edges):
        a = net.coords[net.edge_u[e]]
        b = net.coords[net.edge_v[e]]
        ab = b - a
        denom = float(ab @ ab)
        t = 0.0 if denom == 0.0 else float(np.clip((p - a) @ ab / denom, 0.0, 1.0))
        q = a + t * ab
        d2 = float((p - q) @ (p - q))
        if d2 < best_d2:
            best_d2 = d2
            best_loc = net.edge_point(e, t * net.edge_len[e])
    return best_loc


class NetworkSpace(GroundSpace):
    """Ground space whose locations are rows of a precomputed distance matrix."""

    def __init__(self, net: Network, view: DistanceMatrixView):
        self.net = net
        self.view = view

    @classmethod
    def for_data(cls, net: Network, raw_points) -> tuple["NetworkSpace", list[int]]:
        """Build the matrix over the given raw locations; return row indices."""
        view = build_distance_matrix(net, raw_points)
        space = cls(net, view)
        indices = [
            view.index_of(net.edge_point(dp.edge, dp.offset) if isinstance(dp, EdgePoint) else dp)
            for dp in raw_points
        ]
        return space, indices

    def __repr__(self):
        return f"NetworkSpace(rows={self.view.n_rows}, vertices={self.view.n_vertices})"

    def _idx(self, x) -> int:
        i = int(x)
        if not (0 <= i < self.view.n_rows):
            raise ValueError(f"row {i} not covered by the distance matrix")
        return i

    def distance(self, x, y) -> float:
        return float(self.view.matrix[self._idx(x), self._idx(y)])

    def pairwise(self, xs, ys) -> np.ndarray:
        a = np.asarray(xs, dtype=np.int64).reshape(-1)
        b = np.asarray(ys, dtype=np.int64).reshape(-1)
        return self.view.matrix[np.ix_(a, b)]

    def paired(self, xs, ys) -> np.ndarray:
        a = np.asarray(xs, dtype=np.int64).reshape(-1)
        b = np.asarray(ys, dtype=np.int64).reshape(-1)
        return self.view.matrix[a, b]

    def dist_to_one(self, z, ys) -> np.ndarray:
        b = np.asarray(ys, dtype=np.int64).reshape(-1)
        return self.view.matrix[self._idx(z), b]

    def center(self, points, p: float, weights=None, incumbent=None, rng=None):
        if p != 1:
            raise UnsupportedConfigError(
                f"no network center solver for order p={p}; supported: 1"
            )
        rng = np.random.default_rng() if rng is None else rng
        inc = None if incumbent is None else self._idx(incumbent)
        return network_median_center(
            np.asarray(points, dtype=np.int64).reshape(-1),
            self.view.matrix,
            rng,
            weights=weights,
            incumbent=inc,
        )

    def center_ties(self, points, weights=None) -> np.ndarray:
        """All rows attaining the minimal order-1 cluster cost."""
        return network_median_center(
            np.asarray(points, dtype=np.int64).reshape(-1),
            self.view.matrix,
            np.random.default_rng(0),
            weights=weights,
            return_ties=True,
        )

    def supports_order(self, p: float) -> bool:
        return p == 1

    def sample(self, rng: np.random.Generator, size: int) -> np.ndarray:
        return rng.integers(self.view.n_vertices, size=size).astype(np.int64)

    def stack(self, locations) -> np.ndarray:
        if len(locations) == 0:
            return np.zeros(0, dtype=np.int64)
        return np.asarray(locations, dtype=np.int64).reshape(-1)

    def tie_averaged_location(self, cluster_points, weights=None):
        """Average the planar coordinates of all tied centers, projected back.

        Post-processing for the frequent order-1 multi-optimum case; the
        result is for reporting and may realize a slightly different cost.
        """
        ties = self.center_ties(cluster_points, weights)
        if self.net.coords is None or ties.size == 1:
            return self.view.location_of(int(ties[0]))
        coords = np.mean(
            [self.net.point_coords(self.view.location_of(int(t))) for t in ties], axis=0
        )
        return project_to_network(coords, self.net)
