"""Shared helpers for the test suite: random pattern generation and
independent reference implementations (exhaustive assignment, heap Dijkstra)
used as oracles against the production code paths.
"""

import heapq
import itertools

import numpy as np
import pytest

from ppbary.core import PointPattern


def random_pattern(rng, max_n=8, dim=2, min_n=0):
    n = int(rng.integers(min_n, max_n + 1))
    return PointPattern(rng.random((n, dim)))


def bruteforce_assignment(costs) -> float:
    """Exhaustive minimum over all permutations; oracle for small n."""
    costs = np.asarray(costs, dtype=float)
    n = costs.shape[0]
    best = np.inf
    for perm in itertools.permutations(range(n)):
        total = costs[np.arange(n), perm].sum()
        if total < best:
            best = total
    return float(best)


def dijkstra_sssp(n_nodes, adjacency, source) -> np.ndarray:
    """Binary-heap Dijkstra over an adjacency list {u: [(v, w), ...]}."""
    dist = np.full(n_nodes, np.inf)
    dist[source] = 0.0
    heap = [(0.0, source)]
    done = np.zeros(n_nodes, dtype=bool)
    while heap:
        d, u = heapq.heappop(heap)
        if done[u]:
            continue
        done[u] = True
        for v, w in adjacency.get(u, ()):
            nd = d + w
            if nd < dist[v]:
                dist[v] = nd
                heapq.heappush(heap, (nd, v))
    return dist


@pytest.fixture
def rng():
    return np.random.default_rng(20240817)
