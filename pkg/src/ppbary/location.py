"""Cluster-center solvers for the supported (ground space, order) pairs:
coordinatewise mean for squared Euclidean cost, Weiszfeld iteration for the
Euclidean median, and candidate enumeration for the order-1 network median.
"""

from __future__ import annotations

import numpy as np

WEISZFELD_TOL = 1e-8
WEISZFELD_MAX_ITER = 1000


def euclid_mean_center(points, weights=None) -> np.ndarray:
    """Weighted coordinatewise mean, the unique minimizer of sum w ||x - z||^2."""
    pts = np.asarray(points, dtype=float)
    if pts.ndim == 1:
        pts = pts[:, None]
    if pts.shape[0] == 0:
        raise ValueError("mean of an empty point set is undefined")
    if np.all(pts == pts[0]):
        return pts[0].copy()  # averaging k copies would round off the point
    if weights is None:
        return pts.mean(axis=0)
    w = np.asarray(weights, dtype=float)
    return (w[:, None] * pts).sum(axis=0) / w.sum()


def _median_objective(pts, w, z):
    return float(np.sum(w * np.linalg.norm(pts - z, axis=1)))


def weiszfeld_median(
    points,
    weights=None,
    tol: float = WEISZFELD_TOL,
    max_iter: int = WEISZFELD_MAX_ITER,
    debug_checks: bool = False,
) -> np.ndarray:
    """Approximate minimizer of sum w ||x - z|| by Weiszfeld iteration.

    Stops once successive iterates move less than ``tol``.  When an iterate
    lands on a data point the summed-unit-vector subgradient condition decides
    optimality there; otherwise the damped step of Vardi and Zhang moves off
    the singularity.  Returns the best iterate seen.
    """
    pts = np.asarray(points, dtype=float)
    if pts.ndim == 1:
        pts = pts[:, None]
    n = pts.shape[0]
    if n == 0:
        raise ValueError("median of an empty point set is undefined")
    if tol <= 0:
        raise ValueError("tol must be positive")
    w = np.ones(n) if weights is None else np.asarray(weights, dtype=float)

    z = euclid_mean_center(pts, w)
    best = z
    best_obj = _median_objective(pts, w, z)
    snap = tol * 1e-3
    for _ in range(max_iter):
        d = np.linalg.norm(pts - z, axis=1)
        at = d <= snap
        if np.any(at):
            # summed pull of the other points vs the weight sitting at z
            away = ~at
            if not np.any(away):
                return pts[int(np.argmax(at))]
            units = (pts[away] - z) / d[away][:, None]
            r_vec = (w[away][:, None] * units).sum(axis=0)
            r = np.linalg.norm(r_vec)
            w_here = w[at].sum()
            if r <= w_here:
                return z
            inv = w[away] / d[away]
            t = (inv[:, None] * pts[away]).sum(axis=0) / inv.sum()
            z_next = z + max(0.0, 1.0 - w_here / r) * (t - z)
        else:
            inv = w / d
            z_next = (inv[:, None] * pts).sum(axis=0) / inv.sum()
        obj = _median_objective(pts, w, z_next)
        if debug_checks:
            assert obj <= best_obj + 1e-9 * (1.0 + best_obj)
        if obj < best_obj:
            best, best_obj = z_next, obj
        step = np.linalg.norm(z_next - z)
        z = z_next
        if step < tol:
            break
    return best


def network_median_center(
    cluster,
    dist,
    rng: np.random.Generator,
    weights=None,
    incumbent: int | None = None,
    tie_tol: float = 1e-12,
    return_ties: bool = False,
):
    """Order-1 center of a cluster of network locations.

    Some vertex or data point always attains the optimum, so the candidate
    set is every row of the precomputed distance matrix; ties are broken
    uniformly at random with the supplied generator.  ``cluster`` holds row
    indices of ``dist`` (a full square matrix over vertices and data points).
    """
    idx = np.asarray(cluster, dtype=np.int64)
    if idx.size == 0:
        raise ValueError("center of an empty cluster is undefined")
    matrix = np.asarray(dist)
    if idx.min() < 0 or idx.max() >= matrix.shape[0]:
        raise ValueError("cluster point not covered by the distance matrix")
    if incumbent is not None and not (0 <= incumbent < matrix.shape[0]):
        raise ValueError("incumbent not covered by the distance matrix")
    w = np.ones(idx.size) if weights is None else np.asarray(weights, dtype=float)
    costs = w @ matrix[idx, :]
    best = costs.min()
    ties = np.flatnonzero(costs <= best + tie_tol * max(1.0, best))
    if return_ties:
        return ties
    choice = int(ties[rng.integers(ties.size)]) if ties.size > 1 else int(ties[0])
    if incumbent is not None and costs[incumbent] < costs[choice]:
        return int(incumbent)
    return choice
