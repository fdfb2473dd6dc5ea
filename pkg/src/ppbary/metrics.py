"""Transport-transform (TT) and relative TT distances between point patterns,
computed by padding the smaller pattern with virtual points and solving one
square assignment problem, plus the OSPA and spike-time equivalent forms and
an exhaustive reference implementation for small inputs.
"""

from __future__ import annotations

import itertools
import warnings
from dataclasses import dataclass

import numpy as np
from scipy.optimize import linear_sum_assignment

from .assignment import CostMatrix, solve_auction, solve_exact
from .core import GroundSpace, Params, PointPattern, infer_space

BRUTEFORCE_MAX_POINTS = 8


@dataclass
class DistanceResult:
    """Distance value plus the matching that attained it.

    ``matching`` pairs indices of the first and second pattern; ``None`` on
    either side marks an unmatched (penalized) point.  Pairs matched exactly
    at the truncation cutoff are reported as matched, which is
    cost-equivalent to leaving both unmatched.
    """

    value: float
    matching: list[tuple[int | None, int | None]]
    params: Params


def _resolve_space(xi: PointPattern, eta: PointPattern, space: GroundSpace | None) -> GroundSpace:
    if space is not None:
        return space
    return infer_space(xi, eta)


def _padded_cost_matrix(
    small: PointPattern, big: PointPattern, params: Params, space: GroundSpace
) -> np.ndarray:
    """d'^p matrix with rows = small pattern padded by virtual points.

    Virtual rows cost ``p_add**p`` against every (real) column; the padded
    direction means points of ``big`` without a partner are added.
    """
    m, n = small.cardinality, big.cardinality
    p = params.order
    mat = np.full((n, n), params.p_add**p)
    if m > 0:
        d = space.pairwise(small.points, big.points)
        mat[:m, :] = np.minimum(d, params.cutoff) ** p
    return mat


def _solve_padded(xi, eta, params, space, solver):
    """Assignment value/matching with xi in the deleted role; |xi| <= |eta|."""
    mat = _padded_cost_matrix(xi, eta, params, space)
    cm = CostMatrix.from_costs(mat)
    if solver == "auction":
        res = solve_auction(cm)
    elif solver == "exact":
        res = solve_exact(cm)
    else:
        raise ValueError(f"unknown solver {solver!r}")
    m = xi.cardinality
    matching = []
    for i, j in enumerate(res.perm):
        matching.append((i, int(j)) if i < m else (None, int(j)))
    return res.total_cost, matching


def tt_distance(
    xi: PointPattern,
    eta: PointPattern,
    params: Params,
    space: GroundSpace | None = None,
    solver: str = "auction",
) -> DistanceResult:
    """TT distance: optimal partial match cost plus penalties for the rest.

    The patterns are oriented canonically (smaller first, lexicographic key
    as tie break) before solving, so the result is exactly symmetric in its
    arguments.
    """
    space = _resolve_space(xi, eta, space)
    if xi.cardinality == 0 and eta.cardinality == 0:
        return DistanceResult(value=0.0, matching=[], params=params)
    swap = xi.cardinality > eta.cardinality or (
        xi.cardinality == eta.cardinality
        and params.is_symmetric
        and xi.sort_key() > eta.sort_key()
    )
    if swap and not params.is_symmetric:
        raise ValueError("first pattern may not be larger with asymmetric penalties")
    a, b = (eta, xi) if swap else (xi, eta)
    cost, matching = _solve_padded(a, b, params, space, solver)
    if swap:
        matching = [(j, i) for (i, j) in matching]
    return DistanceResult(value=cost ** (1.0 / params.order), matching=matching, params=params)


def rtt_distance(
    xi: PointPattern,
    eta: PointPattern,
    params: Params,
    space: GroundSpace | None = None,
    solver: str = "auction",
) -> DistanceResult:
    """TT distance normalized by the larger cardinality to the power 1/p."""
    n = max(xi.cardinality, eta.cardinality)
    if n == 0:
        return DistanceResult(value=0.0, matching=[], params=params)
    res = tt_distance(xi, eta, params, space, solver)
    return DistanceResult(
        value=res.value / n ** (1.0 / params.order),
        matching=res.matching,
        params=params,
    )


def tt_distance_bruteforce(
    xi: PointPattern,
    eta: PointPattern,
    params: Params,
    space: GroundSpace | None = None,
) -> DistanceResult:
    """Exhaustive minimum over all partial index matchings (test oracle).

    Enumerates every choice of matched index tuples directly from the
    definition, with untruncated ground distances; guarded to small patterns.
    """
    m, n = xi.cardinality, eta.cardinality
    if m > BRUTEFORCE_MAX_POINTS or n > BRUTEFORCE_MAX_POINTS:
        raise ValueError(f"brute force limited to patterns of <= {BRUTEFORCE_MAX_POINTS} points")
    space = _resolve_space(xi, eta, space)
    p = params.order
    base = np.zeros((max(m, 1), max(n, 1)))
    if m > 0 and n > 0:
        base = space.pairwise(xi.points, eta.points) ** p
    best = np.inf
    best_pairs: list[tuple[int, int]] = []
    for l in range(min(m, n) + 1):
        unmatched = (m - l) * params.p_delete**p + (n - l) * params.p_add**p
        for rows in itertools.combinations(range(m), l):
            for cols in itertools.permutations(range(n), l):
                cost = unmatched + sum(base[i, j] for i, j in zip(rows, cols))
                if cost < best:
                    best = cost
                    best_pairs = list(zip(rows, cols))
    matched_xi = {i for i, _ in best_pairs}
    matched_eta = {j for _, j in best_pairs}
    matching: list[tuple[int | None, int | None]] = list(best_pairs)
    matching += [(i, None) for i in range(m) if i not in matched_xi]
    matching += [(None, j) for j in range(n) if j not in matched_eta]
    return DistanceResult(value=float(best) ** (1.0 / p), matching=matching, params=params)


def ospa_distance(
    xi: PointPattern,
    eta: PointPattern,
    params: Params,
    space: GroundSpace | None = None,
    cutoff_at_penalty: bool = False,
) -> float:
    """OSPA form: per-point matching cost averaged over the larger pattern.

    Coincides with the RTT distance when the observed diameter stays below
    ``params.cutoff`` (a warning is emitted otherwise).  With
    ``cutoff_at_penalty`` the ground distance is cut at the penalty itself,
    the classical convention enforcing that bound.
    """
    m, n = xi.cardinality, eta.cardinality
    if m == 0 and n == 0:
        return 0.0
    if m > n:
        xi, eta = eta, xi
        m, n = n, m
    p = params.order
    cost = 0.0
    if m > 0:
        space = _resolve_space(xi, eta, space)
        d = space.pairwise(xi.points, eta.points)
        if d.max() > params.cutoff and not cutoff_at_penalty:
            warnings.warn(
                "point distances exceed the truncation threshold; "
                "OSPA and RTT no longer coincide",
                stacklevel=2,
            )
        if cutoff_at_penalty:
            d = np.minimum(d, params.penalty)
        rows, cols = linear_sum_assignment(d**p)
        cost = float((d**p)[rows, cols].sum())
    return (((n - m) * params.penalty**p + cost) / n) ** (1.0 / p)


def spike_time_distance(
    xi: PointPattern,
    eta: PointPattern,
    p_add: float,
    p_delete: float,
    move_scale: float = 1.0,
    space: GroundSpace | None = None,
) -> float:
    """Edit-path distance: move points at ``move_scale`` per unit distance,
    add at ``p_add``, delete at ``p_delete``.

    Equals the order-1 TT distance with both penalties at C when
    ``p_add = p_delete = C`` and ``move_scale = 1``.
    """
    if p_add <= 0 or p_delete <= 0:
        raise ValueError("add and delete penalties must be positive")
    if move_scale <= 0:
        raise ValueError("move_scale must be positive")
    params = Params(
        penalty=min(p_add, p_delete) / move_scale,
        order=1.0,
        add_penalty=p_add / move_scale,
        delete_penalty=p_delete / move_scale,
    )
    if xi.cardinality > eta.cardinality:
        xi, eta = eta, xi
        params = Params(
            penalty=params.penalty,
            order=1.0,
            add_penalty=p_delete / move_scale,
            delete_penalty=p_add / move_scale,
        )
    res = tt_distance(xi, eta, params, space)
    return move_scale * res.value
