"""Barycenter fitting by alternating minimization: optimal matchings between
the current center pattern and every data pattern (auction solves), then
per-cluster center moves, deletions to and additions from the virtual
location.  Includes the faster variant that thins the epsilon schedule and
stops checking for deletions/additions after the first few iterations.
"""

from __future__ import annotations

import os
import warnings
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field
from enum import IntEnum

import numpy as np

from .assignment import CostMatrix, default_eps_schedule, solve_auction
from .core import (
    VIRTUAL,
    GroundSpace,
    Params,
    PointPattern,
    infer_space,
    is_virtual,
)

DEFAULT_MAX_ITER = 200
DEFAULT_N_DEL_ADD = 5


class MatchState(IntEnum):
    """Quality of one center/data-point pairing.

    A happy match pairs real points below the truncation cutoff.  A
    miserable match is cost-maximal: real points at the cutoff, or a real
    data point against a virtual center.  TO_VIRTUAL marks padded (virtual)
    data points.
    """

    HAPPY = 0
    MISERABLE = 1
    TO_VIRTUAL = 2


@dataclass
class BarycenterState:
    """Snapshot of the alternating fit: center slots, per-pattern assignment
    columns, match-state table and the current objective value."""

    centers: list
    perm: np.ndarray
    match: np.ndarray
    cost: float


@dataclass
class FitReport:
    """Result of one barycenter fit.

    ``barycenter`` holds the center slots that remained real; ``objective``
    is the certified value of the fitted functional; ``trace`` records the
    objective after every matching step (entries from relaxed, uncertified
    matchings are flagged False in ``trace_certified`` and may transiently
    exceed their predecessor).
    """

    barycenter: PointPattern
    objective: float
    iterations: int
    trace: list[float]
    trace_certified: list[bool]
    converged: bool
    n_slots: int
    state: BarycenterState | None = field(default=None, repr=False)


@dataclass
class RestartResult:
    best: FitReport
    objectives: np.ndarray
    deviation: float
    reports: list[FitReport] = field(repr=False, default_factory=list)


def cardinality_upper_bound(patterns) -> int:
    """Largest barycenter cardinality worth considering.

    Any center matched to at most half of the patterns is never worth
    keeping, so ``floor(2/(k+1) * sum_j n_j)`` slots always suffice.
    """
    k = len(patterns)
    if k < 1:
        raise ValueError("need at least one pattern")
    total = sum(len(p) for p in patterns)
    return (2 * total) // (k + 1)


def relative_deviation(objectives) -> float:
    """Spread statistic (max - min) / min over restart objectives."""
    objs = np.asarray(objectives, dtype=float)
    lo, hi = objs.min(), objs.max()
    if hi == lo:
        return 0.0
    if lo == 0.0:
        return float("inf")
    return float((hi - lo) / lo)


class AlternatingFit:
    """Mutable engine carrying one fit's state through the alternating steps.

    All ground distances flow through ``space.pairwise`` so that repeated
    evaluations of the same pair are bitwise identical, which keeps the
    certified objective trace exactly non-increasing.
    """

    def __init__(self, patterns, params: Params, start: PointPattern, space=None,
                 n_slots=None, weights=None, rng=None):
        if len(patterns) < 1:
            raise ValueError("need at least one data pattern")
        if not params.is_symmetric:
            raise ValueError("barycenter fitting uses the symmetric penalty only")
        self.params = params
        self.p = params.order
        self.pen_pow = params.penalty**params.order
        self.cutoff = params.cutoff
        self.cutoff_pow = params.cutoff_pow
        self.space = infer_space(*patterns, start) if space is None else space
        if not self.space.supports_order(self.p):
            from .core import UnsupportedConfigError

            raise UnsupportedConfigError(
                f"{self.space!r} has no center solver for order p={self.p}"
            )
        self.k = len(patterns)
        self.m = np.array([len(pat) for pat in patterns], dtype=np.int64)
        self.pts = [self.space.stack(pat.points) for pat in patterns]
        if weights is None:
            self.weights = np.ones(self.k)
        else:
            self.weights = np.asarray(weights, dtype=float)
            if self.weights.shape != (self.k,) or np.any(self.weights <= 0):
                raise ValueError("weights must be positive, one per pattern")
        self.n = int(max(n_slots or 0, self.m.max(initial=0), len(start)))
        self.rng = np.random.default_rng(rng) if not isinstance(rng, np.random.Generator) else rng
        self.centers = [start.points[i] for i in range(len(start))]
        self.centers += [VIRTUAL] * (self.n - len(start))
        self.is_real = np.array([not is_virtual(z) for z in self.centers], dtype=bool)
        n = self.n
        self.perm = np.tile(np.arange(n, dtype=np.int64)[:, None], (1, self.k))
        self.inv_perm = self.perm.copy()
        self.dpow = np.zeros((n, self.k))
        self.match = np.full((n, self.k), MatchState.TO_VIRTUAL, dtype=np.int8)
        self.auction_states = [None] * self.k
        self.cost = 0.0
        self.full_schedule = default_eps_schedule(n) if n > 0 else None

    # -- distance plumbing -------------------------------------------------
    #
    # Every ground distance is evaluated through space.paired/pairwise, whose
    # per-pair results are bitwise identical across batch shapes, so repeated
    # evaluations of one pair always agree.

    def _set_center(self, i: int, value):
        self.centers[i] = value
        self.is_real[i] = not is_virtual(value)

    def _dist_to_center(self, z, point_rows) -> np.ndarray:
        """Ground distances from one real center to a stacked point array."""
        return self.space.dist_to_one(z, point_rows)

    def _tables(self, j: int):
        """Extended-distance cost matrix (d'^p) and at-cutoff mask, pattern j."""
        n, m = self.n, int(self.m[j])
        real = self.is_real
        M = np.zeros((n, n))
        cap = np.zeros((n, n), dtype=bool)
        M[real, m:] = self.pen_pow
        M[~real, :m] = self.pen_pow
        if m > 0 and real.any():
            zs = self.space.stack([z for z, r in zip(self.centers, real) if r])
            d = self.space.pairwise(zs, self.pts[j])
            at = d >= self.cutoff
            block = np.where(at, self.cutoff_pow, d**self.p)
            M[np.ix_(real, np.arange(m))] = block
            cap[np.ix_(real, np.arange(m))] = at
        return M, cap

    def _recompute_total(self):
        self.cost = float(self.dpow.sum(axis=0) @ self.weights)

    def _refresh(self):
        """Recompute assigned costs and match states row by row."""
        for i in range(self.n):
            self._update_row(i)
        self._recompute_total()

    def snapshot(self) -> BarycenterState:
        return BarycenterState(
            centers=list(self.centers),
            perm=self.perm.copy(),
            match=self.match.copy(),
            cost=self.cost,
        )

    # -- alternating steps -------------------------------------------------

    def optim_perm(self, schedule=None, warm: bool = True) -> bool:
        """Re-match every pattern against the current centers.

        Solves one square assignment per pattern with the auction algorithm,
        warm-started from the previous price vector.  On certified solves the
        previous column is kept whenever quantization ties would make the new
        one costlier on the unquantized scale.  Returns the certification
        flag (shared by all columns).
        """
        if self.n == 0:
            self.cost = 0.0
            return True
        sched = self.full_schedule if schedule is None else np.asarray(schedule, dtype=float)
        certified = sched[-1] < 1.0 / self.n
        rows = np.arange(self.n)
        for j in range(self.k):
            M, cap = self._tables(j)
            res = solve_auction(
                CostMatrix.from_costs(M),
                sched,
                warm_start=self.auction_states[j] if warm else None,
            )
            self.auction_states[j] = res.state
            new_col = res.perm
            if certified:
                old_col = self.perm[:, j]
                if M[rows, old_col].sum() < M[rows, new_col].sum():
                    new_col = old_col
            self.perm[:, j] = new_col
            self.inv_perm[new_col, j] = rows
            self.dpow[:, j] = M[rows, new_col]
            real_pt = new_col < self.m[j]
            state = np.full(self.n, MatchState.TO_VIRTUAL, dtype=np.int8)
            state[real_pt & ~self.is_real] = MatchState.MISERABLE
            both = real_pt & self.is_real
            state[both] = np.where(
                cap[rows, new_col][both], MatchState.MISERABLE, MatchState.HAPPY
            )
            self.match[:, j] = state
        self._recompute_total()
        return certified

    def _cluster_real_points(self, i: int):
        """Real data points of cluster i with their pattern weights."""
        pts, ws, js = [], [], []
        for j in range(self.k):
            a = self.perm[i, j]
            if a < self.m[j]:
                pts.append(self.pts[j][a])
                ws.append(self.weights[j])
                js.append(j)
        return pts, np.asarray(ws), js

    def _truncated_cost(self, z, pts, ws) -> float:
        if len(pts) == 0:
            return 0.0
        d = self._dist_to_center(z, self.space.stack(pts))
        return float(np.sum(ws * np.where(d >= self.cutoff, self.cutoff_pow, d**self.p)))

    def optim_bary(self):
        """Move each real center to a better location for its cluster.

        Only happily matched points steer the move (points at maximal
        extended distance cannot get worse, so ignoring them never raises the
        cluster cost); centers without happy points stay put and fall to the
        deletion step.
        """
        for i in range(self.n):
            if not self.is_real[i]:
                continue
            happy = self.match[i, :] == MatchState.HAPPY
            if not happy.any():
                continue
            h_pts = [self.pts[j][self.perm[i, j]] for j in np.flatnonzero(happy)]
            h_w = self.weights[happy]
            z_new = self.space.center(
                self.space.stack(h_pts), self.p,
                weights=h_w, incumbent=self.centers[i], rng=self.rng,
            )
            pts, ws, _ = self._cluster_real_points(i)
            if self._truncated_cost(z_new, pts, ws) <= self._truncated_cost(self.centers[i], pts, ws):
                self._set_center(i, z_new)
                self._update_row(i)
        self._recompute_total()

    def optim_delete(self):
        """Send centers to the virtual location where that lowers the cost.

        A center matched happily to fewer than half the total weight is
        always deleted (shortcut); otherwise the exact cost comparison
        between keeping and deleting decides.
        """
        W = self.weights.sum()
        for i in range(self.n):
            if not self.is_real[i]:
                continue
            happy = self.match[i, :] == MatchState.HAPPY
            w_h = self.weights[happy].sum()
            if 2.0 * w_h < W:
                delete = True  # happy on a minority of the weight: always cheaper gone
            else:
                c_h = float(np.sum(self.weights[happy] * self.dpow[i, happy]))
                delete = w_h * self.pen_pow < c_h + (W - w_h) * self.pen_pow
            if delete:
                self._set_center(i, VIRTUAL)
                self._update_row(i)
        self._recompute_total()

    def _swap(self, j: int, i_a: int, i_b: int):
        a, b = self.perm[i_a, j], self.perm[i_b, j]
        self.perm[i_a, j], self.perm[i_b, j] = b, a
        self.inv_perm[b, j], self.inv_perm[a, j] = i_a, i_b

    def optim_add(self):
        """Move virtual centers back into the ground space when profitable.

        Proposals are drawn uniformly from the miserably matched data points.
        Before testing a proposal, each pattern's nearest miserable point is
        exchanged into the candidate cluster (never raising the total cost),
        the proposal is recentered on its happy points, and the move is kept
        only if it beats leaving the center virtual.
        """
        virtual_rows = [i for i in range(self.n) if not self.is_real[i]]
        if not virtual_rows:
            return
        supply = [
            (j, a)
            for j in range(self.k)
            for a in range(int(self.m[j]))
            if self.match[self.inv_perm[a, j], j] == MatchState.MISERABLE
        ]
        for i in virtual_rows:
            if not supply:
                break
            j0, a0 = supply.pop(int(self.rng.integers(len(supply))))
            z_prop = self.pts[j0][a0]
            swapped = []
            for j in range(self.k):
                mis = np.flatnonzero(self.match[:, j] == MatchState.MISERABLE)
                if mis.size == 0:
                    continue
                cand = self.pts[j][self.perm[mis, j]]
                d = self._dist_to_center(z_prop, self.space.stack(cand))
                i_star = int(mis[np.argmin(d)])
                if i_star != i:
                    self._swap(j, i, i_star)
                    swapped.append((j, i_star))
            pts, ws, js = self._cluster_real_points(i)
            z_new = z_prop
            if pts:
                d = self._dist_to_center(z_prop, self.space.stack(pts))
                happy = d < self.cutoff
                if happy.any():
                    stacked = self.space.stack(pts)
                    z_cand = self.space.center(
                        stacked[happy], self.p, weights=ws[happy],
                        incumbent=z_prop, rng=self.rng,
                    )
                    if self._truncated_cost(z_cand, pts, ws) <= self._truncated_cost(z_prop, pts, ws):
                        z_new = z_cand
            # leaving the center virtual costs a penalty per real point; making
            # it real costs the matches plus a penalty per virtual point
            w_real = ws.sum()
            w_virtual = self.weights.sum() - w_real
            c_new = self._truncated_cost(z_new, pts, ws) + w_virtual * self.pen_pow
            if c_new < w_real * self.pen_pow:
                self._set_center(i, z_new)
                self._update_row(i)
                for j, i_star in swapped:
                    self._update_entry(i_star, j)
                supply = [
                    (j, a)
                    for (j, a) in supply
                    if self.match[self.inv_perm[a, j], j] == MatchState.MISERABLE
                ]
            else:
                for j, i_star in reversed(swapped):
                    self._swap(j, i, i_star)
        self._recompute_total()

    def _update_entry(self, i: int, j: int):
        a = self.perm[i, j]
        z = self.centers[i]
        if is_virtual(z):
            if a < self.m[j]:
                self.dpow[i, j] = self.pen_pow
                self.match[i, j] = MatchState.MISERABLE
            else:
                self.dpow[i, j] = 0.0
                self.match[i, j] = MatchState.TO_VIRTUAL
        elif a < self.m[j]:
            d = float(self._dist_to_center(z, self.space.stack([self.pts[j][a]]))[0])
            if d >= self.cutoff:
                self.dpow[i, j] = self.cutoff_pow
                self.match[i, j] = MatchState.MISERABLE
            else:
                self.dpow[i, j] = d**self.p
                self.match[i, j] = MatchState.HAPPY
        else:
            self.dpow[i, j] = self.pen_pow
            self.match[i, j] = MatchState.TO_VIRTUAL

    def _update_row(self, i: int):
        """Resync row i of the assigned-cost and match tables."""
        cols = self.perm[i, :]
        real_pt = cols < self.m
        z = self.centers[i]
        if is_virtual(z):
            self.dpow[i, :] = np.where(real_pt, self.pen_pow, 0.0)
            self.match[i, :] = np.where(real_pt, MatchState.MISERABLE, MatchState.TO_VIRTUAL)
            return
        self.dpow[i, :] = self.pen_pow
        self.match[i, :] = MatchState.TO_VIRTUAL
        js = np.flatnonzero(real_pt)
        if js.size:
            partners = self.space.stack([self.pts[j][cols[j]] for j in js])
            d = self._dist_to_center(z, partners)
            at = d >= self.cutoff
            self.dpow[i, js] = np.where(at, self.cutoff_pow, d**self.p)
            self.match[i, js] = np.where(at, MatchState.MISERABLE, MatchState.HAPPY)

    # -- results -----------------------------------------------------------

    def real_centers(self) -> PointPattern:
        zs = [z for z in self.centers if not is_virtual(z)]
        return PointPattern(self.space.stack(zs))


def recomputed_cost(state: BarycenterState, patterns, params: Params, space=None, weights=None) -> float:
    """Objective value re-derived from centers and assignments alone."""
    space = infer_space(*patterns) if space is None else space
    k = len(patterns)
    w = np.ones(k) if weights is None else np.asarray(weights, dtype=float)
    total = 0.0
    for j, pat in enumerate(patterns):
        m = len(pat)
        for i, a in enumerate(state.perm[:, j]):
            z = state.centers[i]
            if is_virtual(z):
                total += w[j] * (params.penalty**params.order if a < m else 0.0)
            elif a >= m:
                total += w[j] * params.penalty**params.order
            else:
                d = space.distance(z, pat.points[a])
                total += w[j] * min(
                    d**params.order, params.cutoff_pow
                )
    return total


def _empty_report(engine: AlternatingFit) -> FitReport:
    return FitReport(
        barycenter=engine.real_centers(),
        objective=0.0,
        iterations=0,
        trace=[0.0],
        trace_certified=[True],
        converged=True,
        n_slots=0,
    )


def kmeans_bary(
    patterns,
    params: Params,
    start: PointPattern,
    space: GroundSpace | None = None,
    delta: float | None = None,
    max_iter: int = DEFAULT_MAX_ITER,
    n_slots: int | None = None,
    weights=None,
    rng=None,
) -> FitReport:
    """Alternating barycenter fit, full matching accuracy every iteration.

    Each iteration re-centers, deletes, adds, then re-matches; the certified
    objective can never increase, so the loop stops once an iteration gains
    less than ``delta`` (default ``1e-10 * (initial cost + 1)``).  A warning
    is emitted if the iteration cap is hit first.
    """
    eng = AlternatingFit(patterns, params, start, space=space, n_slots=n_slots,
                         weights=weights, rng=rng)
    if eng.n == 0:
        return _empty_report(eng)
    eng.optim_perm(warm=False)
    trace = [eng.cost]
    if delta is None:
        delta = 1e-10 * (trace[0] + 1.0)
    converged = False
    it = 0
    for it in range(1, max_iter + 1):
        cost_old = eng.cost
        eng.optim_bary()
        eng.optim_delete()
        eng.optim_add()
        eng.optim_perm()
        trace.append(eng.cost)
        if cost_old - eng.cost < delta:
            converged = True
            break
    if not converged:
        warnings.warn(f"barycenter fit stopped at the iteration cap ({max_iter})", stacklevel=2)
    return FitReport(
        barycenter=eng.real_centers(),
        objective=eng.cost,
        iterations=it,
        trace=trace,
        trace_certified=[True] * len(trace),
        converged=converged,
        n_slots=eng.n,
        state=eng.snapshot(),
    )


def improved_eps_windows(length: int) -> tuple[list[int], list[int]]:
    """Start/end indices (1-based) of the thinned epsilon subschedules.

    The first three windows grow from the coarsest epsilon; later windows
    drop the coarse entries and extend two steps deeper each time they are
    advanced, the last one reaching the certified tail.
    """
    ends = [1, 2, 3]
    e = 4
    while e <= (length - 1) // 2 * 2:
        ends.append(e)
        e += 2
    ends.append(length)
    starts = [1, 1, 1] + [3] * (len(ends) - 4) + [4]
    return starts, ends


def kmeans_bary_improved(
    patterns,
    params: Params,
    start: PointPattern,
    space: GroundSpace | None = None,
    delta: float | None = None,
    max_iter: int = DEFAULT_MAX_ITER,
    n_del_add: int = DEFAULT_N_DEL_ADD,
    n_slots: int | None = None,
    weights=None,
    rng=None,
) -> FitReport:
    """Alternating barycenter fit with staged matching accuracy.

    Deletion/addition checks run only in the first ``n_del_add`` iterations.
    Matchings use a window of the epsilon schedule that deepens over the
    first three iterations and afterwards advances one window whenever the
    fit would otherwise converge or the (relaxed) cost increases, which can
    only happen while matchings are not yet optimal.  Termination requires a
    certified matching, so the reported objective is always certified.
    """
    eng = AlternatingFit(patterns, params, start, space=space, n_slots=n_slots,
                         weights=weights, rng=rng)
    if eng.n == 0:
        return _empty_report(eng)
    eps = eng.full_schedule
    length = len(eps)
    starts, ends = improved_eps_windows(length)
    n_windows = len(starts)
    eng.optim_perm(warm=False)
    trace = [eng.cost]
    certified_flags = [True]
    if delta is None:
        delta = 1e-10 * (trace[0] + 1.0)
    converged = False
    window = 1
    it = 0
    for it in range(1, max_iter + 1):
        cost_old = eng.cost
        eng.optim_bary()
        if it <= n_del_add:
            eng.optim_delete()
            eng.optim_add()
        sub = eps[starts[window - 1] - 1 : ends[window - 1]]
        certified = eng.optim_perm(schedule=sub)
        trace.append(eng.cost)
        certified_flags.append(certified)
        decrease = cost_old - eng.cost
        if certified and decrease < delta:
            converged = True
            break
        if decrease < delta or eng.cost > cost_old:
            window = min(window + 1, n_windows)
        if it < 3:
            window = max(window, it + 1)
        elif it == 3:
            window = max(window, 4)
        window = min(window, n_windows)
    if not converged:
        # report a certified objective even when stopping at the cap
        certified = eng.optim_perm(schedule=eps[starts[-1] - 1 :])
        trace.append(eng.cost)
        certified_flags.append(certified)
        warnings.warn(f"barycenter fit stopped at the iteration cap ({max_iter})", stacklevel=2)
    return FitReport(
        barycenter=eng.real_centers(),
        objective=eng.cost,
        iterations=it,
        trace=trace,
        trace_certified=certified_flags,
        converged=converged,
        n_slots=eng.n,
        state=eng.snapshot(),
    )


def default_start(patterns, space: GroundSpace, rng: np.random.Generator,
                  cardinality: int | None = None) -> PointPattern:
    """Starting pattern of mean data cardinality, uniform on the window."""
    if cardinality is None:
        cardinality = int(round(sum(len(p) for p in patterns) / len(patterns)))
    return PointPattern(space.sample(rng, cardinality))


def _fit_one(task):
    patterns, params, start, algorithm, kwargs = task
    if algorithm == "original":
        return kmeans_bary(patterns, params, start, **kwargs)
    return kmeans_bary_improved(patterns, params, start, **kwargs)


def fit_with_restarts(
    patterns,
    params: Params,
    n_starts: int = 10,
    algorithm: str = "original",
    space: GroundSpace | None = None,
    starts=None,
    start_cardinality: int | None = None,
    n_slots: int | None = None,
    weights=None,
    rng=None,
    delta: float | None = None,
    max_iter: int = DEFAULT_MAX_ITER,
    n_del_add: int = DEFAULT_N_DEL_ADD,
    threads: int = 1,
) -> RestartResult:
    """Run the chosen fit from several starts; keep the best local optimum.

    Returns the argmin report together with all objectives and their
    relative spread ``(max - min) / min``.  Restarts get independently split
    generator streams, so results do not depend on ``threads``.
    """
    if algorithm not in ("original", "improved"):
        raise ValueError(f"unknown algorithm {algorithm!r}")
    if n_starts < 1:
        raise ValueError("n_starts must be >= 1")
    space = infer_space(*patterns) if space is None else space
    rng = np.random.default_rng(rng) if not isinstance(rng, np.random.Generator) else rng
    child_rngs = rng.spawn(n_starts)
    if starts is None:
        starts = [default_start(patterns, space, child_rngs[s], start_cardinality)
                  for s in range(n_starts)]
    elif len(starts) != n_starts:
        raise ValueError("number of starts does not match n_starts")
    tasks = []
    for s in range(n_starts):
        kwargs = dict(space=space, delta=delta, max_iter=max_iter,
                      n_slots=n_slots, weights=weights, rng=child_rngs[s])
        if algorithm == "improved":
            kwargs["n_del_add"] = n_del_add
        tasks.append((patterns, params, starts[s], algorithm, kwargs))
    if threads == 0:
        threads = os.cpu_count() or 1
    if threads == 1 or n_starts == 1:
        reports = [_fit_one(t) for t in tasks]
    else:
        with ProcessPoolExecutor(max_workers=min(threads, n_starts)) as pool:
            reports = list(pool.map(_fit_one, tasks))
    objectives = np.array([r.objective for r in reports])
    best = reports[int(np.argmin(objectives))]
    return RestartResult(
        best=best,
        objectives=objectives,
        deviation=relative_deviation(objectives),
        reports=reports,
    )
