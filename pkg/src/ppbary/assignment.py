"""Square linear assignment: an exact solver used as reference, and a forward
auction with epsilon scaling operating on integer-rescaled costs, including
early-stopped relaxed solves and warm starts from saved price vectors.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np
from scipy.optimize import linear_sum_assignment

try:
    from numba import njit
except ImportError:  # pragma: no cover - numba is a hard dependency in practice
    def njit(*args, **kwargs):
        if args and callable(args[0]):
            return args[0]
        return lambda f: f


QUANT_SCALE = 10**9


@dataclass(frozen=True)
class CostMatrix:
    """Nonnegative square cost matrix with an integer-rescaled twin.

    The quantization maps the matrix minimum to 0 and the maximum to 10^9 by
    an affine rescale, so relative cost order is preserved up to rounding
    ties at that resolution.
    """

    costs: np.ndarray
    quantized: np.ndarray

    @classmethod
    def from_costs(cls, costs) -> "CostMatrix":
        arr = np.ascontiguousarray(costs, dtype=float)
        if arr.ndim != 2 or arr.shape[0] != arr.shape[1] or arr.shape[0] < 1:
            raise ValueError("cost matrix must be square and nonempty")
        if not np.all(np.isfinite(arr)):
            raise ValueError("costs must be finite")
        if arr.min() < 0:
            raise ValueError("costs must be nonnegative")
        lo, hi = arr.min(), arr.max()
        if hi > lo:
            quant = np.rint((arr - lo) / (hi - lo) * QUANT_SCALE).astype(np.int64)
        else:
            quant = np.zeros_like(arr, dtype=np.int64)
        arr.setflags(write=False)
        quant.setflags(write=False)
        return cls(costs=arr, quantized=quant)

    @property
    def n(self) -> int:
        return self.costs.shape[0]

    def resolution(self) -> float:
        """Real-cost width of one quantization step."""
        lo, hi = self.costs.min(), self.costs.max()
        return (hi - lo) / QUANT_SCALE


def ensure_cost_matrix(costs) -> CostMatrix:
    return costs if isinstance(costs, CostMatrix) else CostMatrix.from_costs(costs)


@dataclass
class AuctionState:
    """Price/profit vectors and assignment kept between auction calls.

    Re-using prices for the next solve with similar costs (the warm start)
    changes only the work performed, never a certified result.
    """

    prices: np.ndarray
    profits: np.ndarray
    perm: np.ndarray
    eps: float


@dataclass
class AssignmentResult:
    perm: np.ndarray
    total_cost: float
    state: AuctionState | None = None
    certified_optimal: bool = True


def solve_exact(costs) -> AssignmentResult:
    """Minimum-cost perfect matching of a square matrix (reference solver)."""
    cm = ensure_cost_matrix(costs)
    rows, cols = linear_sum_assignment(cm.costs)
    perm = np.empty(cm.n, dtype=np.int64)
    perm[rows] = cols
    total = float(cm.costs[rows, cols].sum())
    return AssignmentResult(perm=perm, total_cost=total)


def default_eps_schedule(n: int) -> np.ndarray:
    """Geometric epsilon schedule (ratio 10) for an n x n integer problem.

    Entries are ``10**(l-i) / (n+1)``; the length l is the smallest making
    the first entry at least 10^7 (it is then below 10^8), and the last entry
    ``1/(n+1)`` is below ``1/n``, which certifies the final assignment as
    optimal on the integer scale.
    """
    if n < 1:
        raise ValueError("n must be >= 1")
    target = 10**7 * (n + 1)
    e = 0
    while 10**e < target:
        e += 1
    length = e + 1
    return np.array([10.0 ** (length - i) / (n + 1) for i in range(1, length + 1)])


@njit(cache=True)
def _auction_phase(benefit, prices, eps, owner, assigned):  # pragma: no cover - jitted
    """One forward-auction pass at fixed eps; mutates prices and assignment.

    All rows start unassigned; rows bid best-minus-second-best plus eps for
    their most valuable column, displacing previous owners.  Ties go to the
    lowest column index.
    """
    n = benefit.shape[0]
    for j in range(n):
        owner[j] = -1
    for i in range(n):
        assigned[i] = -1
    stack = np.empty(n, dtype=np.int64)
    for i in range(n):
        stack[i] = n - 1 - i
    top = n
    while top > 0:
        top -= 1
        i = stack[top]
        best_j = 0
        best_v = benefit[i, 0] - prices[0]
        second_v = -np.inf
        for j in range(1, n):
            v = benefit[i, j] - prices[j]
            if v > best_v:
                second_v = best_v
                best_v = v
                best_j = j
            elif v > second_v:
                second_v = v
        if n == 1:
            second_v = best_v
        prices[best_j] = prices[best_j] + (best_v - second_v) + eps
        prev = owner[best_j]
        if prev >= 0:
            assigned[prev] = -1
            stack[top] = prev
            top += 1
        owner[best_j] = i
        assigned[i] = best_j


def solve_auction(costs, eps_schedule=None, warm_start: AuctionState | None = None) -> AssignmentResult:
    """Auction algorithm with epsilon scaling on the quantized costs.

    Runs one forward-auction phase per schedule entry, carrying prices
    between phases (and in from ``warm_start``).  The result is certified
    optimal for the quantized problem iff the final epsilon is below ``1/n``;
    otherwise its quantized total is within ``n * eps_final`` of the optimum.
    ``total_cost`` is always re-evaluated on the unquantized costs.
    """
    cm = ensure_cost_matrix(costs)
    n = cm.n
    if eps_schedule is None:
        eps_schedule = default_eps_schedule(n)
    eps = np.asarray(eps_schedule, dtype=float)
    if eps.size == 0:
        raise ValueError("epsilon schedule must not be empty")
    if np.any(eps <= 0):
        raise ValueError("epsilon values must be positive")
    if np.any(np.diff(eps) > 0):
        raise ValueError("epsilon schedule must be non-increasing")

    if warm_start is not None:
        if warm_start.prices.shape != (n,):
            raise ValueError("warm start dimension does not match the problem")
        prices = warm_start.prices.astype(float).copy()
    else:
        prices = np.zeros(n)

    benefit = -cm.quantized
    owner = np.empty(n, dtype=np.int64)
    assigned = np.empty(n, dtype=np.int64)
    for e in eps:
        _auction_phase(benefit, prices, float(e), owner, assigned)

    profits = (benefit - prices[None, :]).max(axis=1).astype(float)
    total = float(cm.costs[np.arange(n), assigned].sum())
    final_eps = float(eps[-1])
    state = AuctionState(prices=prices, profits=profits, perm=assigned.copy(), eps=final_eps)
    return AssignmentResult(
        perm=assigned,
        total_cost=total,
        state=state,
        certified_optimal=final_eps < 1.0 / n,
    )
