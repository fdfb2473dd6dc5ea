"""Core domain types: point patterns, ground spaces, penalty parameters and
the extended point distance with a virtual "deleted point" location.

Locations are plain values interpreted by a ground space: D-vectors of
coordinates on Euclidean space, integer row indices of a precomputed
shortest-path matrix on a network.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Sequence

import numpy as np


class UnsupportedConfigError(ValueError):
    """Raised for (ground space, order) combinations without a center solver."""


class _VirtualPoint:
    """Singleton standing in for a deleted / not-yet-existing point.

    It is never stored inside a :class:`PointPattern`; it appears only in
    padded assignment inputs and in barycenter center slots.
    """

    _instance = None

    def __new__(cls):
        if cls._instance is None:
            cls._instance = super().__new__(cls)
        return cls._instance

    def __repr__(self):
        return "VIRTUAL"

    def __reduce__(self):
        return (_VirtualPoint, ())


VIRTUAL = _VirtualPoint()


def is_virtual(x) -> bool:
    return x is VIRTUAL


@dataclass(frozen=True)
class Params:
    """Penalty and order of the point pattern distance.

    ``penalty`` is the cost scale for unmatched points (ground-distance
    units) and ``order`` the exponent applied to point distances.  Optional
    asymmetric ``add_penalty`` / ``delete_penalty`` override the penalty for
    points that exist only in the second / first pattern; when absent both
    equal ``penalty``.
    """

    penalty: float
    order: float = 2.0
    add_penalty: float | None = None
    delete_penalty: float | None = None

    def __post_init__(self):
        if not np.isfinite(self.penalty) or self.penalty <= 0:
            raise ValueError(f"penalty must be a positive real, got {self.penalty}")
        if not np.isfinite(self.order) or self.order < 1:
            raise ValueError(f"order must be >= 1, got {self.order}")
        for name in ("add_penalty", "delete_penalty"):
            v = getattr(self, name)
            if v is not None and (not np.isfinite(v) or v <= 0):
                raise ValueError(f"{name} must be a positive real, got {v}")

    @property
    def p_add(self) -> float:
        return self.penalty if self.add_penalty is None else self.add_penalty

    @property
    def p_delete(self) -> float:
        return self.penalty if self.delete_penalty is None else self.delete_penalty

    @property
    def is_symmetric(self) -> bool:
        return self.p_add == self.p_delete == self.penalty

    @property
    def cutoff_pow(self) -> float:
        """p-th power of the truncation threshold between real points.

        Calibrated so that a pair matched at the cutoff costs exactly the
        same as deleting one point and adding the other:
        ``cutoff**p = p_delete**p + p_add**p``.  With equal penalties this is
        exactly twice the penalty power.
        """
        p = self.order
        return self.p_add**p + self.p_delete**p

    @property
    def cutoff(self) -> float:
        """Truncation threshold for distances between real points.

        ``2**(1/p) * C`` in the symmetric case.
        """
        return self.cutoff_pow ** (1.0 / self.order)


class GroundSpace:
    """Metric oracle plus a cluster-center solver for a given order.

    ``distance`` is assumed to be a metric (spot-checked in tests).  The
    center solver must never return a location that is worse than a supplied
    incumbent for the untruncated cluster cost ``sum_i w_i d(x_i, z)**p``.
    """

    def distance(self, x, y) -> float:
        raise NotImplementedError

    def pairwise(self, xs, ys) -> np.ndarray:
        """Matrix of distances between two location sequences."""
        raise NotImplementedError

    def paired(self, xs, ys) -> np.ndarray:
        """Elementwise distances between two equal-length location sequences."""
        raise NotImplementedError

    def dist_to_one(self, z, ys) -> np.ndarray:
        """Distances from a single location to a stacked point array."""
        return self.paired(self.stack([z] * len(ys)), ys)

    def center(self, points, p: float, weights=None, incumbent=None, rng=None):
        """Minimizer (possibly heuristic) of ``sum_i w_i d(x_i, z)**p``."""
        raise NotImplementedError

    def supports_order(self, p: float) -> bool:
        raise NotImplementedError

    def sample(self, rng: np.random.Generator, size: int):
        """Draw ``size`` starting locations from the observation window."""
        raise NotImplementedError

    def stack(self, locations) -> np.ndarray:
        """Pack a sequence of locations into an array usable by pairwise()."""
        raise NotImplementedError

    def center_cost(self, points, z, p: float, weights=None) -> float:
        pts = self.stack(points)
        d = self.paired(pts, self.stack([z] * len(points)))
        w = np.ones(len(points)) if weights is None else np.asarray(weights, dtype=float)
        return float(np.sum(w * d**p))


class EuclideanSpace(GroundSpace):
    """R^D with the Euclidean metric and a rectangular observation window."""

    def __init__(self, dim: int, window: Sequence[tuple[float, float]] | None = None):
        if dim < 1:
            raise ValueError("dim must be >= 1")
        self.dim = int(dim)
        if window is None:
            window = [(0.0, 1.0)] * self.dim
        self.window = np.asarray(window, dtype=float)
        if self.window.shape != (self.dim, 2):
            raise ValueError("window must give (low, high) per dimension")

    def __repr__(self):
        return f"EuclideanSpace(dim={self.dim})"

    def _coerce(self, x) -> np.ndarray:
        arr = np.asarray(x, dtype=float)
        if arr.ndim == 0:
            arr = arr[None]
        if arr.shape != (self.dim,):
            raise ValueError(
                f"location of dimension {arr.shape} does not live in {self!r}"
            )
        return arr

    def distance(self, x, y) -> float:
        return float(np.linalg.norm(self._coerce(x) - self._coerce(y)))

    def pairwise(self, xs, ys) -> np.ndarray:
        a = np.asarray(xs, dtype=float).reshape(-1, self.dim)
        b = np.asarray(ys, dtype=float).reshape(-1, self.dim)
        if a.shape[0] == 0 or b.shape[0] == 0:
            return np.zeros((a.shape[0], b.shape[0]))
        diff = a[:, None, :] - b[None, :, :]
        return np.sqrt(np.einsum("ijk,ijk->ij", diff, diff))

    def paired(self, xs, ys) -> np.ndarray:
        # same einsum reduction as pairwise(), so a pair's distance is
        # bitwise identical whichever entry point computed it
        a = np.asarray(xs, dtype=float).reshape(-1, self.dim)
        b = np.asarray(ys, dtype=float).reshape(-1, self.dim)
        diff = a - b
        return np.sqrt(np.einsum("ij,ij->i", diff, diff))

    def dist_to_one(self, z, ys) -> np.ndarray:
        b = np.asarray(ys, dtype=float).reshape(-1, self.dim)
        diff = b - self._coerce(z)  # (x-y)^2 == (y-x)^2 exactly
        return np.sqrt(np.einsum("ij,ij->i", diff, diff))

    def center(self, points, p: float, weights=None, incumbent=None, rng=None):
        from . import location

        pts = np.asarray(points, dtype=float).reshape(-1, self.dim)
        if pts.shape[0] == 0:
            raise ValueError("center of an empty point set is undefined")
        w = None if weights is None else np.asarray(weights, dtype=float)
        if p == 2:
            z = location.euclid_mean_center(pts, weights=w)
        elif p == 1:
            z = location.weiszfeld_median(pts, weights=w)
        else:
            raise UnsupportedConfigError(
                f"no Euclidean center solver for order p={p}; supported: 1, 2"
            )
        if incumbent is not None:
            inc = self._coerce(incumbent)
            if self.center_cost(pts, z, p, w) > self.center_cost(pts, inc, p, w):
                return inc
        return z

    def supports_order(self, p: float) -> bool:
        return p in (1, 2)

    def sample(self, rng: np.random.Generator, size: int) -> np.ndarray:
        lo, hi = self.window[:, 0], self.window[:, 1]
        return lo + (hi - lo) * rng.random((size, self.dim))

    def stack(self, locations) -> np.ndarray:
        if len(locations) == 0:
            return np.zeros((0, self.dim))
        return np.asarray(locations, dtype=float).reshape(-1, self.dim)


class PointPattern:
    """A finite multiset of locations on a common ground space.

    Stored order is incidental; two patterns are equal iff some bijection
    matches their points at ground distance zero, which for the location
    encodings used here reduces to exact equality of sorted point arrays.
    """

    def __init__(self, points):
        arr = np.asarray(points)
        if arr.ndim == 1 and arr.dtype.kind in "iu":
            arr = arr.astype(np.int64)
        else:
            arr = np.asarray(arr, dtype=float)
            if arr.size == 0:
                arr = arr.reshape(0, arr.shape[1] if arr.ndim == 2 else 1)
            if arr.ndim == 1:
                arr = arr[:, None]
            if arr.ndim != 2:
                raise ValueError("Euclidean points must form an (n, D) array")
            if not np.all(np.isfinite(arr)):
                raise ValueError("coordinates must be finite reals")
        self.points = arr
        self.points.setflags(write=False)

    @classmethod
    def empty(cls, dim: int = 1) -> "PointPattern":
        return cls(np.zeros((0, dim)))

    @property
    def cardinality(self) -> int:
        return self.points.shape[0]

    @property
    def dim(self) -> int:
        if self.points.ndim == 1:
            raise ValueError("network patterns have no coordinate dimension")
        return self.points.shape[1]

    @property
    def on_network(self) -> bool:
        return self.points.ndim == 1

    def __len__(self) -> int:
        return self.cardinality

    def __iter__(self):
        return iter(self.points)

    def __getitem__(self, i):
        return self.points[i]

    def _sorted(self) -> np.ndarray:
        if self.points.ndim == 1:
            return np.sort(self.points)
        if self.cardinality == 0:
            return self.points
        order = np.lexsort(self.points.T[::-1])
        return self.points[order]

    def sort_key(self) -> tuple:
        return (self.cardinality,) + tuple(self._sorted().ravel().tolist())

    def __eq__(self, other) -> bool:
        if not isinstance(other, PointPattern):
            return NotImplemented
        if self.points.ndim != other.points.ndim:
            return False
        if self.cardinality != other.cardinality:
            return False
        if self.cardinality == 0:
            return True
        if self.points.ndim == 2 and self.dim != other.dim:
            return False
        return bool(np.array_equal(self._sorted(), other._sorted()))

    __hash__ = None

    def __repr__(self):
        kind = "network" if self.on_network else f"R^{self.points.shape[1]}"
        return f"PointPattern(n={self.cardinality}, space={kind})"


def infer_space(*patterns: PointPattern) -> EuclideanSpace:
    """Euclidean space matching the given coordinate patterns.

    Network patterns (integer locations) carry no geometry of their own, so
    the caller must pass the network space explicitly.
    """
    dims = set()
    for pat in patterns:
        if pat.on_network:
            raise ValueError("network point patterns need an explicit ground space")
        if pat.cardinality > 0:
            dims.add(pat.dim)
    if len(dims) > 1:
        raise ValueError(f"patterns live in different spaces: dimensions {sorted(dims)}")
    return EuclideanSpace(dims.pop() if dims else 1)


def extended_distance(x, y, params: Params, space: GroundSpace | None = None) -> float:
    """Distance on the ground space extended by the virtual location.

    Between real points the ground distance is truncated at
    ``params.cutoff``; a real point against the virtual location costs the
    add/delete penalty (``x`` plays the first-pattern role, so ``x`` virtual
    means an addition and ``y`` virtual a deletion); two virtual points are
    at distance zero.
    """
    xv, yv = is_virtual(x), is_virtual(y)
    if xv and yv:
        return 0.0
    if xv:
        return params.p_add
    if yv:
        return params.p_delete
    if space is None:
        space = infer_space(PointPattern([x]), PointPattern([y]))
    d = space.distance(x, y)
    return min(d, params.cutoff)
