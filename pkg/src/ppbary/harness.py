"""Simulation harness: clustered point pattern scenarios on the unit square,
repeated barycenter fits from random starts, and deviation/timing statistics
aggregated over instances.
"""

from __future__ import annotations

import os
import time
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field, replace

import numpy as np

from .barycenter import fit_with_restarts, relative_deviation
from .core import EuclideanSpace, Params, PointPattern

CARDINALITY_LAWS = ("deterministic", "binomial", "poisson")
CENTER_COUNTS = (5, 10, 15)


def mixture_centers(n_centers: int) -> np.ndarray:
    """Fixed cluster-center layouts inside [0.1, 0.9]^2.

    5 centers form a quincunx, 10 a 5x2 grid and 15 a 5x3 grid; the layouts
    are constants of the harness so studies are reproducible.
    """
    xs = np.linspace(0.1, 0.9, 5)
    if n_centers == 5:
        return np.array([
            [0.25, 0.25], [0.75, 0.25], [0.5, 0.5], [0.25, 0.75], [0.75, 0.75],
        ])
    if n_centers == 10:
        return np.array([[x, y] for y in (0.3, 0.7) for x in xs])
    if n_centers == 15:
        return np.array([[x, y] for y in (0.2, 0.5, 0.8) for x in xs])
    raise ValueError(f"n_centers must be one of {CENTER_COUNTS}, got {n_centers}")


@dataclass(frozen=True)
class Scenario:
    """Configuration of one simulation study."""

    k: int
    m_mean: int
    n_centers: int = 5
    sigma: float = 0.1
    cardinality_law: str = "deterministic"
    instances: int = 100
    n_starts: int = 10
    seed: int = 0
    algorithm: str = "original"
    penalty: float = 0.25
    order: float = 2.0
    n_slots: int | None = None
    scale: float = 1.0

    def __post_init__(self):
        if self.k < 1 or self.m_mean < 0:
            raise ValueError("k must be >= 1 and m_mean >= 0")
        if self.cardinality_law not in CARDINALITY_LAWS:
            raise ValueError(f"cardinality_law must be one of {CARDINALITY_LAWS}")
        if self.n_centers not in CENTER_COUNTS:
            raise ValueError(f"n_centers must be one of {CENTER_COUNTS}")
        if self.algorithm not in ("original", "improved"):
            raise ValueError("algorithm must be 'original' or 'improved'")
        if self.instances < 0 or self.n_starts < 1:
            raise ValueError("instances must be >= 0 and n_starts >= 1")
        if self.scale <= 0:
            raise ValueError("scale must be positive")

    def params(self) -> Params:
        return Params(penalty=self.penalty * self.scale, order=self.order)

    def space(self) -> EuclideanSpace:
        return EuclideanSpace(2, window=[(0.0, self.scale)] * 2)


def _draw_cardinality(scn: Scenario, rng: np.random.Generator) -> int:
    if scn.cardinality_law == "deterministic":
        return scn.m_mean
    if scn.cardinality_law == "binomial":
        # mean m_mean, variance exactly 1
        return max(0, scn.m_mean - 2 + int(rng.binomial(4, 0.5)))
    return int(rng.poisson(scn.m_mean))


def generate_instance(scn: Scenario, rng: np.random.Generator) -> list[PointPattern]:
    """Draw k patterns from the scenario's Gaussian mixture.

    Each point picks a mixture component uniformly and adds isotropic noise
    of standard deviation sigma; pattern sizes follow the cardinality law.
    """
    centers = mixture_centers(scn.n_centers)
    patterns = []
    for _ in range(scn.k):
        n_j = _draw_cardinality(scn, rng)
        comp = rng.integers(len(centers), size=n_j)
        noise = rng.standard_normal((n_j, 2)) * scn.sigma
        patterns.append(PointPattern((centers[comp] + noise) * scn.scale))
    return patterns


@dataclass
class InstanceRecord:
    """Per-instance outcome of a study."""

    index: int
    deviation: float
    best_objective: float
    objectives: list[float]
    wall_time: float
    original_deviation: float | None = None
    original_objectives: list[float] | None = None
    original_wall_time: float | None = None


@dataclass
class StudyReport:
    scenario: Scenario
    records: list[InstanceRecord] = field(default_factory=list)

    def deviations(self) -> np.ndarray:
        return np.array([r.deviation for r in self.records])

    def summary(self) -> dict:
        devs = self.deviations()
        out = {
            "instances": len(self.records),
            "mean_deviation": float(devs.mean()) if devs.size else float("nan"),
            "q05_deviation": float(np.quantile(devs, 0.05)) if devs.size else float("nan"),
            "q95_deviation": float(np.quantile(devs, 0.95)) if devs.size else float("nan"),
            "total_wall_time": float(sum(r.wall_time for r in self.records)),
        }
        if self.records and self.records[0].original_deviation is not None:
            odevs = np.array([r.original_deviation for r in self.records])
            out["original_mean_deviation"] = float(odevs.mean())
            out["original_total_wall_time"] = float(
                sum(r.original_wall_time for r in self.records)
            )
        return out

    def summary_csv(self) -> str:
        s = self.scenario
        head = ["k", "m_mean", "n_centers", "sigma", "cardinality_law", "algorithm",
                "penalty", "order", "n_starts", "seed"]
        vals = [s.k, s.m_mean, s.n_centers, s.sigma, s.cardinality_law, s.algorithm,
                s.penalty, s.order, s.n_starts, s.seed]
        summ = self.summary()
        head += list(summ)
        vals += list(summ.values())
        return ",".join(map(str, head)) + "\n" + ",".join(map(str, vals)) + "\n"

    def instances_csv(self) -> str:
        lines = ["instance,deviation,best_objective,wall_time,original_deviation"]
        for r in self.records:
            od = "" if r.original_deviation is None else repr(r.original_deviation)
            lines.append(
                f"{r.index},{r.deviation!r},{r.best_objective!r},{r.wall_time!r},{od}"
            )
        return "\n".join(lines) + "\n"


def _run_instance(scn: Scenario, index: int) -> InstanceRecord:
    """One instance: generate data, fit from shared starts, record spreads.

    For the improved algorithm the deviation follows the paired convention:
    the spread of its objectives is measured against the minimum reached by
    the original algorithm from the same starting patterns.
    """
    seq = np.random.SeedSequence((scn.seed, index))
    gen_rng, start_rng, fit_orig_rng, fit_impr_rng = (
        np.random.default_rng(s) for s in seq.spawn(4)
    )
    patterns = generate_instance(scn, gen_rng)
    space = scn.space()
    params = scn.params()
    card = int(round(sum(len(p) for p in patterns) / len(patterns)))
    starts = [PointPattern(space.sample(start_rng, card)) for _ in range(scn.n_starts)]

    t0 = time.perf_counter()
    orig = fit_with_restarts(
        patterns, params, n_starts=scn.n_starts, algorithm="original",
        space=space, starts=starts, n_slots=scn.n_slots, rng=fit_orig_rng,
    )
    t_orig = time.perf_counter() - t0
    if scn.algorithm == "original":
        return InstanceRecord(
            index=index,
            deviation=orig.deviation,
            best_objective=float(orig.objectives.min()),
            objectives=orig.objectives.tolist(),
            wall_time=t_orig,
        )

    t1 = time.perf_counter()
    impr = fit_with_restarts(
        patterns, params, n_starts=scn.n_starts, algorithm="improved",
        space=space, starts=starts, n_slots=scn.n_slots, rng=fit_impr_rng,
    )
    t_impr = time.perf_counter() - t1
    d_min = float(orig.objectives.min())
    d_max_impr = float(impr.objectives.max())
    paired_dev = 0.0 if d_max_impr == d_min else (
        float("inf") if d_min == 0 else (d_max_impr - d_min) / d_min
    )
    return InstanceRecord(
        index=index,
        deviation=paired_dev,
        best_objective=float(impr.objectives.min()),
        objectives=impr.objectives.tolist(),
        wall_time=t_impr,
        original_deviation=orig.deviation,
        original_objectives=orig.objectives.tolist(),
        original_wall_time=t_orig,
    )


def run_study(scn: Scenario, threads: int = 1) -> StudyReport:
    """Fit every instance of the scenario and aggregate deviations.

    Instances are independent; with ``threads`` != 1 they run in a process
    pool, and results are identical to a serial run because each instance
    derives its randomness from (seed, index) alone.
    """
    if threads == 0:
        threads = os.cpu_count() or 1
    report = StudyReport(scenario=scn)
    if scn.instances == 0:
        return report
    indices = list(range(scn.instances))
    if threads == 1:
        records = [_run_instance(scn, i) for i in indices]
    else:
        with ProcessPoolExecutor(max_workers=threads) as pool:
            records = list(pool.map(_run_instance, [scn] * len(indices), indices))
    report.records = records
    return report


def paired_scenario(scn: Scenario, **changes) -> Scenario:
    """Scenario with some fields replaced but the same seed (paired draws)."""
    return replace(scn, **changes)
