"""Command line front end: pattern distances, barycenter fitting and the
simulation study runner.

Exit codes: 0 success, 2 malformed input, 3 unsupported space/order
combination.
"""

from __future__ import annotations

import argparse
import os
import sys
from pathlib import Path

import numpy as np

from . import fileio, harness, metrics, network
from .barycenter import MatchState, fit_with_restarts
from .core import EuclideanSpace, Params, PointPattern, UnsupportedConfigError, is_virtual
from .fileio import FormatError

EXIT_OK = 0
EXIT_BAD_INPUT = 2
EXIT_UNSUPPORTED = 3


def _threads(args) -> int:
    if args.threads is not None:
        return args.threads
    env = os.environ.get("PPBARY_THREADS")
    return int(env) if env else 1


def _load_network(args) -> network.Network:
    if not args.graph:
        raise FormatError("network space requested but no --graph file given")
    try:
        net = network.read_edge_list(args.graph)
        if args.coords:
            network.read_vertex_coords(args.coords, net)
    except ValueError as exc:
        raise FormatError(str(exc)) from exc
    return net


def _read_patterns_euclid(paths) -> list[PointPattern]:
    pats = []
    dim = None
    for path in paths:
        kind, data = fileio.read_pattern_file(path)
        if kind != "euclid":
            raise FormatError(f"{path}: expected coordinate data for a Euclidean run")
        if data.shape[0] and dim is None:
            dim = data.shape[1]
        if data.shape[0] and data.shape[1] != dim:
            raise FormatError(f"{path}: inconsistent coordinate dimension")
        pats.append(data)
    dim = dim or 2
    return [PointPattern(a if a.size else np.zeros((0, dim))) for a in pats]


def _read_patterns_network(paths, net) -> list[list]:
    """Raw network locations per file; planar rows are projected onto edges."""
    out = []
    for path in paths:
        kind, data = fileio.read_pattern_file(path)
        if kind == "network":
            out.append(list(data))
        else:
            if data.shape[0] and data.shape[1] != 2:
                raise FormatError(f"{path}: planar network input needs x,y columns")
            out.append([network.project_to_network(row, net) for row in data])
    return out


def _params(args) -> Params:
    if args.p < 1 or not np.isfinite(args.p):
        raise UnsupportedConfigError(f"order p={args.p} is not supported")
    return Params(penalty=args.C, order=args.p)


def cmd_dist(args) -> int:
    paths = [args.pattern_a, args.pattern_b]
    if args.space == "network":
        net = _load_network(args)
        raw = _read_patterns_network(paths, net)
        space, idx = network.NetworkSpace.for_data(net, raw[0] + raw[1])
        na = len(raw[0])
        pats = [PointPattern(np.asarray(idx[:na], dtype=np.int64)),
                PointPattern(np.asarray(idx[na:], dtype=np.int64))]
    else:
        space = None
        pats = _read_patterns_euclid(paths)

    if args.metric == "spike":
        if args.p != 1:
            raise UnsupportedConfigError("the spike metric is defined for p=1")
        value = metrics.spike_time_distance(
            pats[0], pats[1],
            p_add=args.pa if args.pa is not None else args.C,
            p_delete=args.pd if args.pd is not None else args.C,
            move_scale=args.move_scale,
            space=space,
        )
        print(repr(float(value)))
        return EXIT_OK

    params = _params(args)
    if args.metric == "ospa":
        value = metrics.ospa_distance(pats[0], pats[1], params, space=space)
        print(repr(float(value)))
        return EXIT_OK
    fn = metrics.tt_distance if args.metric == "tt" else metrics.rtt_distance
    res = fn(pats[0], pats[1], params, space=space)
    print(repr(float(res.value)))
    if args.matching:
        print("index_a,index_b")
        for i, j in res.matching:
            print(f"{'' if i is None else i},{'' if j is None else j}")
    return EXIT_OK


def _collect_pattern_paths(inputs) -> list[str]:
    paths = []
    for item in inputs:
        p = Path(item)
        if p.is_dir():
            found = sorted(str(q) for q in p.iterdir() if q.suffix == ".csv")
            if not found:
                raise FormatError(f"{item}: directory contains no .csv pattern files")
            paths.extend(found)
        else:
            paths.append(item)
    if not paths:
        raise FormatError("no pattern files given")
    return paths


def _parse_window(text, dim):
    vals = [float(v) for v in text.split(",")]
    if len(vals) == 2:
        vals = vals * dim
    if len(vals) != 2 * dim:
        raise FormatError(f"--window needs 2 or {2 * dim} comma-separated numbers")
    window = [(vals[2 * i], vals[2 * i + 1]) for i in range(dim)]
    if any(lo >= hi for lo, hi in window):
        raise FormatError("--window bounds must satisfy low < high")
    return window


def cmd_bary(args) -> int:
    paths = _collect_pattern_paths(args.patterns)
    out_dir = Path(args.out_dir)
    out_dir.mkdir(parents=True, exist_ok=True)
    params = _params(args)
    rng = np.random.default_rng(args.seed)

    if args.graph:
        if args.p != 1:
            raise UnsupportedConfigError("network barycenters require p=1")
        net = _load_network(args)
        raw = _read_patterns_network(paths, net)
        flat = [loc for pat in raw for loc in pat]
        space, idx = network.NetworkSpace.for_data(net, flat)
        pats = []
        pos = 0
        for pat in raw:
            pats.append(PointPattern(np.asarray(idx[pos:pos + len(pat)], dtype=np.int64)))
            pos += len(pat)
    else:
        if args.p not in (1, 2):
            raise UnsupportedConfigError("Euclidean barycenters support p in {1, 2}")
        pats = _read_patterns_euclid(paths)
        dim = pats[0].points.shape[1] if pats[0].points.size else 2
        window = _parse_window(args.window, dim) if args.window else None
        space = EuclideanSpace(dim, window=window)

    result = fit_with_restarts(
        pats, params,
        n_starts=args.starts,
        algorithm=args.algo,
        space=space,
        n_slots=args.n_slots,
        rng=rng,
        max_iter=args.max_iter,
        threads=_threads(args),
    )
    best = result.best
    if not best.converged:
        print("warning: iteration cap reached before convergence", file=sys.stderr)

    bary_path = out_dir / "barycenter.csv"
    if args.graph:
        locs = [space.view.location_of(int(r)) for r in best.barycenter.points]
        if args.project_ties and best.state is not None:
            locs = _projected_tie_locations(best, pats, space)
        fileio.write_network_pattern(bary_path, locs, net)
        counts = {}
        for loc in locs:
            counts[loc] = counts.get(loc, 0) + 1
        for loc, count in sorted(counts.items(), key=lambda kv: -kv[1]):
            if count > 1:
                print(f"multipoint count={count} at {loc}")
    else:
        fileio.write_euclid_pattern(bary_path, best.barycenter.points)

    fileio.write_fit_report(out_dir / "report.json", best, extra={
        "algorithm": args.algo,
        "n_starts": args.starts,
        "seed": args.seed,
        "deviation": result.deviation,
        "objectives": result.objectives.tolist(),
    })
    if args.svg:
        _write_bary_svg(out_dir / "overlay.svg", args, pats, best, space,
                        net if args.graph else None)
    print(f"objective={best.objective!r} cardinality={best.barycenter.cardinality} "
          f"iterations={best.iterations} converged={best.converged} "
          f"deviation={result.deviation!r}")
    return EXIT_OK


def _projected_tie_locations(report, patterns, space):
    """Average tied optimal centers per cluster and project back onto edges.

    Several locations frequently realize the same order-1 cluster cost; this
    reports the projection of their coordinate average instead of the
    arbitrary tie the fit kept.
    """
    state = report.state
    locs = []
    for i, z in enumerate(state.centers):
        if is_virtual(z):
            continue
        happy = np.flatnonzero(state.match[i, :] == MatchState.HAPPY)
        if happy.size == 0:
            locs.append(space.view.location_of(int(z)))
            continue
        cluster_rows = [int(patterns[j].points[state.perm[i, j]]) for j in happy]
        locs.append(space.tie_averaged_location(cluster_rows))
    return locs


def _write_bary_svg(path, args, pats, best, space, net):
    if net is not None:
        if net.coords is None:
            return
        edges = [
            (net.coords[int(net.edge_u[e])], net.coords[int(net.edge_v[e])])
            for e in range(net.n_edges)
        ]
        data = [
            np.array([net.point_coords(space.view.location_of(int(r))) for r in pat.points])
            if len(pat) else np.zeros((0, 2))
            for pat in pats
        ]
        bary = np.array([
            net.point_coords(space.view.location_of(int(r))) for r in best.barycenter.points
        ]) if len(best.barycenter) else np.zeros((0, 2))
    else:
        if pats[0].points.size and pats[0].points.shape[1] != 2:
            return
        edges = None
        data = [pat.points for pat in pats]
        bary = best.barycenter.points
    fileio.write_overlay_svg(path, data, bary, edges=edges)


def cmd_sim(args) -> int:
    cfg = fileio.read_scenario_config(args.config)
    scn = _scenario_from_config(cfg)
    report = harness.run_study(scn, threads=_threads(args))
    out_dir = Path(args.out_dir)
    out_dir.mkdir(parents=True, exist_ok=True)
    (out_dir / "summary.csv").write_text(report.summary_csv(), encoding="utf-8")
    (out_dir / "instances.csv").write_text(report.instances_csv(), encoding="utf-8")
    summ = report.summary()
    print(
        f"instances={summ['instances']} mean_deviation={summ['mean_deviation']!r} "
        f"q05={summ['q05_deviation']!r} q95={summ['q95_deviation']!r}"
    )
    return EXIT_OK


_SCENARIO_KEYS = {
    "k": int,
    "m_mean": int,
    "n_centers": int,
    "sigma": float,
    "cardinality_law": str,
    "instances": int,
    "n_starts": int,
    "seed": int,
    "algorithm": str,
    "penalty": float,
    "order": float,
    "n_slots": int,
    "scale": float,
}
_SCENARIO_ALIASES = {"C": "penalty", "p": "order", "m#": "m_mean"}


def _scenario_from_config(cfg: dict) -> harness.Scenario:
    kwargs = {}
    for key, raw in cfg.items():
        key = _SCENARIO_ALIASES.get(key, key)
        if key not in _SCENARIO_KEYS:
            raise FormatError(f"unknown scenario key {key!r}")
        try:
            kwargs[key] = _SCENARIO_KEYS[key](raw)
        except ValueError as exc:
            raise FormatError(f"bad value for {key}: {raw!r}") from exc
    try:
        return harness.Scenario(**kwargs)
    except (TypeError, ValueError) as exc:
        raise FormatError(f"invalid scenario: {exc}") from exc


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="ppbary",
        description="Distances and barycenters for finite point patterns.",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    p_dist = sub.add_parser("dist", help="distance between two pattern files")
    p_dist.add_argument("pattern_a")
    p_dist.add_argument("pattern_b")
    p_dist.add_argument("--metric", choices=["tt", "rtt", "ospa", "spike"], default="tt")
    p_dist.add_argument("--C", type=float, default=1.0, help="unmatched-point penalty")
    p_dist.add_argument("--p", type=float, default=2.0, help="distance order")
    p_dist.add_argument("--pa", type=float, default=None, help="spike add penalty")
    p_dist.add_argument("--pd", type=float, default=None, help="spike delete penalty")
    p_dist.add_argument("--move-scale", type=float, default=1.0)
    p_dist.add_argument("--space", choices=["euclid", "network"], default="euclid")
    p_dist.add_argument("--graph", help="edge list file (u v length per line)")
    p_dist.add_argument("--coords", help="vertex coordinate file (id x y per line)")
    p_dist.add_argument("--matching", action="store_true", help="also print the matching")
    p_dist.add_argument("--threads", type=int, default=None)
    p_dist.set_defaults(func=cmd_dist)

    p_bary = sub.add_parser("bary", help="fit a barycenter pattern")
    p_bary.add_argument("patterns", nargs="+", help="pattern files or a directory")
    p_bary.add_argument("--algo", choices=["original", "improved"], default="original")
    p_bary.add_argument("--starts", type=int, default=10)
    p_bary.add_argument("--n-slots", type=int, default=None)
    p_bary.add_argument("--seed", type=int, default=0)
    p_bary.add_argument("--C", type=float, default=1.0)
    p_bary.add_argument("--p", type=float, default=2.0)
    p_bary.add_argument("--max-iter", type=int, default=200)
    p_bary.add_argument("--window", help="observation window: lo,hi or per-dim bounds")
    p_bary.add_argument("--graph", help="edge list file; switches to network space")
    p_bary.add_argument("--coords", help="vertex coordinate file")
    p_bary.add_argument("--out-dir", default=".")
    p_bary.add_argument("--svg", action="store_true", help="write an overlay plot")
    p_bary.add_argument("--project-ties", action="store_true",
                        help="average tied optimal centers and project onto the graph")
    p_bary.add_argument("--threads", type=int, default=None)
    p_bary.set_defaults(func=cmd_bary)

    p_sim = sub.add_parser("sim", help="run a simulation study from a config file")
    p_sim.add_argument("config")
    p_sim.add_argument("--out-dir", default=".")
    p_sim.add_argument("--threads", type=int, default=None)
    p_sim.set_defaults(func=cmd_sim)
    return parser


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    try:
        return args.func(args)
    except (FormatError, FileNotFoundError, OSError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_BAD_INPUT
    except UnsupportedConfigError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_UNSUPPORTED


if __name__ == "__main__":
    sys.exit(main())
