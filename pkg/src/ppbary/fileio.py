"""Reading and writing point pattern files, fit reports and the static SVG
overlay plots used by the command line front end.

Pattern files are small CSVs with a header: coordinate columns ("x,y", any
dimension) for Euclidean data, or "edge_id,offset" for locations along
network edges (planar "x,y" rows are accepted for networks too and projected
onto the graph by the caller).
"""

from __future__ import annotations

import json
from collections import Counter

import numpy as np

from .core import PointPattern
from .network import EdgePoint, Network


class FormatError(ValueError):
    """Malformed pattern, graph or config file."""


def _coord_header(dim: int) -> list[str]:
    if dim <= 3:
        return ["x", "y", "z"][:dim]
    return [f"x{i}" for i in range(dim)]


def read_pattern_file(path):
    """Parse a pattern CSV; returns ("euclid", array) or ("network", points).

    Network points come back as EdgePoint values in file order.
    """
    with open(path, encoding="utf-8") as fh:
        lines = [ln.strip() for ln in fh if ln.strip()]
    if not lines:
        raise FormatError(f"{path}: empty pattern file (missing header)")
    header = [h.strip().lower() for h in lines[0].split(",")]
    rows = []
    for lineno, line in enumerate(lines[1:], 2):
        parts = [p.strip() for p in line.split(",")]
        if len(parts) != len(header):
            raise FormatError(f"{path}:{lineno}: expected {len(header)} fields")
        try:
            rows.append([float(p) for p in parts])
        except ValueError as exc:
            raise FormatError(f"{path}:{lineno}: non-numeric value") from exc
    if header == ["edge_id", "offset"]:
        points = []
        for lineno, (e, off) in enumerate(rows, 2):
            if e != int(e):
                raise FormatError(f"{path}:{lineno}: edge_id must be an integer")
            points.append(EdgePoint(edge=int(e), offset=off))
        return "network", points
    if header == _coord_header(len(header)):
        arr = np.asarray(rows, dtype=float).reshape(len(rows), len(header))
        if not np.all(np.isfinite(arr)):
            raise FormatError(f"{path}: coordinates must be finite")
        return "euclid", arr
    raise FormatError(
        f"{path}: unrecognized header {','.join(header)!r}; "
        "expected coordinate columns or edge_id,offset"
    )


def write_euclid_pattern(path, points: np.ndarray):
    pts = np.asarray(points, dtype=float)
    if pts.ndim == 1:
        pts = pts.reshape(0, 2) if pts.size == 0 else pts[:, None]
    dim = pts.shape[1] if pts.size else 2
    with open(path, "w", encoding="utf-8") as fh:
        fh.write(",".join(_coord_header(dim)) + "\n")
        for row in pts:
            fh.write(",".join(repr(float(v)) for v in row) + "\n")


def write_network_pattern(path, locations, net: Network):
    """Write network locations as edge_id,offset rows (vertices use an
    incident edge at offset 0 or full length)."""
    with open(path, "w", encoding="utf-8") as fh:
        fh.write("edge_id,offset\n")
        for loc in locations:
            if isinstance(loc, EdgePoint):
                fh.write(f"{loc.edge},{loc.offset!r}\n")
            else:
                v = int(loc)
                hits = np.flatnonzero(net.edge_u == v)
                if hits.size:
                    fh.write(f"{hits[0]},0.0\n")
                else:
                    e = int(np.flatnonzero(net.edge_v == v)[0])
                    fh.write(f"{e},{net.edge_len[e]!r}\n")


def write_fit_report(path, report, extra=None):
    payload = {
        "objective": report.objective,
        "iterations": report.iterations,
        "converged": report.converged,
        "n_slots": report.n_slots,
        "cardinality": report.barycenter.cardinality,
        "trace": report.trace,
        "trace_certified": report.trace_certified,
    }
    if extra:
        payload.update(extra)
    with open(path, "w", encoding="utf-8") as fh:
        json.dump(payload, fh, indent=2)
        fh.write("\n")


# -- SVG overlay ------------------------------------------------------------

_DATA_GREYS = ["#555555", "#888888", "#333333", "#777777", "#999999", "#444444"]


def _svg_frame(xs, ys, pad_frac=0.05, size=640):
    xs = np.asarray(xs, dtype=float)
    ys = np.asarray(ys, dtype=float)
    if xs.size == 0:
        lo = np.array([0.0, 0.0])
        hi = np.array([1.0, 1.0])
    else:
        lo = np.array([xs.min(), ys.min()])
        hi = np.array([xs.max(), ys.max()])
    span = np.maximum(hi - lo, 1e-9)
    pad = pad_frac * span.max()
    lo, hi = lo - pad, hi + pad
    scale = size / (hi - lo).max()

    def to_px(x, y):
        return (x - lo[0]) * scale, (hi[1] - y) * scale  # y axis points up

    w = (hi[0] - lo[0]) * scale
    h = (hi[1] - lo[1]) * scale
    return to_px, w, h, scale


def write_overlay_svg(path, data_patterns, barycenter_coords, edges=None, radius=3.5):
    """Static plot: data points in greys, barycenter in blue, multiplicity
    counts (points sharing a location) in purple."""
    all_x, all_y = [], []
    for pts in data_patterns:
        arr = np.asarray(pts, dtype=float).reshape(-1, 2)
        all_x.extend(arr[:, 0])
        all_y.extend(arr[:, 1])
    bary = np.asarray(barycenter_coords, dtype=float).reshape(-1, 2)
    all_x.extend(bary[:, 0])
    all_y.extend(bary[:, 1])
    if edges:
        for (ax, ay), (bx, by) in edges:
            all_x.extend([ax, bx])
            all_y.extend([ay, by])
    to_px, w, h, _ = _svg_frame(all_x, all_y)

    parts = [
        f'<svg xmlns="http://www.w3.org/2000/svg" width="{w:.0f}" height="{h:.0f}" '
        f'viewBox="0 0 {w:.2f} {h:.2f}">',
        f'<rect width="{w:.2f}" height="{h:.2f}" fill="white"/>',
    ]
    if edges:
        for (ax, ay), (bx, by) in edges:
            x1, y1 = to_px(ax, ay)
            x2, y2 = to_px(bx, by)
            parts.append(
                f'<line x1="{x1:.2f}" y1="{y1:.2f}" x2="{x2:.2f}" y2="{y2:.2f}" '
                'stroke="#cccccc" stroke-width="1.5"/>'
            )
    for idx, pts in enumerate(data_patterns):
        colour = _DATA_GREYS[idx % len(_DATA_GREYS)]
        for x, y in np.asarray(pts, dtype=float).reshape(-1, 2):
            px, py = to_px(x, y)
            parts.append(
                f'<circle cx="{px:.2f}" cy="{py:.2f}" r="{radius:.1f}" '
                f'fill="{colour}" fill-opacity="0.6"/>'
            )
    counts = Counter((round(x, 9), round(y, 9)) for x, y in bary)
    for (x, y), count in counts.items():
        px, py = to_px(x, y)
        colour = "#7b2cbf" if count > 1 else "#1f6fd6"
        parts.append(
            f'<circle cx="{px:.2f}" cy="{py:.2f}" r="{radius * 1.6:.1f}" fill="none" '
            f'stroke="{colour}" stroke-width="2.5"/>'
        )
        if count > 1:
            parts.append(
                f'<text x="{px + radius * 2:.2f}" y="{py - radius:.2f}" '
                f'font-size="12" fill="{colour}">{count}</text>'
            )
    parts.append("</svg>")
    with open(path, "w", encoding="utf-8") as fh:
        fh.write("\n".join(parts) + "\n")


def read_scenario_config(path) -> dict:
    """Parse a key=value scenario config, one pair per line.

    Lines starting with '#' are comments; keys may contain '#' (the mean
    cardinality is spelled "m#" or "m_mean").
    """
    out: dict = {}
    with open(path, encoding="utf-8") as fh:
        for lineno, line in enumerate(fh, 1):
            line = line.strip()
            if not line or line.startswith("#"):
                continue
            if "=" not in line:
                raise FormatError(f"{path}:{lineno}: expected key = value")
            key, val = (s.strip() for s in line.split("=", 1))
            out[key] = val
    return out


def pattern_roundtrip_equal(a: PointPattern, b: PointPattern) -> bool:
    return a == b
