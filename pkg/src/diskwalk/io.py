"""Trajectory files and SVG point clouds.

CSV and JSONL share one schema (:data:`~diskwalk.walk.RECORD_FIELDS`);
floats are written with ``repr``, the shortest decimal that round-trips, so
``read_trajectory(write_trajectory(r))`` reproduces ``r`` exactly and the
bytes depend only on the values.
"""

from __future__ import annotations

import json
import math
from pathlib import Path
from xml.sax.saxutils import escape

from .errors import DiskwalkError
from .walk import RECORD_FIELDS, RecordBlock, TrajectoryRecord

_FLOAT_FIELDS = RECORD_FIELDS[2:7] + RECORD_FIELDS[8:]


class TrajectoryIOError(DiskwalkError, OSError):
    """Writing stopped early; ``written`` records reached the file."""

    def __init__(self, message, written):
        super().__init__(message)
        self.written = written


def _fmt(v: float) -> str:
    return repr(float(v))


def _rows(records):
    """Yield raw tuples in schema order, using columnar access for blocks."""
    blocks = getattr(records, "blocks", None)
    if isinstance(records, RecordBlock):
        blocks = [records]
    if blocks is not None:
        for b in blocks:
            cols = [b.n.tolist(), b.omega.tolist(), b.varsigma.tolist(), b.tau.tolist(),
                    b.x.tolist(), b.y.tolist(), b.saturated.tolist(), b.busemann_plus.tolist(),
                    b.busemann_minus.tolist(), b.dist_p.tolist()]
            for row in zip(*cols):
                yield (b.traj,) + row
    else:
        for r in records:
            yield tuple(r)


def _csv_line(row) -> str:
    t, n, om, vs, tau, x, y, sat, bp, bm, d = row
    return ",".join((str(int(t)), str(int(n)), _fmt(om), _fmt(vs), _fmt(tau), _fmt(x), _fmt(y),
                     "1" if sat else "0", _fmt(bp), _fmt(bm), _fmt(d)))


def _json_line(row) -> str:
    rec = dict(zip(RECORD_FIELDS, row))
    rec["traj"], rec["n"], rec["saturated"] = int(rec["traj"]), int(rec["n"]), bool(rec["saturated"])
    for k in _FLOAT_FIELDS:
        v = float(rec[k])
        # JSON has no infinities; keep them as strings that float() parses
        rec[k] = v if math.isfinite(v) else repr(v)
    return json.dumps(rec, separators=(",", ":"))


def write_trajectory(records, path, format: str = "csv") -> int:
    """Write records to ``path``; returns the number of records written.

    Raises
    ------
    TrajectoryIOError
        On an IO failure, carrying the count written so far.
    """
    if format not in ("csv", "jsonl"):
        raise ValueError(f"format must be 'csv' or 'jsonl', got {format!r}")
    line = _csv_line if format == "csv" else _json_line
    count = 0
    try:
        with open(path, "w", encoding="utf-8", newline="\n") as fh:
            if format == "csv":
                fh.write(",".join(RECORD_FIELDS) + "\n")
            buf = []
            for row in _rows(records):
                buf.append(line(row))
                if len(buf) >= 65536:
                    fh.write("\n".join(buf) + "\n")
                    count += len(buf)
                    buf = []
            if buf:
                fh.write("\n".join(buf) + "\n")
                count += len(buf)
    except OSError as exc:
        raise TrajectoryIOError(f"writing {path}: {exc}", count) from exc
    return count


def _parse(rec: dict) -> TrajectoryRecord:
    sat = rec["saturated"]
    if isinstance(sat, str):
        sat = sat.strip() not in ("0", "false", "False", "")
    return TrajectoryRecord(int(rec["traj"]), int(rec["n"]),
                            *(float(rec[k]) for k in RECORD_FIELDS[2:7]), bool(sat),
                            *(float(rec[k]) for k in RECORD_FIELDS[8:]))


def read_trajectory(path, format: str | None = None) -> list[TrajectoryRecord]:
    """Read a CSV or JSONL trajectory file (format inferred from the suffix)."""
    path = Path(path)
    if format is None:
        format = "jsonl" if path.suffix in (".jsonl", ".json") else "csv"
    out = []
    with open(path, encoding="utf-8") as fh:
        if format == "csv":
            header = fh.readline().strip().split(",")
            if tuple(header) != RECORD_FIELDS:
                raise ValueError(f"unexpected CSV header {header!r}")
            for ln in fh:
                if ln.strip():
                    out.append(_parse(dict(zip(RECORD_FIELDS, ln.strip().split(",")))))
        else:
            for ln in fh:
                if ln.strip():
                    out.append(_parse(json.loads(ln)))
    return out


# -- SVG ---------------------------------------------------------------------

VIEW = 1.05
SIZE = 600


def _px(v: float) -> str:
    return f"{(v + VIEW) / (2 * VIEW) * SIZE:.2f}"


def _py(v: float) -> str:
    return f"{(VIEW - v) / (2 * VIEW) * SIZE:.2f}"


def render_pointcloud(records, path, style: dict | None = None, alpha: complex = 1 + 0j) -> dict:
    """Write an SVG point cloud of the records.

    The viewport is ``[-1.05, 1.05]^2``.  Non-saturated records are dots;
    saturated records are counted and drawn as one ring on the pole they
    reached.  Output depends only on the records and ``style``.

    Returns a summary ``{"points", "saturated_plus", "saturated_minus"}``.
    """
    st = {"dot_radius": 1.2, "dot_color": "#1f4e9a", "dot_opacity": 0.35,
          "sat_color": "#c0392b", "title": "diskwalk point cloud"}
    st.update(style or {})
    alpha = complex(alpha)
    dots, sat_plus, sat_minus = [], 0, 0
    for row in _rows(records):
        x, y, sat = row[5], row[6], row[7]
        if sat:
            if (complex(x, y) * alpha.conjugate()).real > 0:
                sat_plus += 1
            else:
                sat_minus += 1
        else:
            dots.append(f'<circle cx="{_px(x)}" cy="{_py(y)}" r="{st["dot_radius"]}"/>')

    c0, r0 = _px(0.0), f"{SIZE / (2 * VIEW):.2f}"
    parts = [
        '<?xml version="1.0" encoding="UTF-8" standalone="no"?>',
        f'<svg xmlns="http://www.w3.org/2000/svg" version="1.1" width="{SIZE}" height="{SIZE}" '
        f'viewBox="0 0 {SIZE} {SIZE}">',
        f"<title>{escape(str(st['title']))}</title>",
        f'<rect width="{SIZE}" height="{SIZE}" fill="white"/>',
        f'<circle cx="{c0}" cy="{c0}" r="{r0}" fill="none" stroke="black" stroke-width="1"/>',
        f'<g fill="{st["dot_color"]}" fill-opacity="{st["dot_opacity"]}" stroke="none">',
        *dots,
        "</g>",
    ]
    for sign, label, count in ((1, "+alpha", sat_plus), (-1, "-alpha", sat_minus)):
        p = sign * alpha
        cx, cy = _px(p.real), _py(p.imag)
        parts.append(f'<rect class="pole" x="{float(cx) - 4:.2f}" y="{float(cy) - 4:.2f}" '
                     f'width="8" height="8" fill="black"/>')
        tx = float(cx) + (-48 if p.real > 0 else 8)
        parts.append(f'<text x="{tx:.2f}" y="{float(cy) - 8:.2f}" font-size="12">{escape(label)}</text>')
        if count:
            rad = 6 + 2 * math.log10(count + 1)
            parts.append(f'<circle class="saturated" cx="{cx}" cy="{cy}" r="{rad:.2f}" fill="none" '
                         f'stroke="{st["sat_color"]}" stroke-width="2"/>')
            parts.append(f'<text x="{tx:.2f}" y="{float(cy) + 20:.2f}" font-size="11" '
                         f'fill="{st["sat_color"]}">{count} saturated</text>')
    if not dots and (sat_plus or sat_minus):
        parts.append(f'<text class="warning" x="10" y="20" font-size="14" fill="{st["sat_color"]}">'
                     "warning: every point is saturated at a pole</text>")
    parts.append("</svg>")
    Path(path).write_text("\n".join(parts) + "\n", encoding="utf-8")
    return {"points": len(dots), "saturated_plus": sat_plus, "saturated_minus": sat_minus}
