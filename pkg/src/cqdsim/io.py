"""File formats: config JSON, dataset and sweep CSVs, run metadata, traces, SVG plot."""

from __future__ import annotations

import csv
import io
import json
import math
import platform
from pathlib import Path

import numpy as np

from .collapse import FlipConvention, statistics_from_up_count
from .config import ConfigError, RunConfig
from .experiment import ExperimentDataset, SweepPoint, SweepResult

DATASET_HEADER = ("current_A", "flip_fraction")
SWEEP_HEADER = ("current_A", "flip_fraction", "std_err", "k0")
TRACE_HEADER = ("tau", "abs_f", "re_f", "im_f")


def _fmt(x):
    # repr of a Python float round-trips exactly
    return repr(float(x))


def load_config(path):
    """RunConfig from a config JSON or from a run-metadata JSON (its ``config`` entry)."""
    try:
        data = json.loads(Path(path).read_text(encoding="utf-8"))
    except (OSError, json.JSONDecodeError) as exc:
        raise ConfigError(f"cannot read config {path}: {exc}") from None
    if not isinstance(data, dict):
        raise ConfigError("config JSON must be an object")
    if "config" in data and "software" in data:
        data = data["config"]
    return RunConfig.from_dict(data)


def dump_config(config, path):
    Path(path).write_text(json.dumps(config.to_dict(), indent=2) + "\n", encoding="utf-8")


def parse_dataset(text):
    comments = []
    rows = []
    header_seen = False
    for raw in text.splitlines():
        line = raw.strip()
        if not line:
            continue
        if line.startswith("#"):
            if header_seen:
                raise ValueError("comment lines are only allowed before the header")
            comments.append(line[1:].strip())
            continue
        cells = [c.strip() for c in next(csv.reader([line]))]
        if not header_seen:
            if tuple(cells) != DATASET_HEADER:
                raise ValueError(f"expected header {','.join(DATASET_HEADER)}, got {line!r}")
            header_seen = True
            continue
        if len(cells) != 2:
            raise ValueError(f"bad dataset row {line!r}")
        rows.append((float(cells[0]), float(cells[1])))
    if not header_seen:
        raise ValueError("dataset has no header")
    return ExperimentDataset(
        currents=tuple(r[0] for r in rows),
        fractions=tuple(r[1] for r in rows),
        comments=tuple(comments),
    )


def load_dataset(path):
    return parse_dataset(Path(path).read_text(encoding="utf-8"))


def format_dataset(dataset):
    out = io.StringIO()
    for c in dataset.comments:
        out.write(f"# {c}\n")
    out.write(",".join(DATASET_HEADER) + "\n")
    for cur, frac in zip(dataset.currents, dataset.fractions):
        out.write(f"{_fmt(cur)},{_fmt(frac)}\n")
    return out.getvalue()


def format_sweep_csv(result):
    out = io.StringIO()
    out.write(",".join(SWEEP_HEADER) + "\n")
    for p in result.points:
        out.write(",".join(_fmt(x) for x in (p.current, p.stats.fraction, p.stats.std_err, p.k0)) + "\n")
    return out.getvalue()


def read_sweep_csv(path):
    with open(path, newline="", encoding="utf-8") as fh:
        rows = list(csv.DictReader(fh))
    return {k: np.array([float(r[k]) for r in rows]) for k in SWEEP_HEADER}


def run_metadata(result, wall_time, threads):
    from . import __version__

    import numba
    import scipy

    return {
        "config": result.config.to_dict(),
        "seed": result.config.seed,
        "r_squared": result.r_squared,
        "wall_time_s": wall_time,
        "threads": threads,
        "points": [
            {
                "current_A": p.current,
                "n_total": p.stats.n_total,
                "n_flip": p.stats.n_flip,
                "k0": p.k0,
                "skipped_samples": list(p.skipped),
                "chunk_tallies": [list(t) for t in p.chunk_tallies],
            }
            for p in result.points
        ],
        "software": {
            "cqdsim": __version__,
            "python": platform.python_version(),
            "numpy": np.__version__,
            "scipy": scipy.__version__,
            "numba": numba.__version__,
        },
    }


def load_run(path):
    """SweepResult rebuilt from a run.json written by ``cqdsim sweep``."""
    meta = json.loads(Path(path).read_text(encoding="utf-8"))
    config = RunConfig.from_dict(meta["config"])
    points = tuple(
        SweepPoint(
            current=p["current_A"],
            stats=statistics_from_up_count(
                p["n_flip"] if config.flip_convention is FlipConvention.COLLAPSE_UP_IS_FLIP else p["n_total"] - p["n_flip"],
                p["n_total"],
                config.flip_convention,
            ),
            k0=p["k0"],
            skipped=tuple(p["skipped_samples"]),
            chunk_tallies=tuple(tuple(t) for t in p["chunk_tallies"]),
        )
        for p in meta["points"]
    )
    return SweepResult(points=points, config=config, r_squared=meta.get("r_squared"))


def format_trace_csv(solution):
    out = io.StringIO()
    out.write(",".join(TRACE_HEADER) + "\n")
    for row in solution.trace_rows():
        out.write(",".join(_fmt(x) for x in row) + "\n")
    return out.getvalue()


def render_svg(result, dataset=None, width=640, height=420):
    """Flip fraction vs current on a log current axis, as a standalone SVG string."""
    left, right, top, bottom = 70, 20, 30, 60
    pw, ph = width - left - right, height - top - bottom
    currents = list(result.currents)
    if dataset is not None:
        currents += list(dataset.currents)
    lo = math.floor(math.log10(min(currents)))
    hi = math.ceil(math.log10(max(currents)))
    if hi == lo:
        hi = lo + 1

    def sx(c):
        return left + pw * (math.log10(c) - lo) / (hi - lo)

    def sy(y):
        return top + ph * (1.0 - y)

    parts = [
        f'<svg xmlns="http://www.w3.org/2000/svg" width="{width}" height="{height}" '
        f'viewBox="0 0 {width} {height}" font-family="sans-serif" font-size="12">',
        f'<rect x="{left}" y="{top}" width="{pw}" height="{ph}" fill="none" stroke="black"/>',
    ]
    for dec in range(lo, hi + 1):
        for m in range(1, 10):
            c = m * 10.0**dec
            if c > 10.0**hi:
                break
            x = sx(c)
            tick = 6 if m == 1 else 3
            parts.append(f'<line x1="{x:.2f}" y1="{top + ph}" x2="{x:.2f}" y2="{top + ph - tick}" stroke="black"/>')
            if m == 1:
                parts.append(f'<text x="{x:.2f}" y="{top + ph + 18}" text-anchor="middle">{c:g}</text>')
    for pct in range(0, 101, 20):
        y = sy(pct / 100)
        parts.append(f'<line x1="{left}" y1="{y:.2f}" x2="{left + 6}" y2="{y:.2f}" stroke="black"/>')
        parts.append(f'<text x="{left - 8}" y="{y + 4:.2f}" text-anchor="end">{pct}</text>')
    parts.append(f'<text x="{left + pw / 2}" y="{height - 15}" text-anchor="middle">wire current (A)</text>')
    parts.append(
        f'<text transform="translate(18,{top + ph / 2}) rotate(-90)" text-anchor="middle">spin flip (%)</text>'
    )
    pts = " ".join(f"{sx(c):.2f},{sy(w):.2f}" for c, w in zip(result.currents, result.fractions))
    parts.append(f'<polyline points="{pts}" fill="none" stroke="#1f4e9c" stroke-width="1.5"/>')
    for c, w, e in zip(result.currents, result.fractions, result.std_errs):
        x = sx(c)
        parts.append(f'<line x1="{x:.2f}" y1="{sy(w - e):.2f}" x2="{x:.2f}" y2="{sy(w + e):.2f}" stroke="#1f4e9c"/>')
        parts.append(f'<circle cx="{x:.2f}" cy="{sy(w):.2f}" r="3.5" fill="white" stroke="#1f4e9c"/>')
    label = f"simulation ({result.config.distribution.value}, N={result.config.n_samples})"
    parts.append(f'<text x="{left + 10}" y="{top + 18}" fill="#1f4e9c">{label}</text>')
    if dataset is not None:
        for c, w in zip(dataset.currents, dataset.fractions):
            parts.append(f'<rect x="{sx(c) - 3.5:.2f}" y="{sy(w) - 3.5:.2f}" width="7" height="7" fill="#b22222"/>')
        text = "experiment"
        if result.r_squared is not None:
            text += f"   R² = {result.r_squared:.3f}"
        parts.append(f'<text x="{left + 10}" y="{top + 34}" fill="#b22222">{text}</text>')
    parts.append("</svg>")
    return "\n".join(parts) + "\n"
