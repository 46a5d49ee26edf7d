"""Experiment reports and their CSV / SVG renderings."""

from __future__ import annotations

import csv
import io
import math
from dataclasses import dataclass, field
from pathlib import Path
from typing import Any, Literal, Optional

from .. import __version__
from ..errors import IOFailure

TIMESTAMP_KEY = "wall_time"


@dataclass
class PlotSpec:
    x: str
    y: list[str]
    group: Optional[str] = None
    loglog: bool = False
    title: str = ""


@dataclass
class ExperimentReport:
    experiment: str
    config_hash: str
    columns: list[str]
    rows: list[dict]
    parameters: dict[str, str] = field(default_factory=dict)
    summary: dict[str, Any] = field(default_factory=dict)
    wall_time: float = 0.0
    plot: Optional[PlotSpec] = None
    version: str = __version__

    def __post_init__(self):
        for i, row in enumerate(self.rows):
            missing = set(self.columns) - set(row)
            if missing:
                raise ValueError(f"row {i} lacks columns {sorted(missing)}")

    def column(self, name: str) -> list:
        return [row[name] for row in self.rows]

    def where(self, **match) -> list[dict]:
        return [row for row in self.rows if all(row[k] == v for k, v in match.items())]


def _cell(value) -> str:
    if isinstance(value, bool):
        return "true" if value else "false"
    if isinstance(value, float):
        return repr(value)
    return str(value)


def _parse_cell(text: str):
    if text in ("true", "false"):
        return text == "true"
    try:
        return int(text)
    except ValueError:
        pass
    try:
        return float(text)
    except ValueError:
        return text


def to_csv_text(report: ExperimentReport) -> str:
    """Comment header (experiment, version, hash, parameters, summary, wall time), then the table."""
    buf = io.StringIO()
    buf.write(f"# experiment: {report.experiment}\n")
    buf.write(f"# version: {report.version}\n")
    buf.write(f"# config_hash: {report.config_hash}\n")
    for key, value in report.parameters.items():
        buf.write(f"# param {key} = {value}\n")
    for key, value in report.summary.items():
        buf.write(f"# summary {key} = {_cell(value)}\n")
    buf.write(f"# {TIMESTAMP_KEY}: {report.wall_time:.3f}\n")
    writer = csv.writer(buf, lineterminator="\n")
    writer.writerow(report.columns)
    for row in report.rows:
        writer.writerow([_cell(row[c]) for c in report.columns])
    return buf.getvalue()


def read_csv(source) -> tuple[dict, list[str], list[dict]]:
    """Returns (metadata, columns, rows) from an emitted CSV file or its text."""
    text = Path(source).read_text() if isinstance(source, Path) else source
    meta: dict[str, Any] = {"parameters": {}, "summary": {}}
    body = []
    for line in text.splitlines():
        if line.startswith("# param "):
            key, value = line[len("# param "):].split(" = ", 1)
            meta["parameters"][key] = value
        elif line.startswith("# summary "):
            key, value = line[len("# summary "):].split(" = ", 1)
            meta["summary"][key] = _parse_cell(value)
        elif line.startswith("# "):
            key, value = line[2:].split(": ", 1)
            meta[key] = value
        else:
            body.append(line)
    rows = list(csv.reader(body))
    if not rows:
        return meta, [], []
    columns = rows[0]
    return meta, columns, [dict(zip(columns, (_parse_cell(c) for c in r))) for r in rows[1:]]


def _svg(report: ExperimentReport) -> str:
    import matplotlib

    matplotlib.use("Agg")
    import matplotlib.pyplot as plt

    spec = report.plot or PlotSpec(x=report.columns[0], y=[c for c in report.columns[1:2]])
    with matplotlib.rc_context({"svg.hashsalt": report.config_hash, "svg.fonttype": "none"}):
        fig, ax = plt.subplots(figsize=(6.4, 4.2))
        groups = sorted({row[spec.group] for row in report.rows}) if spec.group else [None]
        for g in groups:
            rows = [r for r in report.rows if spec.group is None or r[spec.group] == g]
            for y in spec.y:
                pts = [(r[spec.x], r[y]) for r in rows
                       if isinstance(r[y], (int, float)) and math.isfinite(r[y]) and (not spec.loglog or r[y] > 0)]
                if not pts:
                    continue
                label = y if g is None else f"{y} ({spec.group}={g})"
                ax.plot([p[0] for p in pts], [p[1] for p in pts], marker="o", ms=3, label=label)
        if spec.loglog:
            ax.set_xscale("log")
            ax.set_yscale("log")
        ax.set_xlabel(spec.x)
        ax.set_title(spec.title or report.experiment)
        if ax.lines:
            ax.legend(fontsize=7)
        buf = io.StringIO()
        fig.savefig(buf, format="svg", metadata={"Date": None, "Creator": None,
                                                  "Description": f"config_hash={report.config_hash}"})
        plt.close(fig)
    return buf.getvalue()


def emit_report(report: ExperimentReport, out_dir: Path, fmt: Literal["csv", "svg"] = "csv") -> Path:
    out_dir = Path(out_dir)
    try:
        out_dir.mkdir(parents=True, exist_ok=True)
        path = out_dir / f"{report.experiment}_{report.config_hash}.{fmt}"
        if fmt == "csv":
            path.write_text(to_csv_text(report))
        elif fmt == "svg":
            path.write_text(_svg(report))
        else:
            raise ValueError(f"unknown format {fmt!r}")
    except OSError as exc:
        raise IOFailure(f"cannot write report to {out_dir}: {exc}") from exc
    return path
