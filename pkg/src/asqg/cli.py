"""Command-line client.

Each experiment is a subcommand. By default requests go to an in-process
instance of the service; ``--server URL`` sends them to a running one.
Reports land in ``--out`` as CSV and SVG, named by experiment and config hash.

Exit codes: 0 success, 2 configuration error, 3 numerical failure.
"""

from __future__ import annotations

import argparse
import sys
import warnings
from pathlib import Path
from typing import Optional, Sequence

import httpx

from . import __version__
from .experiments.config import DEFAULTS, EXPERIMENTS, SCHEMA, format_value
from .experiments.report import ExperimentReport, PlotSpec, emit_report
from .service.schemas import decode_value

EXIT_OK, EXIT_CONFIG, EXIT_NUMERICAL = 0, 2, 3


def _client(server: Optional[str]) -> httpx.Client:
    if server:
        return httpx.Client(base_url=server, timeout=None)
    with warnings.catch_warnings():
        warnings.simplefilter("ignore")
        from fastapi.testclient import TestClient

    from .service.app import app

    return TestClient(app, raise_server_exceptions=False)


def _overrides(items: Sequence[str], grid_n: Optional[int]) -> dict[str, str]:
    out = {}
    for item in items:
        if "=" not in item:
            raise ValueError(f"--override expects key=value, got {item!r}")
        key, value = (s.strip() for s in item.split("=", 1))
        out[key] = value
    if grid_n is not None:
        out["grid_n"] = str(grid_n)
    return out


def _report(body: dict) -> ExperimentReport:
    plot = PlotSpec(**body["plot"]) if body.get("plot") else None
    rows = [{k: decode_value(v) for k, v in row.items()} for row in body["rows"]]
    summary = {k: decode_value(v) for k, v in body["summary"].items()}
    return ExperimentReport(body["experiment"], body["config_hash"], body["columns"], rows, body["parameters"],
                            summary, body["wall_time"], plot, body["version"])


def _print_table(report: ExperimentReport, out):
    widths = {c: max(len(c), *(len(f"{r[c]:.10g}" if isinstance(r[c], float) else str(r[c])) for r in report.rows))
              for c in report.columns} if report.rows else {c: len(c) for c in report.columns}
    out.write("  ".join(c.rjust(widths[c]) for c in report.columns) + "\n")
    for r in report.rows:
        cells = [(f"{r[c]:.10g}" if isinstance(r[c], float) else str(r[c])).rjust(widths[c]) for c in report.columns]
        out.write("  ".join(cells) + "\n")


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="asqg", description=__doc__.split("\n\n")[0])
    parser.add_argument("--version", action="version", version=__version__)
    sub = parser.add_subparsers(dest="command", required=True)
    for name in EXPERIMENTS:
        p = sub.add_parser(name, help=f"run the {name} experiment")
        p.add_argument("--config", type=Path, help="flat key = value config file")
        p.add_argument("--out", type=Path, default=Path("results"), help="output directory (default: results)")
        p.add_argument("--grid-n", type=int, help="override grid_n")
        p.add_argument("--override", action="append", default=[], metavar="KEY=VALUE")
        p.add_argument("--format", choices=("csv", "svg", "both"), default="both", help="report files to write")
        p.add_argument("--server", help="base URL of a running service")
    keys = sub.add_parser("keys", help="list configuration keys and per-experiment defaults")
    keys.add_argument("experiment", nargs="?", choices=EXPERIMENTS)
    serve = sub.add_parser("serve", help="run the HTTP service (needs uvicorn)")
    serve.add_argument("--host", default="127.0.0.1")
    serve.add_argument("--port", type=int, default=8000)
    return parser


def _keys(experiment: Optional[str], out):
    names = [experiment] if experiment else list(EXPERIMENTS)
    for name in names:
        out.write(f"[{name}]\n")
        for key, value in DEFAULTS[name].items():
            out.write(f"  {key} = {format_value(value)}    # {SCHEMA[key][1]}\n")


def main(argv: Optional[Sequence[str]] = None) -> int:
    args = build_parser().parse_args(argv)
    if args.command == "keys":
        _keys(args.experiment, sys.stdout)
        return EXIT_OK
    if args.command == "serve":
        try:
            import uvicorn
        except ImportError:
            sys.stderr.write("serving needs uvicorn: pip install 'artifact[serve]'\n")
            return EXIT_CONFIG
        uvicorn.run("asqg.service.app:app", host=args.host, port=args.port)
        return EXIT_OK

    try:
        overrides = _overrides(args.override, args.grid_n)
        config_text = args.config.read_text() if args.config else None
    except (ValueError, OSError) as exc:
        sys.stderr.write(f"config error: {exc}\n")
        return EXIT_CONFIG
    with _client(args.server) as client:
        try:
            response = client.post(f"/experiments/{args.command}",
                                   json={"config_text": config_text, "overrides": overrides})
        except httpx.HTTPError as exc:
            sys.stderr.write(f"cannot reach service: {exc}\n")
            return EXIT_NUMERICAL
    if response.status_code != 200:
        try:
            body = response.json()
            kind, message = body.get("kind"), f"{body.get('error')}: {body.get('detail')}"
        except ValueError:
            kind, message = None, response.text
        if response.status_code == 422 and kind is None:
            kind = "config"
        sys.stderr.write(f"{kind or 'numerical'} error: {message}\n")
        return EXIT_CONFIG if kind == "config" else EXIT_NUMERICAL
    report = _report(response.json())
    try:
        fmts = ("csv", "svg") if args.format == "both" else (args.format,)
        paths = [emit_report(report, args.out, fmt) for fmt in fmts]
    except OSError as exc:
        sys.stderr.write(f"cannot write report: {exc}\n")
        return EXIT_CONFIG
    if args.command == "constants":
        _print_table(report, sys.stdout)
    for key, value in report.summary.items():
        sys.stdout.write(f"{key} = {value}\n")
    for path in paths:
        sys.stdout.write(f"wrote {path}\n")
    return EXIT_OK


if __name__ == "__main__":
    sys.exit(main())
