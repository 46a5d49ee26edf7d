"""HTTP front end for the experiment drivers."""

from __future__ import annotations

from fastapi import FastAPI, Request
from fastapi.responses import JSONResponse

from .. import __version__
from ..errors import AsqgError, BoxTooSmall, ConfigError, InvalidGeometry, InvalidRegime, UnderResolved
from ..experiments.config import DEFAULTS, ExperimentConfig, parse_text
from ..experiments.report import ExperimentReport
from ..experiments.runners import run_experiment
from .schemas import ErrorModel, ExperimentInfo, Health, ReportModel, RunRequest, encode_value

CONFIG_ERRORS = (ConfigError, InvalidRegime, InvalidGeometry, UnderResolved, BoxTooSmall)


def error_kind(exc: Exception) -> str:
    return "config" if isinstance(exc, CONFIG_ERRORS) else "numerical"


def report_model(report: ExperimentReport) -> ReportModel:
    plot = None
    if report.plot is not None:
        plot = {"x": report.plot.x, "y": report.plot.y, "group": report.plot.group, "loglog": report.plot.loglog,
                "title": report.plot.title}
    return ReportModel(
        experiment=report.experiment, config_hash=report.config_hash, version=report.version,
        columns=report.columns,
        rows=[{k: encode_value(v) for k, v in row.items()} for row in report.rows],
        parameters=report.parameters, summary={k: encode_value(v) for k, v in report.summary.items()},
        wall_time=report.wall_time, plot=plot,
    )


def create_app() -> FastAPI:
    app = FastAPI(title="asqg", version=__version__)

    @app.exception_handler(AsqgError)
    async def asqg_error(request: Request, exc: AsqgError):
        kind = error_kind(exc)
        body = ErrorModel(kind=kind, error=type(exc).__name__, detail=str(exc))
        return JSONResponse(status_code=422 if kind == "config" else 500, content=body.model_dump())

    @app.get("/health", response_model=Health)
    def health():
        return Health(status="ok", version=__version__)

    @app.get("/experiments", response_model=list[ExperimentInfo])
    def experiments():
        return [ExperimentInfo(name=name, defaults={k: encode_value(v) for k, v in d.items()})
                for name, d in DEFAULTS.items()]

    @app.post("/experiments/{name}", response_model=ReportModel,
              responses={422: {"model": ErrorModel}, 500: {"model": ErrorModel}})
    def run(name: str, request: RunRequest):
        settings = parse_text(request.config_text) if request.config_text else {}
        cfg = ExperimentConfig.build(name, settings, request.overrides)
        return report_model(run_experiment(cfg))

    return app


app = create_app()
