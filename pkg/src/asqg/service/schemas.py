from __future__ import annotations

import math
from typing import Any, Optional

from pydantic import BaseModel, Field


class RunRequest(BaseModel):
    config_text: Optional[str] = Field(None, description="flat key = value config file contents")
    overrides: dict[str, str] = Field(default_factory=dict)


class PlotModel(BaseModel):
    x: str
    y: list[str]
    group: Optional[str] = None
    loglog: bool = False
    title: str = ""


class ReportModel(BaseModel):
    experiment: str
    config_hash: str
    version: str
    columns: list[str]
    rows: list[dict[str, Any]]
    parameters: dict[str, str]
    summary: dict[str, Any]
    wall_time: float
    plot: Optional[PlotModel] = None


class ErrorModel(BaseModel):
    kind: str
    error: str
    detail: str


class ExperimentInfo(BaseModel):
    name: str
    defaults: dict[str, Any]


class Health(BaseModel):
    status: str
    version: str


def encode_value(value):
    """JSON has no NaN or infinity; they travel as strings."""
    if isinstance(value, float) and not math.isfinite(value):
        return repr(value)
    if isinstance(value, list):
        return [encode_value(v) for v in value]
    return value


def decode_value(value):
    if value in ("nan", "inf", "-inf"):
        return float(value)
    if isinstance(value, list):
        return [decode_value(v) for v in value]
    return value
