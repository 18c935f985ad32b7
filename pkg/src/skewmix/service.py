"""HTTP service exposing the experiments.

Each endpoint takes the experiment knobs (all optional, defaulting like the
config file) and returns the full report; the command line client renders
the response to the same CSV/JSON files it writes for local runs.  Jobs run
synchronously: desk-scale experiments finish in seconds to a few minutes.
"""

from __future__ import annotations

from typing import Any, Dict, List, Optional

from fastapi import FastAPI, HTTPException
from pydantic import BaseModel, Field

from . import __version__
from .config import ExperimentConfig
from .errors import CapExceeded, ConfigError
from .experiments import RUNNERS


class ExperimentRequest(BaseModel):
    """Experiment knobs; unset fields fall back to the config defaults."""

    preset: Optional[str] = None
    k: Optional[int] = None
    theta: Optional[float] = None
    two_j_max: Optional[int] = None
    n_min: Optional[int] = None
    n_max: Optional[int] = None
    n1: Optional[str] = None
    mc_samples: Optional[int] = None
    clt_n: Optional[int] = None
    clt_samples: Optional[int] = None
    bins: Optional[int] = None
    seed: Optional[int] = None
    cap: Optional[int] = None
    gk_tol: Optional[float] = None
    gk_max_lag: Optional[int] = None
    observable_f: Optional[str] = None
    observable_g: Optional[str] = None
    output_format: Optional[str] = None
    workers: Optional[int] = None

    def to_config(self) -> ExperimentConfig:
        overrides = self.model_dump(exclude_none=True)
        return ExperimentConfig().with_overrides(**overrides)


class Table(BaseModel):
    columns: List[str]
    rows: List[List[Any]]


class Report(BaseModel):
    kind: str
    version: str
    config: Dict[str, Any]
    summary: Dict[str, Any]
    table: Table


class Health(BaseModel):
    status: str = "ok"
    version: str = Field(default=__version__)


def _run(kind: str, request: ExperimentRequest) -> Report:
    try:
        cfg = request.to_config()
        report = RUNNERS[kind](cfg)
    except ConfigError as exc:
        raise HTTPException(status_code=400, detail={"error": "config", "message": str(exc)})
    except CapExceeded as exc:
        raise HTTPException(status_code=400, detail={"error": "cap", "message": str(exc)})
    return Report(**report)


def create_app() -> FastAPI:
    app = FastAPI(
        title="skewmix",
        version=__version__,
        description="Spectral gap, mixing, and CLT experiments for SU(2) "
        "skew extensions of the full shift",
    )

    @app.get("/v1/health", response_model=Health)
    def health():
        return Health()

    @app.post("/v1/gap", response_model=Report)
    def gap(request: ExperimentRequest):
        return _run("gap", request)

    @app.post("/v1/mix", response_model=Report)
    def mix(request: ExperimentRequest):
        return _run("mix", request)

    @app.post("/v1/prop3", response_model=Report)
    def prop3(request: ExperimentRequest):
        return _run("prop3", request)

    @app.post("/v1/clt", response_model=Report)
    def clt(request: ExperimentRequest):
        return _run("clt", request)

    @app.post("/v1/norm", response_model=Report)
    def norm(request: ExperimentRequest):
        return _run("norm", request)

    return app


app = create_app()
