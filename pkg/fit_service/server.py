"""
Fit Service - FastAPI Server
Exposes concentric ellipse fitting and the theoretical bias scan over HTTP
"""

from fastapi import FastAPI, HTTPException
from fastapi.middleware.cors import CORSMiddleware
from pydantic import BaseModel, Field
from typing import List, Optional
import logging
import math

import pandas as pd

from config import settings
from concentric_fit import __version__
from concentric_fit.error_analysis import bias_scan
from concentric_fit.estimators import fit_all, registry, resolve_methods
from concentric_fit.exceptions import ConcentricFitError
from concentric_fit.parsers.point_csv import PointCSVParser
from concentric_fit.simulation import ScenarioFamily, experiment_presets

logger = logging.getLogger(__name__)

app = FastAPI(
    title="Concentric Fit Service",
    description="Algebraic fitting of concentric ellipses",
    version=__version__,
)

# CORS
app.add_middleware(
    CORSMiddleware,
    allow_origins=settings.CORS_ORIGINS,
    allow_credentials=True,
    allow_methods=["*"],
    allow_headers=["*"],
)


# Pydantic models
class PointIn(BaseModel):
    x: float
    y: float
    ring: int


class FitRequest(BaseModel):
    points: List[PointIn]
    f0: float = Field(default=settings.F0, gt=0)
    methods: Optional[List[str]] = None


class BiasScanRequest(BaseModel):
    family: str = "scenario1"
    methods: Optional[List[str]] = None


def _check_methods(methods: Optional[List[str]]) -> None:
    try:
        resolve_methods(methods)
    except ValueError as e:
        raise HTTPException(status_code=422, detail=str(e))


@app.get("/")
def root():
    """Health check endpoint"""
    return {
        "service": "Concentric Fit Service",
        "status": "running",
        "version": __version__,
        "methods": [m.value for m in registry.get_available_methods()],
    }


@app.get("/api/methods")
def list_methods():
    """Registered estimators"""
    return {"methods": registry.list_available()}


@app.post("/api/fit")
def fit(request: FitRequest):
    """
    Fit every requested method to the posted points

    Returns:
        Per-method results keyed by method name
    """
    _check_methods(request.methods)
    frame = pd.DataFrame([p.model_dump() for p in request.points], columns=['x', 'y', 'ring'])
    try:
        data = PointCSVParser().parse_frame(frame, request.f0)
        results = fit_all(data, request.methods)
    except ConcentricFitError as e:
        logger.warning(f"fit rejected: {e}")
        raise HTTPException(status_code=422, detail=str(e))

    logger.info(f"Fitted {data.n_total} points on {data.K} ring(s)")
    return {m.value: r.to_dict() for m, r in results.items()}


@app.post("/api/bias-scan")
def run_bias_scan(request: BiasScanRequest):
    """
    Theoretical bias norms over a preset sweep

    Returns:
        Sweep name and one row per sweep value
    """
    _check_methods(request.methods)
    family = experiment_presets().get(request.family)
    if not isinstance(family, ScenarioFamily):
        raise HTTPException(status_code=422, detail=f"unknown family: {request.family}")

    try:
        table = bias_scan(family, request.methods)
    except ConcentricFitError as e:
        logger.error(f"bias scan failed: {e}")
        raise HTTPException(status_code=422, detail=str(e))

    rows = [
        {k: (None if isinstance(v, float) and math.isnan(v) else v) for k, v in row.items()}
        for row in table.to_dict(orient='records')
    ]
    return {"family": family.name, "sweep": family.sweep, "rows": rows}
