import json
import logging
from pathlib import Path
from typing import List, Literal, Optional

import pandas as pd
from fastapi import FastAPI, HTTPException, Query, Request
from fastapi.exceptions import RequestValidationError
from fastapi.middleware.cors import CORSMiddleware
from fastapi.responses import JSONResponse
from pydantic import BaseModel, Field

from src.config import get_settings

logger = logging.getLogger("fluentnet.api")

app = FastAPI(
    openapi_url="/fluentnet/openapi.json",
    docs_url="/fluentnet/docs",
    redoc_url="/fluentnet/redoc",
)

app.add_middleware(
    CORSMiddleware,
    allow_origins=["*"],
    allow_methods=["*"],
    allow_headers=["*"],
)

DOCS_DIR = Path(__file__).resolve().parent / "api_docs"
DOCS_VALID_EXAMPLES_PATH = DOCS_DIR / "valid_examples.json"
DOCS_ERROR_EXAMPLES_PATH = DOCS_DIR / "error_examples.json"

# `fluentnet serve --out <dir>` and the tests point this at an export directory
app.state.results_dir = get_settings().results_dir


def load_json_file(path: Path) -> dict:
    if not path.exists():
        logger.warning(f"File '{path}' does not exist.")
        return {}
    try:
        with path.open("r", encoding="utf-8") as f:
            return json.load(f)
    except Exception as e:
        logger.error(f"Failed to load file from {path}: {e}")
        return {}


examples_data, errors_data = (load_json_file(DOCS_VALID_EXAMPLES_PATH), load_json_file(DOCS_ERROR_EXAMPLES_PATH))


def read_results(name: str) -> pd.DataFrame:
    path = Path(app.state.results_dir) / f"{name}.csv"
    if not path.exists():
        logger.warning(f"Results file '{path}' not found")
        raise HTTPException(status_code=404, detail=f"No {name} results in '{app.state.results_dir}'")
    return pd.read_csv(path)


def rows(df: pd.DataFrame) -> List[dict]:
    # via JSON so NaN becomes null and numpy scalars become plain numbers
    return json.loads(df.to_json(orient="records"))


class RecognitionRow(BaseModel):
    activity: int = Field(..., description="Activity index 1..8")
    recognized_at: int = Field(..., description="Timeline time of the recognized final statement, ms")
    run_id: Optional[str] = Field(None, description="Run the recognition falls in")
    detected_at: Optional[int] = Field(None, description="Tick at which the detector reported it, ms")
    wall_time: Optional[float] = Field(None, description="Seconds since the replay started")
    window_start: Optional[int] = Field(None, description="Start of the matched label window, ms")
    window_end: Optional[int] = Field(None, description="End of the matched label window, ms")
    outcome: str = Field(..., description="true_positive or misclassified")


class RateRow(BaseModel):
    activity: int
    windows: int
    true_positive: Optional[float] = Field(None, description="% of windows recognized")
    unknown: Optional[float] = Field(None, description="% of windows without recognition")
    misclassified: Optional[float] = Field(None, description="% of windows holding another activity's recognition")
    tp_records: int
    misclassified_records: int
    baseline: float = Field(..., description="True-positive rate published for the CASAS interwoven dataset")


class DelayRow(BaseModel):
    activity: int
    matched: int
    late: int
    worst_ms: int
    average_ms: float


class TraceRow(BaseModel):
    node: str
    time: int = Field(..., description="Timeline time of the evaluation pass, ms")
    duration: int = Field(..., description="Evaluation time, ns")
    complexity: int
    propagated: int


@app.get(
    "/fluentnet/recognitions",
    response_model=List[RecognitionRow],
    summary="Get recognitions",
    description="Every recognition of the exported replay, optionally restricted to one activity or outcome.",
    tags=["Recognition Results"],
    responses={
        200: {"content": {"application/json": {"examples": examples_data.get("recognitions", {})}}},
        404: errors_data.get("404"),
        422: errors_data.get("422"),
    },
)
def get_recognitions(
    activity: Optional[int] = Query(None, ge=1, le=8, description="Activity index"),
    outcome: Optional[Literal["true_positive", "misclassified"]] = Query(None, description="Outcome filter"),
):
    df = read_results("recognitions")
    if activity is not None:
        df = df[df["activity"] == activity]
    if outcome is not None:
        df = df[df["outcome"] == outcome]
    logger.info(f"Returning {len(df)} recognition(s)")
    return rows(df)


@app.get(
    "/fluentnet/rates",
    response_model=List[RateRow],
    summary="Get recognition rates",
    description="Per-activity true-positive, unknown and misclassification rates next to the baseline rates.",
    tags=["Recognition Results"],
    responses={
        200: {"content": {"application/json": {"examples": examples_data.get("rates", {})}}},
        404: errors_data.get("404"),
    },
)
def get_rates():
    return rows(read_results("rates"))


@app.get(
    "/fluentnet/delays",
    response_model=List[DelayRow],
    summary="Get notification delays",
    tags=["Recognition Results"],
    responses={404: errors_data.get("404")},
)
def get_delays():
    return rows(read_results("delays"))


@app.get(
    "/fluentnet/trace",
    response_model=List[TraceRow],
    summary="Get evaluation trace",
    description="Evaluation time, complexity and propagated statements of one node over the timeline.",
    tags=["Recognition Results"],
    responses={
        404: errors_data.get("404"),
        422: errors_data.get("422"),
    },
)
def get_trace(node: str = Query("O0", min_length=1, description="Node id, e.g. O0 or O3")):
    df = read_results("eval_trace")
    df = df[df["node"] == node]
    if df.empty:
        logger.warning(f"Node '{node}' not found in trace")
        raise HTTPException(status_code=404, detail=f"Node '{node}' not found in trace")
    return rows(df)


@app.get(
    "/fluentnet/health",
    summary="Health check",
    description="Check that the service is running and has an export directory to serve.",
    tags=["Service Health"],
)
async def health_check():
    if not Path(app.state.results_dir).is_dir():
        raise HTTPException(status_code=500, detail="No results directory loaded")
    return {"status": "ok"}


@app.get(
    "/fluentnet/",
    summary="Root endpoint",
    description="Root endpoint to verify that the service is running.",
    tags=["Service Health"],
)
async def root():
    return {"status": "ok", "message": "Fluent statement network results service is running."}


@app.exception_handler(HTTPException)
async def http_exception_handler(request: Request, exc: HTTPException):
    logger.error(f"HTTPException: {exc.status_code} - {exc.detail} (path: {request.url.path})")
    return JSONResponse(
        status_code=exc.status_code,
        content={"errors": [{"code": exc.status_code, "detail": exc.detail}]},
    )


@app.exception_handler(RequestValidationError)
async def validation_exception_handler(request: Request, exc: RequestValidationError):
    logger.error(f"RequestValidationError: {exc.errors()} (path: {request.url.path})")
    return JSONResponse(
        status_code=422,
        content={"errors": [{"code": 422, "detail": jsonable(exc.errors())}]},
    )


def jsonable(errors) -> list:
    return json.loads(json.dumps(errors, default=str))


# fluentnet serve --out results
# http://127.0.0.1:8000/fluentnet/redoc
