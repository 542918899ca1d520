import os
import traceback
from typing import List, Literal

from fastapi import FastAPI, File, HTTPException, UploadFile
from fastapi.middleware.cors import CORSMiddleware
from fastapi.responses import PlainTextResponse
from pydantic import ValidationError

from app import config
from app.errors import InvalidDomainError, OccupancyStatsError
from app.estimation import fit
from app.models import (
    AnalysisResult,
    AnalyzeRequest,
    CountingRequest,
    CountingResponse,
    FitRequest,
    FitResult,
    HealthResponse,
    SelectionThresholds,
    SimulateRequest,
    SimulateResponse,
    StatisticsKind,
)
from app.montecarlo import simulate, total_variation
from app.monitoring import get_logger
from app.occupancy import count_be, count_fd, count_mb, pmf_vector
from app.report import analyze, emit_report, load_dataset

logger = get_logger()


# ============================================================
# FASTAPI INIT
# ============================================================

app = FastAPI(
    title="Conceptual Occupancy Statistics API",
    description="Ajustement Maxwell-Boltzmann / Bose-Einstein et sélection de modèle par ΔBIC",
    version="1.0.0",
    docs_url="/docs",
    redoc_url="/redoc"
)

app.add_middleware(
    CORSMiddleware,
    allow_origins=["*"],
    allow_credentials=True,
    allow_methods=["*"],
    allow_headers=["*"],
)

UPLOAD_DIR = os.getenv("UPLOAD_DIR", "/tmp")


def _domain_error(endpoint: str, e: Exception) -> HTTPException:
    logger.warning("domain_error", extra={
        "custom_dimensions": {
            "event_type": "domain_error",
            "endpoint": endpoint,
            "error": str(e)
        }
    })
    return HTTPException(status_code=422, detail=str(e))


def _internal_error(endpoint: str) -> HTTPException:
    logger.error("internal_error", extra={
        "custom_dimensions": {
            "event_type": "internal_error",
            "endpoint": endpoint,
            "traceback": traceback.format_exc()
        }
    })
    return HTTPException(status_code=500, detail="Internal error")


# ============================================================
# GENERAL ENDPOINTS
# ============================================================

@app.get("/", tags=["General"])
def root():
    return {
        "message": "Conceptual Occupancy Statistics API",
        "version": "1.0.0",
        "status": "running",
        "docs": "/docs"
    }


@app.get("/health", response_model=HealthResponse, tags=["General"])
def health():
    available = os.path.exists(config.SYNTHETIC_DATASET)
    return {"status": "healthy", "data_available": available}


# ============================================================
# MODÈLES
# ============================================================

@app.post("/counts", response_model=CountingResponse, tags=["Models"])
def counts(request: CountingRequest):
    """
    Nombre d'arrangements MB, BE et FD de N entités dans M états.
    """
    try:
        fd = count_fd(request.N, request.M) if request.N <= request.M else None
        return {"mb": count_mb(request.N, request.M), "be": count_be(request.N, request.M), "fd": fd}
    except InvalidDomainError as e:
        raise _domain_error("/counts", e)


@app.post("/fit", response_model=List[FitResult], tags=["Models"])
def fit_counts(request: FitRequest):
    """
    Ajuste MB, BE ou les deux sur un CountVector.
    """
    kinds = [StatisticsKind.MB, StatisticsKind.BE] if request.kind == "both" \
        else [StatisticsKind(request.kind)]
    try:
        results = [fit(request.data, kind, request.options) for kind in kinds]
    except OccupancyStatsError as e:
        raise _domain_error("/fit", e)
    except Exception:
        raise _internal_error("/fit")

    logger.info("fit", extra={
        "custom_dimensions": {
            "event_type": "fit",
            "endpoint": "/fit",
            "N": request.data.total_entities,
            "models": [k.value for k in kinds]
        }
    })
    return results


# ============================================================
# ANALYSE
# ============================================================

@app.post("/analyze", response_model=AnalysisResult, tags=["Analysis"])
def analyze_records(request: AnalyzeRequest):
    """
    Ajuste et compare les deux modèles pour chaque enregistrement.
    """
    try:
        result = analyze(request.records, request.thresholds, request.options)
    except OccupancyStatsError as e:
        raise _domain_error("/analyze", e)
    except Exception:
        raise _internal_error("/analyze")

    logger.info("batch_analysis", extra={
        "custom_dimensions": {
            "event_type": "batch_analysis",
            "rows": len(result.rows),
            "failures": len(result.failures)
        }
    })
    return result


@app.post("/analyze/upload", response_class=PlainTextResponse, tags=["Analysis"])
async def analyze_upload(
    file: UploadFile = File(...),
    format: Literal["tsv", "json", "markdown"] = "tsv",
    t_weak: float = config.BIC_T_WEAK,
    t_strong: float = config.BIC_T_STRONG
):
    """
    Analyse un fichier CSV téléversé et retourne le rapport.
    """
    path = os.path.join(UPLOAD_DIR, f"upload_{os.getpid()}_{id(file)}.csv")
    try:
        with open(path, "wb") as f:
            f.write(await file.read())
        thresholds = SelectionThresholds(t_weak=t_weak, t_strong=t_strong)
        result = analyze(load_dataset(path, "csv"), thresholds)
        if not result.rows:
            raise HTTPException(status_code=422, detail=[f.error for f in result.failures])
        return emit_report(result.rows, format)
    except (OccupancyStatsError, ValidationError) as e:
        raise _domain_error("/analyze/upload", e)
    finally:
        if os.path.exists(path):
            os.remove(path)


# ============================================================
# SIMULATION
# ============================================================

@app.post("/simulate", response_model=SimulateResponse, tags=["Simulation"])
def simulate_histogram(request: SimulateRequest):
    """
    Histogramme Monte Carlo et distance à la pmf exacte.
    """
    try:
        hist = simulate(request.kind, request.n, request.p1, request.draws, request.seed)
        distance = total_variation(hist, pmf_vector(request.kind, request.n, request.p1))
    except OccupancyStatsError as e:
        raise _domain_error("/simulate", e)

    logger.info("simulation", extra={
        "custom_dimensions": {
            "event_type": "simulation",
            "kind": request.kind.value,
            "draws": request.draws,
            "total_variation": distance
        }
    })
    return {"histogram": hist, "total_variation": distance}
