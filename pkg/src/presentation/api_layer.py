"""
SBCC Presentation Layer - FastAPI Simulation Service
REST endpoints for decoder profiles, single-point runs and single-frame traces
"""

import logging
import time
from typing import Any, Dict, List, Optional

from fastapi import FastAPI, HTTPException
from pydantic import BaseModel, Field

from src.application.simulator import frame_seed, run_frame, run_point
from src.domain.errors import SbccError
from src.infrastructure.config.settings import PROFILE_NAMES, SimConfig, decoder_profile, load_sim_config

logger = logging.getLogger(__name__)

# FastAPI app
app = FastAPI(
    title="SBCC Window Decoding Simulator API",
    description="Monte Carlo simulation of blockwise braided convolutional codes with sliding window decoding",
    version="1.0.0",
)

STARTED_AT = time.time()


class SimulationRequest(BaseModel):
    block_length: int = Field(256, ge=1)
    num_blocks: int = Field(10, ge=1)
    profile: str = "baseline"
    decoder_overrides: Dict[str, Any] = Field(default_factory=dict)
    master_seed: int = Field(20240601, ge=0)
    erased_blocks: List[int] = Field(default_factory=list)
    ebn0_db: float


class PointRequest(SimulationRequest):
    frames: int = Field(10, ge=1)
    min_bit_errors: Optional[int] = Field(None, ge=1)
    min_frame_errors: Optional[int] = Field(None, ge=1)


class FrameRequest(SimulationRequest):
    frame_index: int = Field(0, ge=0)


def _resolve(request: SimulationRequest, **extra: Any) -> SimConfig:
    try:
        return load_sim_config(overrides={
            "block_length": request.block_length,
            "num_blocks": request.num_blocks,
            "profile": request.profile,
            "decoder_overrides": request.decoder_overrides,
            "master_seed": request.master_seed,
            "erased_blocks": request.erased_blocks,
            "ebn0_points": [request.ebn0_db],
            **extra,
        })
    except SbccError as e:
        raise HTTPException(status_code=422, detail=str(e))


@app.get("/health")
def health_check():
    """Service liveness"""
    return {"status": "healthy", "uptime_s": round(time.time() - STARTED_AT, 3)}


@app.get("/profiles")
def get_profiles():
    """Named decoder profiles with their resolved parameters"""
    return {name: decoder_profile(name).model_dump() for name in PROFILE_NAMES}


@app.post("/simulate/point")
def simulate_point(request: PointRequest):
    """Simulate one E_b/N_0 point and return its summary row"""
    cfg = _resolve(request, frames=request.frames, min_bit_errors=request.min_bit_errors,
                   min_frame_errors=request.min_frame_errors)
    try:
        stats, _ = run_point(cfg, request.ebn0_db)
    except SbccError as e:
        raise HTTPException(status_code=422, detail=str(e))
    logger.info(f"Point {request.ebn0_db} dB simulated over {stats.frames} frames")
    return stats.summary()


@app.post("/simulate/frame")
def simulate_frame(request: FrameRequest):
    """Decode one frame and return its per-block diagnostics"""
    cfg = _resolve(request)
    try:
        report = run_frame(cfg, request.ebn0_db, frame_seed(cfg, request.ebn0_db, request.frame_index),
                           request.frame_index)
    except SbccError as e:
        raise HTTPException(status_code=422, detail=str(e))
    return report.to_dict()
