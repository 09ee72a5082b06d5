"""
SBCC Configuration - Decoder/Simulation Models, Named Profiles and Environment Settings
Pydantic models validated at construction; JSON files and .env supply overrides
"""

import json
import logging
import os
from pathlib import Path
from typing import Any, Dict, List, Optional, Union

from dotenv import load_dotenv
from pydantic import BaseModel, Field, ValidationError, field_validator, model_validator

from src.domain.errors import ConfigurationError

# Load environment variables
load_dotenv()

logger = logging.getLogger(__name__)


class DecoderConfig(BaseModel):
    """Sliding window decoder parameters"""
    w: int = Field(3, ge=1, description="initial window size in blocks")
    w_max: int = Field(6, ge=1, description="maximum window size")
    i1: int = Field(1, ge=1, description="vertical iterations per block visit")
    i2: int = Field(20, ge=1, description="maximum horizontal iterations")
    tau: int = Field(2, ge=1, description="leading blocks checked for extension")
    theta: float = Field(10.0, ge=0.0, description="average |LLR| threshold")
    n_r: int = Field(1, ge=1, description="consecutive failed targets before resync")
    gamma: float = Field(1e-7, ge=0.0, le=0.5, description="BER_est stopping threshold")
    stopping_enabled: bool = False
    extension_enabled: bool = False
    resync_enabled: bool = False

    model_config = {"frozen": True}

    @model_validator(mode="after")
    def check_window_bounds(self) -> "DecoderConfig":
        if not (self.tau <= self.w <= self.w_max):
            raise ValueError(f"require 1 <= tau <= w <= w_max, got tau={self.tau}, w={self.w}, w_max={self.w_max}")
        return self


PROFILE_FLAGS: Dict[str, Dict[str, bool]] = {
    "baseline": dict(extension_enabled=False, resync_enabled=False, stopping_enabled=False),
    "extension": dict(extension_enabled=True, resync_enabled=False, stopping_enabled=False),
    "extension+resync": dict(extension_enabled=True, resync_enabled=True, stopping_enabled=False),
    "all-on": dict(extension_enabled=True, resync_enabled=True, stopping_enabled=True),
}
PROFILE_NAMES = tuple(PROFILE_FLAGS)


def decoder_profile(name: str, **overrides: Any) -> DecoderConfig:
    """Named decoder profile with optional parameter overrides"""
    if name not in PROFILE_FLAGS:
        raise ConfigurationError(f"unknown profile '{name}', expected one of {', '.join(PROFILE_NAMES)}")
    try:
        return DecoderConfig(**{**PROFILE_FLAGS[name], **overrides})
    except ValidationError as e:
        raise ConfigurationError(str(e)) from e


class SimConfig(BaseModel):
    """Monte Carlo experiment description"""
    block_length: int = Field(512, ge=1, description="T, info bits per block")
    num_blocks: int = Field(50, ge=1, description="L, blocks per frame")
    frames: int = Field(100, ge=1, description="frame budget per E_b/N_0 point")
    min_bit_errors: Optional[int] = Field(None, ge=1)
    min_frame_errors: Optional[int] = Field(None, ge=1)
    ebn0_points: List[float] = Field(default_factory=lambda: [0.5, 1.0, 1.5])
    profile: str = "baseline"
    decoder: DecoderConfig = Field(default_factory=DecoderConfig)
    master_seed: int = Field(20240601, ge=0)
    workers: int = Field(1, ge=1)
    emit_block_histogram: bool = True
    trace_frame: Optional[int] = Field(None, ge=0)
    erased_blocks: List[int] = Field(default_factory=list)
    propagation_run: int = Field(5, ge=1, description="errored-block run length counted as propagation")
    permutor_files: Optional[List[str]] = None

    @field_validator("permutor_files")
    @classmethod
    def check_permutor_files(cls, value: Optional[List[str]]) -> Optional[List[str]]:
        if value is not None and len(value) != 3:
            raise ValueError("permutor_files must name exactly three files (P0, P1, P2)")
        return value

    @field_validator("erased_blocks")
    @classmethod
    def check_erased_blocks(cls, value: List[int]) -> List[int]:
        if any(t < 0 for t in value):
            raise ValueError("erased block indices must be non-negative")
        return sorted(set(value))

    @field_validator("ebn0_points")
    @classmethod
    def check_ebn0_points(cls, value: List[float]) -> List[float]:
        # points share seeds and report names at 1e-4 dB resolution
        keys = [round(x * 10_000) for x in value]
        if len(set(keys)) != len(keys):
            raise ValueError("E_b/N_0 points must differ by at least 0.0001 dB")
        return value


def load_sim_config(
    path: Optional[Union[str, Path]] = None,
    overrides: Optional[Dict[str, Any]] = None,
) -> SimConfig:
    """Resolve a SimConfig: defaults < JSON file < explicit overrides

    The profile seeds every decoder parameter. A "decoder" block may tune numeric
    parameters but never the countermeasure flags, which always follow the profile;
    "decoder_overrides" is applied last and may change anything.
    """
    data: Dict[str, Any] = {}
    if path is not None:
        try:
            data = json.loads(Path(path).read_text(encoding="utf-8"))
        except (OSError, json.JSONDecodeError) as e:
            raise ConfigurationError(f"cannot read config file {path}: {e}") from e
    data.update({k: v for k, v in (overrides or {}).items() if v is not None})

    decoder_overrides = data.pop("decoder_overrides", {}) or {}
    profile = data.get("profile", "baseline")
    decoder_data = data.get("decoder", {}) or {}
    base = decoder_profile(profile).model_dump()
    flags = PROFILE_FLAGS.get(profile, {})
    data["decoder"] = {**base, **decoder_data, **flags, **decoder_overrides}

    try:
        return SimConfig(**data)
    except ValidationError as e:
        raise ConfigurationError(str(e)) from e


class RuntimeSettings(BaseModel):
    """Process-level settings from the environment"""
    output_dir: str = "./results"
    workers: int = 1
    log_level: str = "INFO"


def get_runtime_settings() -> RuntimeSettings:
    """Read SBCC_* environment variables (after .env loading)"""
    try:
        return RuntimeSettings(
            output_dir=os.getenv("SBCC_OUTPUT_DIR", "./results"),
            workers=int(os.getenv("SBCC_WORKERS", "1")),
            log_level=os.getenv("SBCC_LOG_LEVEL", "INFO").upper(),
        )
    except (ValueError, ValidationError) as e:
        raise ConfigurationError(f"invalid SBCC_* environment: {e}") from e
