"""
Runtime configuration and logging setup.

Settings come from environment variables (FROBTHRESH_*) with safe defaults;
library entry points take an optional ``settings`` argument and fall back to
``get_settings()``.
"""

import logging
import os
import sys
from functools import lru_cache
from typing import Optional

from pydantic import BaseModel, ConfigDict, Field, field_validator


LOG_FORMAT = "%(asctime)s %(levelname)s %(name)s: %(message)s"


class Settings(BaseModel):
    """Limits and defaults shared by every computation."""

    model_config = ConfigDict(frozen=True)

    threads: int = Field(1, description="Worker pool size for acc-probe (FROBTHRESH_THREADS)")
    log_level: str = Field("WARNING", description="Logging level name")
    max_chain: int = Field(64, description="Cap on any tau chain or fixpoint iteration")
    window: int = Field(4, description="Equal-step window W of the heuristic stopping rule")
    burn_in: int = Field(2, description="Burn-in n_b before the window starts counting")
    max_scaling: int = Field(8, description="Cap on the Frobenius rescaling of exponents")
    u_max: int = Field(6, description="Largest u tried for left-limit certificates")
    nu_max_q: int = Field(64, description="Largest p^e used by the nu-oracle bracket")
    max_candidates: int = Field(200000, description="Cap on candidate rationals per bisection level")
    expand_cap: int = Field(4096, description="Cap on explicitly materialised monomial sets")

    @field_validator("threads", "max_chain", "window", "max_scaling", "u_max", "nu_max_q", "max_candidates", "expand_cap")
    @classmethod
    def _positive(cls, v: int) -> int:
        if v < 1:
            raise ValueError("must be >= 1")
        return v

    @field_validator("burn_in")
    @classmethod
    def _non_negative(cls, v: int) -> int:
        if v < 0:
            raise ValueError("must be >= 0")
        return v

    @field_validator("log_level")
    @classmethod
    def _known_level(cls, v: str) -> str:
        v = v.upper()
        if v not in ("DEBUG", "INFO", "WARNING", "ERROR", "CRITICAL"):
            raise ValueError(f"unknown log level {v!r}")
        return v


_ENV_FIELDS = {
    "threads": "FROBTHRESH_THREADS",
    "log_level": "FROBTHRESH_LOG_LEVEL",
    "max_chain": "FROBTHRESH_MAX_CHAIN",
    "window": "FROBTHRESH_WINDOW",
    "burn_in": "FROBTHRESH_BURN_IN",
    "max_scaling": "FROBTHRESH_MAX_SCALING",
    "u_max": "FROBTHRESH_U_MAX",
    "nu_max_q": "FROBTHRESH_NU_MAX_Q",
    "max_candidates": "FROBTHRESH_MAX_CANDIDATES",
    "expand_cap": "FROBTHRESH_EXPAND_CAP",
}


def settings_from_env(environ: Optional[dict] = None) -> Settings:
    """
    Build settings from environment variables.

    Args:
        environ: Mapping to read instead of ``os.environ`` (tests)

    Returns:
        Validated Settings; unset variables keep their defaults
    """
    values = {}
    for name, var in _ENV_FIELDS.items():
        raw = environ.get(var) if environ is not None else os.getenv(var)
        if raw is not None and raw != "":
            values[name] = raw
    return Settings(**values)


@lru_cache(maxsize=1)
def get_settings() -> Settings:
    return settings_from_env()


def resolve(settings: Optional[Settings]) -> Settings:
    return settings if settings is not None else get_settings()


def configure_logging(level: Optional[str] = None) -> None:
    """Install a single stderr handler on the package logger."""
    root = logging.getLogger("frobthresh")
    level_name = (level or get_settings().log_level).upper()
    root.setLevel(getattr(logging, level_name, logging.WARNING))
    if not any(getattr(h, "_frobthresh", False) for h in root.handlers):
        handler = logging.StreamHandler(sys.stderr)
        handler.setFormatter(logging.Formatter(LOG_FORMAT))
        handler._frobthresh = True
        root.addHandler(handler)
