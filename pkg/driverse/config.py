"""
Application configuration using Pydantic Settings.

Centralizes every numeric default (anchor counts, decay temperature, window
length, thresholds, stride, seeds) so that ablations are flag toggles.
Precedence: CLI flag > environment (DRIVERSE_*) > .env > JSON config file > default.
"""

from functools import lru_cache
from pathlib import Path
from typing import Any, Optional, Tuple, Type

from pydantic import Field, field_validator
from pydantic_settings import (
    BaseSettings,
    JsonConfigSettingsSource,
    PydanticBaseSettingsSource,
    SettingsConfigDict,
)

from driverse.models.anchors import TsaConfig


class Settings(BaseSettings):
    """
    Library and CLI settings loaded from environment variables.
    DRIVERSE_SEED overrides every default seed for CI reproducibility.
    """

    model_config = SettingsConfigDict(
        env_prefix="DRIVERSE_",
        env_file=".env",
        env_file_encoding="utf-8",
        case_sensitive=False,
        extra="ignore",  # Config files may carry keys for other tools
    )

    # Application
    app_name: str = "DriVerse trajectory control core"
    log_level: str = "WARNING"
    seed: int = 0

    # Trajectory-guided spatial anchors
    decay_lambda: float = Field(default=0.05, description="Trail decay temperature (1/px)")
    trail_depth: int = Field(default=4, description="Trail length M in frames")
    point_radius: float = Field(default=2.0, description="Rendered disc radius (px)")
    anchor_count: int = 1024
    radius_min: float = 3.0
    radius_max: float = 60.0
    anchor_height: float = 0.0  # ground level in the world frame
    flow_max: Optional[float] = None  # None: 95th percentile of observed motion

    # Synthetic camera rig
    camera_height: float = 1.5

    # Dynamic window generation
    window: int = 81
    threshold: float = 0.6

    # Trend tokens
    stationary_eps: float = 1e-3

    # Latent motion alignment
    stride: float = 8.0
    motion_threshold: float = 1.0
    num_points: int = 256

    @field_validator("log_level", mode="before")
    @classmethod
    def normalize_log_level(cls, v: Any) -> Any:
        if isinstance(v, str):
            return v.strip().upper() or "WARNING"
        return v

    @field_validator("decay_lambda", "point_radius", "stride")
    @classmethod
    def must_be_positive(cls, v: float) -> float:
        if v <= 0:
            raise ValueError("must be > 0")
        return v

    @field_validator("trail_depth")
    @classmethod
    def must_be_non_negative(cls, v: int) -> int:
        if v < 0:
            raise ValueError("must be >= 0")
        return v

    @field_validator("anchor_count", "window", "num_points")
    @classmethod
    def must_be_at_least_one(cls, v: int) -> int:
        if v < 1:
            raise ValueError("must be >= 1")
        return v

    @field_validator("threshold")
    @classmethod
    def must_be_open_ratio(cls, v: float) -> float:
        if not 0.0 < v < 1.0:
            raise ValueError("must lie in (0, 1)")
        return v

    @classmethod
    def settings_customise_sources(
        cls,
        settings_cls: Type[BaseSettings],
        init_settings: PydanticBaseSettingsSource,
        env_settings: PydanticBaseSettingsSource,
        dotenv_settings: PydanticBaseSettingsSource,
        file_secret_settings: PydanticBaseSettingsSource,
    ) -> Tuple[PydanticBaseSettingsSource, ...]:
        # JSON config file sits below the environment so DRIVERSE_SEED always wins
        return (
            init_settings,
            env_settings,
            dotenv_settings,
            JsonConfigSettingsSource(settings_cls),
            file_secret_settings,
        )


def load_settings(config_file: Optional[str | Path] = None, **overrides: Any) -> Settings:
    """
    Build settings from an optional JSON config file plus explicit overrides
    (CLI flags). Overrides set to None are ignored so unset flags fall through.
    """
    explicit = {k: v for k, v in overrides.items() if v is not None}
    if config_file is None:
        return Settings(**explicit)

    class FileSettings(Settings):
        model_config = SettingsConfigDict(**{**Settings.model_config, "json_file": Path(config_file)})

    return FileSettings(**explicit)


@lru_cache
def get_settings() -> Settings:
    """
    Cached settings instance for library callers.
    Using lru_cache avoids re-reading .env on every call.
    """
    return Settings()


def tsa_config(settings: Settings) -> TsaConfig:
    """Anchor/trail parameters as the services consume them."""
    return TsaConfig(
        decay_lambda=settings.decay_lambda,
        trail_depth=settings.trail_depth,
        point_radius=settings.point_radius,
        anchor_count=settings.anchor_count,
        flow_max=settings.flow_max,
    )
