"""Configuration management using Pydantic Settings."""
import logging
from pathlib import Path
from typing import Optional

from pydantic import AliasChoices, Field, field_validator
from pydantic_settings import BaseSettings, SettingsConfigDict


class Config(BaseSettings):
    """Application configuration with validation and environment variable support."""

    model_config = SettingsConfigDict(
        env_prefix="CHAINFORGE_",
        env_file=".env",
        env_file_encoding="utf-8",
        case_sensitive=False,
        extra="ignore",
        populate_by_name=True,
    )

    # Logging Configuration
    log_level: str = Field(
        default="WARNING",
        validation_alias=AliasChoices("CHAINFORGE_LOG", "CHAINFORGE_LOG_LEVEL"),
        description="Diagnostic verbosity",
    )

    # Chaining language
    max_branches: int = Field(
        default=64,
        description="Upper bound n on the branch count accepted by parallel modules",
    )

    # Solver Configuration
    time_limit: float = Field(default=900.0, description="Solver time limit in seconds")
    threads: int = Field(default=1, description="Worker threads for search and sweeps")
    seed: int = Field(default=0, description="Seed for deterministic tie-breaking")
    prune_paths: bool = Field(
        default=True,
        description="Only create path variables between nodes able to host both ends",
    )
    progress_interval: int = Field(
        default=10000,
        description="Explored nodes between solver progress log lines",
    )
    binary_tolerance: float = Field(
        default=1e-6,
        description="Distance from 0/1 within which imported binaries are rounded",
    )
    objective_tolerance: float = Field(
        default=1e-6,
        description="Tolerance for objective comparison of imported float solutions",
    )

    # Pareto Configuration
    pareto_remdr_steps: int = Field(default=8, description="Remaining data rate thresholds per sweep")
    pareto_refine: bool = Field(
        default=True,
        description="Walk every attainable remaining data rate level instead of a uniform grid",
    )

    # Output Configuration
    run_directory: str = Field(default="./runs", description="Directory for run artifacts")

    @field_validator("run_directory")
    @classmethod
    def normalize_run_directory(cls, v: str) -> str:
        """Resolve the run directory to an absolute path."""
        return str(Path(v).absolute())

    @field_validator("max_branches", "threads", "progress_interval", "pareto_remdr_steps")
    @classmethod
    def validate_positive(cls, v: int) -> int:
        """Counts must be strictly positive."""
        if v < 1:
            raise ValueError("value must be a positive integer")
        return v

    @field_validator("time_limit", "binary_tolerance", "objective_tolerance")
    @classmethod
    def validate_positive_float(cls, v: float) -> float:
        """Limits and tolerances must be strictly positive."""
        if v <= 0:
            raise ValueError("value must be positive")
        return v

    @field_validator("log_level")
    @classmethod
    def validate_log_level(cls, v: str) -> str:
        """Validate and set the logging level."""
        v = v.upper()
        valid_levels = ["DEBUG", "INFO", "WARNING", "ERROR", "CRITICAL"]
        if v not in valid_levels:
            raise ValueError(f"log_level must be one of {valid_levels}")

        # Configure logging
        logging.basicConfig(
            level=getattr(logging, v),
            format="%(asctime)s - %(name)s - %(levelname)s - %(message)s",
            datefmt="%Y-%m-%d %H:%M:%S",
        )
        return v


# Global config instance
config: Optional[Config] = None


def get_config() -> Config:
    """Get or create the global config instance."""
    global config
    if config is None:
        config = Config()
    return config
