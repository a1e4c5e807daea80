import logging
import os
from pathlib import Path
from typing import Optional

from dotenv import load_dotenv

DEFAULT_OUTPUT_ROOT = "artifacts"
DEFAULT_JOBS = 1
DEFAULT_SEED = 7
DEFAULT_LOG_LEVEL = "INFO"


class ConfigManager:
    """Manages run configuration: output root, worker count, seed and log level"""

    def __init__(
        self,
        env_file: Optional[str] = None,
        output_root: Optional[str] = None,
        jobs: Optional[int] = None,
        seed: Optional[int] = None,
        log_level: Optional[str] = None,
    ):
        """Initialize configuration manager

        Args:
            env_file: Path to .env file. If None, uses default .env lookup.
            output_root: Artifact directory (overrides ENSEMBLE_PF_OUTPUT_ROOT)
            jobs: Worker count for sampling and bagging (overrides ENSEMBLE_PF_JOBS)
            seed: Base random seed (overrides ENSEMBLE_PF_SEED)
            log_level: Logging level name (overrides ENSEMBLE_PF_LOG_LEVEL)
        """
        # Load environment variables first
        if env_file:
            load_dotenv(env_file)
        else:
            load_dotenv()

        # Store custom parameters (these override environment variables)
        self._custom_output_root = output_root
        self._custom_jobs = jobs
        self._custom_seed = seed
        self._custom_log_level = log_level

    @property
    def output_root(self) -> Path:
        """Get artifact root from custom parameter or environment"""
        if self._custom_output_root:
            return Path(self._custom_output_root)
        return Path(os.getenv("ENSEMBLE_PF_OUTPUT_ROOT") or DEFAULT_OUTPUT_ROOT)

    @property
    def jobs(self) -> int:
        """Get worker count from custom parameter or environment"""
        if self._custom_jobs is not None:
            jobs = self._custom_jobs
        else:
            jobs = _env_int("ENSEMBLE_PF_JOBS", DEFAULT_JOBS)
        if jobs < 1:
            raise ValueError(f"ENSEMBLE_PF_JOBS must be at least 1, got {jobs}")
        return jobs

    @property
    def seed(self) -> int:
        """Get base seed from custom parameter or environment"""
        if self._custom_seed is not None:
            return self._custom_seed
        return _env_int("ENSEMBLE_PF_SEED", DEFAULT_SEED)

    @property
    def log_level(self) -> int:
        """Get numeric logging level from custom parameter or environment"""
        name = self._custom_log_level or os.getenv(
            "ENSEMBLE_PF_LOG_LEVEL", DEFAULT_LOG_LEVEL
        )
        level = logging.getLevelName(name.upper())
        if not isinstance(level, int):
            raise ValueError(f"ENSEMBLE_PF_LOG_LEVEL has unknown level '{name}'")
        return level


def _env_int(name: str, default: int) -> int:
    raw = os.getenv(name)
    if raw is None or raw == "":
        return default
    try:
        return int(raw)
    except ValueError:
        raise ValueError(f"{name} must be an integer, got '{raw}'") from None
