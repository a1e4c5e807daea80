import logging
import os
import tempfile
from pathlib import Path

import pytest

from ensemble_powerflow.config.config_manager import ConfigManager

ENV_KEYS = [
    "ENSEMBLE_PF_OUTPUT_ROOT",
    "ENSEMBLE_PF_JOBS",
    "ENSEMBLE_PF_SEED",
    "ENSEMBLE_PF_LOG_LEVEL",
]


class TestConfigManager:
    def setup_method(self):
        """Clear environment variables before each test"""
        self.original_env = {}
        for key in ENV_KEYS:
            if key in os.environ:
                self.original_env[key] = os.environ[key]
                del os.environ[key]

    def teardown_method(self):
        """Restore environment variables after each test"""
        for key in ENV_KEYS:
            if key in os.environ:
                del os.environ[key]

        for key, value in self.original_env.items():
            os.environ[key] = value

    def _env_file(self, *lines):
        with tempfile.NamedTemporaryFile(mode="w", suffix=".env", delete=False) as f:
            for line in lines:
                f.write(line + "\n")
            return f.name

    def test_defaults_without_environment(self):
        """Test the built-in defaults when nothing is configured"""
        temp_env_file = self._env_file()
        try:
            config = ConfigManager(env_file=temp_env_file)

            assert config.output_root == Path("artifacts")
            assert config.jobs == 1
            assert config.seed == 7
            assert config.log_level == logging.INFO
        finally:
            os.unlink(temp_env_file)

    def test_load_config_from_env_file(self):
        """Test loading configuration from a custom .env file"""
        temp_env_file = self._env_file(
            "ENSEMBLE_PF_OUTPUT_ROOT=/tmp/runs",
            "ENSEMBLE_PF_JOBS=4",
            "ENSEMBLE_PF_SEED=11",
            "ENSEMBLE_PF_LOG_LEVEL=debug",
        )
        try:
            config = ConfigManager(env_file=temp_env_file)

            assert config.output_root == Path("/tmp/runs")
            assert config.jobs == 4
            assert config.seed == 11
            assert config.log_level == logging.DEBUG
        finally:
            os.unlink(temp_env_file)

    def test_custom_parameters_override_environment(self):
        """Test that constructor arguments win over environment variables"""
        os.environ["ENSEMBLE_PF_JOBS"] = "8"
        os.environ["ENSEMBLE_PF_SEED"] = "5"
        os.environ["ENSEMBLE_PF_OUTPUT_ROOT"] = "from_env"

        config = ConfigManager(output_root="custom", jobs=2, seed=0)

        assert config.output_root == Path("custom")
        assert config.jobs == 2
        assert config.seed == 0

    def test_non_integer_jobs_raises_error(self):
        """Test that a non-integer worker count names the variable"""
        os.environ["ENSEMBLE_PF_JOBS"] = "many"
        config = ConfigManager()

        with pytest.raises(ValueError, match="ENSEMBLE_PF_JOBS must be an integer"):
            _ = config.jobs

    def test_zero_jobs_raises_error(self):
        """Test that fewer than one worker is rejected"""
        config = ConfigManager(jobs=0)

        with pytest.raises(ValueError, match="at least 1"):
            _ = config.jobs

    def test_unknown_log_level_raises_error(self):
        """Test that an unknown logging level is rejected"""
        config = ConfigManager(log_level="chatty")

        with pytest.raises(ValueError, match="unknown level 'chatty'"):
            _ = config.log_level

    def test_empty_seed_falls_back_to_default(self):
        """Test that an empty seed variable means the default seed"""
        os.environ["ENSEMBLE_PF_SEED"] = ""
        config = ConfigManager()

        assert config.seed == 7
