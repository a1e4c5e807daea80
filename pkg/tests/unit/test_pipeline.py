import json
from unittest.mock import Mock, patch

import pytest

from ensemble_powerflow.config.config_manager import ConfigManager
from ensemble_powerflow.evaluation import Method, fit_models, save_models
from ensemble_powerflow.exceptions import ModelError
from ensemble_powerflow.pipeline import (
    MANIFEST_NAME,
    ExperimentRunner,
    RunManifest,
    _ddcr_label,
    file_sha256,
)


@pytest.fixture
def runner(tmp_path):
    return ExperimentRunner(ConfigManager(output_root=str(tmp_path), jobs=1, seed=7))


class TestExperimentRunnerInit:
    def test_init_with_default_config(self):
        """Test runner initialization with default configuration"""
        mock_config = Mock()

        with patch(
            "ensemble_powerflow.pipeline.ConfigManager", return_value=mock_config
        ):
            runner = ExperimentRunner()

            assert runner.config == mock_config
            assert runner.sampler_overrides == {}

    def test_init_with_custom_config_manager(self):
        """Test runner initialization with custom config manager"""
        custom_config = Mock()

        runner = ExperimentRunner(config_manager=custom_config)

        assert runner.config == custom_config

    @pytest.mark.parametrize(
        "overrides", [{"output_root": "out"}, {"jobs": 2}, {"seed": 0}]
    )
    def test_overrides_with_config_manager_raise_error(self, overrides):
        """Test that overrides are not silently dropped next to a config manager"""
        with pytest.raises(ValueError, match="ConfigManager"):
            ExperimentRunner(config_manager=Mock(), **overrides)

    def test_init_with_custom_parameters(self):
        """Test runner initialization with output root and seed"""
        with patch("ensemble_powerflow.pipeline.ConfigManager") as mock_config_class:
            mock_config = Mock()
            mock_config_class.return_value = mock_config

            runner = ExperimentRunner(output_root="out", seed=11)

            mock_config_class.assert_called_once_with(
                output_root="out", jobs=None, seed=11
            )
            assert runner.config == mock_config


class TestSamplerConfig:
    def test_published_size_and_configured_seed(self, case5):
        """Test the case5 default sample size and the configured seed"""
        runner = ExperimentRunner(config_manager=Mock(seed=11))

        cfg = runner.sampler_config(case5)

        assert cfg.n_samples == 175
        assert cfg.seed == 11

    def test_override_precedence(self, case5):
        """Test that explicit overrides win over runner-wide ones"""
        runner = ExperimentRunner(
            config_manager=Mock(seed=11),
            sampler_overrides={"n_samples": 30, "load_scale_max": 1.0},
        )

        assert runner.sampler_config(case5).n_samples == 30
        cfg = runner.sampler_config(case5, n_samples=20, seed=2)
        assert cfg.n_samples == 20
        assert cfg.seed == 2
        assert cfg.load_scale_max == 1.0

    def test_default_run_directory(self, runner, tmp_path):
        """Test <output root>/<case>/<command>"""
        directory = runner.run_dir("compare", "case5")

        assert directory == tmp_path / "case5" / "compare"
        assert directory.is_dir()


class TestRunManifest:
    def test_add_and_verify(self, tmp_path):
        """Test that a changed artifact is reported by verify"""
        manifest = RunManifest(command="generate", root=tmp_path)
        path = tmp_path / "sub" / "a.csv"
        path.parent.mkdir()
        path.write_text("1,2\n")

        manifest.add(path)

        assert manifest.artifacts == {"sub/a.csv": file_sha256(path)}
        assert manifest.verify() == []
        path.write_text("1,3\n")
        assert manifest.verify() == ["sub/a.csv"]

    def test_missing_artifact_is_reported(self, tmp_path):
        """Test verify on a deleted file"""
        manifest = RunManifest(command="generate", root=tmp_path)
        path = tmp_path / "a.csv"
        path.write_text("x\n")
        manifest.add(path)
        path.unlink()

        assert manifest.verify() == ["a.csv"]

    def test_write_and_read(self, tmp_path):
        """Test that a written manifest reads back"""
        manifest = RunManifest(
            command="opf", root=tmp_path, case="case5", seed=7, configs={"jobs": 1}
        )
        with manifest.stage("solve"):
            pass

        path = manifest.write()
        restored = RunManifest.read(path)

        assert path.name == MANIFEST_NAME
        assert restored.case == "case5"
        assert restored.configs == {"jobs": 1}
        assert set(restored.timings) == {"solve"}
        assert json.loads(path.read_text())["root"] == str(tmp_path)

    def test_stage_accumulates(self, tmp_path):
        """Test that repeated stages add up under one name"""
        manifest = RunManifest(command="sweep", root=tmp_path)

        with patch(
            "ensemble_powerflow.pipeline.time.perf_counter",
            side_effect=[1.0, 3.0, 10.0, 10.5],
        ):
            with manifest.stage("fit"):
                pass
            with manifest.stage("fit"):
                pass

        assert manifest.timings == {"fit": 2.5}

    def test_merge_prefixes_nested_runs(self, tmp_path):
        """Test that nested artifacts are keyed relative to the outer root"""
        outer = RunManifest(command="reproduce", root=tmp_path)
        inner = RunManifest(command="compare", root=tmp_path / "case5" / "compare")
        inner.artifacts["rmse_table.csv"] = "abc"
        inner.timings["compare"] = 1.0

        outer.merge(inner, "case5/compare")

        assert outer.artifacts == {"case5/compare/rmse_table.csv": "abc"}
        assert outer.timings == {"case5/compare/compare": 1.0}


class TestRunnerGenerate:
    def test_writes_dataset_and_manifest(self, runner, case5, case5_dataset):
        """Test the files and manifest of a generate run"""
        with patch(
            "ensemble_powerflow.pipeline.generate", return_value=case5_dataset
        ) as mock_generate:
            dataset, manifest = runner.generate("case5")

        mock_generate.assert_called_once()
        assert dataset is case5_dataset
        assert manifest.case == "case5"
        assert manifest.case_source == "case5"
        assert "dataset/features.csv" in manifest.artifacts
        assert (manifest.root / MANIFEST_NAME).is_file()
        assert manifest.verify() == []


class TestRunnerOpfValidation:
    def test_unknown_method_raises_error(self, runner):
        """Test that OPF methods are checked before any work"""
        with pytest.raises(ValueError, match="OPF methods"):
            runner.opf("case5", ["sdp"])

    def test_model_file_needs_one_learned_method(self, runner, tmp_path):
        """Test that a model file cannot serve two methods"""
        with pytest.raises(ValueError, match="exactly one learned method"):
            runner.opf("case5", ["gb", "pr"], model_path=tmp_path / "m.json")

    def test_model_file_of_another_method(self, runner, case5, case5_dataset, tmp_path):
        """Test that GB OPF rejects a saved PR model set"""
        path = save_models(
            fit_models(Method.PR, case5_dataset, case5), tmp_path / "models_PR.json"
        )

        with pytest.raises(ModelError, match="holds PR models"):
            runner.opf(case5, ["gb"], model_path=path)

    def test_ddcr_labels(self):
        """Test the solution labels of each learned method"""
        assert _ddcr_label(Method.GB) == "DDCR"
        assert _ddcr_label(Method.PR) == "DDCR-PR"
        assert _ddcr_label(Method.BAGGING) == "DDCR-Bagging"
