import numpy as np
import pytest

from ensemble_powerflow.evaluation import (
    Method,
    ModelSet,
    RmseReport,
    compare_methods,
    compare_methods_over_seeds,
    fit_models,
    load_models,
    save_models,
)
from ensemble_powerflow.exceptions import ModelError
from ensemble_powerflow.learners import BagConfig, BoostConfig, EnsembleModel
from ensemble_powerflow.sampling import Dataset, DatasetMeta, LabelFamily

SMALL_BOOST = BoostConfig(n_learners=20)
SMALL_BAG = BagConfig(n_bootstraps=5, seed=3)


@pytest.fixture(scope="module")
def case5_report(case5, case5_sampler, case5_dataset):
    return compare_methods(
        case5, case5_sampler, SMALL_BOOST, SMALL_BAG, dataset=case5_dataset
    )


def _constant_dataset(n_samples: int) -> Dataset:
    rng = np.random.default_rng(0)
    return Dataset(
        features=rng.normal(size=(n_samples, 10)),
        labels_bus_p=np.tile([0.25, -0.5, 0.75, -1.0, 0.5], (n_samples, 1)),
        labels_bus_q=np.tile([0.0, 0.125, 0.0, 0.25, 0.0], (n_samples, 1)),
        labels_branch_p=np.full((n_samples, 6), 0.25),
        labels_branch_q=np.full((n_samples, 6), -0.0625),
        load_scale=np.ones((n_samples, 5)),
        meta=DatasetMeta(case_name="case5", seed=0, n_samples=n_samples),
    )


class TestMethod:
    @pytest.mark.parametrize(
        "name, expected",
        [("pr", Method.PR), ("GB", Method.GB), ("bag", Method.BAGGING)],
    )
    def test_parse(self, name, expected):
        """Test method name aliases"""
        assert Method.parse(name) is expected

    def test_parse_unknown_raises_error(self):
        """Test that an unknown method name is rejected"""
        with pytest.raises(ValueError, match="unknown method"):
            Method.parse("svm")


class TestCompareMethods:
    def test_report_has_every_combination(self, case5_report):
        """Test 3 methods x 4 families x 2 splits"""
        frame = case5_report.to_frame()

        assert len(frame) == 24
        assert set(frame["method"]) == {"PR", "GB", "Bagging"}
        assert set(frame["split"]) == {"test", "train"}
        assert (frame["rmse"] >= 0).all()
        np.testing.assert_allclose(frame["rmse_x1e5"], frame["rmse"] * 1e5)

    def test_constant_labels_are_fitted_exactly(self, case5, case5_sampler):
        """Test that zero-variance labels give near-zero RMSE for every method"""
        report = compare_methods(
            case5,
            case5_sampler,
            SMALL_BOOST,
            SMALL_BAG,
            dataset=_constant_dataset(20),
        )

        assert max(e.rmse for e in report.entries) < 1e-10

    def test_deterministic(self, case5, case5_sampler, case5_dataset, case5_report):
        """Test that the same seed reproduces the report exactly"""
        again = compare_methods(
            case5, case5_sampler, SMALL_BOOST, SMALL_BAG, dataset=case5_dataset
        )

        assert again.to_frame().equals(case5_report.to_frame())

    def test_csv_round_trip(self, case5_report, tmp_path):
        """Test that a written report reads back with the same values"""
        path = case5_report.to_csv(tmp_path / "rmse_table.csv")

        restored = RmseReport.from_csv(path)

        assert restored.get("GB", LabelFamily.BUS_P) == case5_report.get(
            "GB", LabelFamily.BUS_P
        )
        assert restored == case5_report

    def test_missing_entry_raises_key_error(self, case5_report):
        """Test lookup of a split that was not reported"""
        with pytest.raises(KeyError):
            case5_report.get(Method.PR, LabelFamily.BUS_P, split="validation")

    def test_negative_rmse_rejected(self, case5_report):
        """Test that a report cannot hold a negative RMSE"""
        frame = case5_report.to_frame()
        frame.loc[0, "rmse"] = -1.0

        with pytest.raises(ModelError, match="invalid RMSE"):
            RmseReport.from_frame(frame)


class TestCompareOverSeeds:
    def test_median_columns(self, case5, case5_sampler):
        """Test that repeated seeds add median columns to the table"""
        comparison = compare_methods_over_seeds(
            case5, [1, 2], case5_sampler, SMALL_BOOST, SMALL_BAG
        )

        frame = comparison.to_frame()
        assert len(frame) == 24
        assert {"median_rmse", "median_rmse_x1e5", "n_seeds"} <= set(frame.columns)
        assert (frame["n_seeds"] == 2).all()
        assert set(comparison.ordering()) == {f.value for f in LabelFamily}

    def test_no_seeds_raises_error(self, case5, case5_sampler):
        """Test that at least one seed is needed"""
        with pytest.raises(ValueError, match="at least one seed"):
            compare_methods_over_seeds(case5, [], case5_sampler)


class TestModelSetPersistence:
    def test_save_and_load(self, case5, case5_split, tmp_path):
        """Test that a saved GB model set predicts the same after reloading"""
        train, test = case5_split
        models = fit_models(Method.GB, train, case5, boost_cfg=SMALL_BOOST)

        path = save_models(models, tmp_path / "models_GB.json")
        restored = load_models(path)

        assert restored.method is Method.GB
        assert isinstance(restored.bus, EnsembleModel)
        for family in LabelFamily:
            np.testing.assert_allclose(
                restored.predict_family(test.features, family),
                models.predict_family(test.features, family),
                atol=1e-12,
            )

    def test_collapsed_shapes(self, case5, case5_split):
        """Test the affine forms used to build the relaxation"""
        train, _ = case5_split
        models = fit_models(Method.BAGGING, train, case5, bag_cfg=SMALL_BAG)

        bus, branches = models.collapsed()

        assert bus.coeffs.shape == (10, 10)
        assert [b.coeffs.shape for b in branches] == [(2, 4)] * 6

    def test_corrupt_file_raises_model_error(self, tmp_path):
        """Test that a file without a model set is rejected"""
        path = tmp_path / "models.json"
        path.write_text('{"method": "GB"}')

        with pytest.raises(ModelError, match="does not hold a fitted model set"):
            load_models(path)

    def test_missing_file_raises_file_not_found(self, tmp_path):
        """Test loading a model set that does not exist"""
        with pytest.raises(FileNotFoundError):
            load_models(tmp_path / "absent.json")

    def test_from_dict_keeps_method(self, case5, case5_split):
        """Test the dictionary form of a PR model set"""
        train, _ = case5_split
        models = fit_models("PR", train, case5)

        restored = ModelSet.from_dict(models.to_dict())

        assert restored.method is Method.PR
        assert len(restored.branches) == 6
