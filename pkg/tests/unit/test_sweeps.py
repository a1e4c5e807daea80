import numpy as np
import pytest

from ensemble_powerflow.evaluation import (
    Method,
    SweepCurve,
    SweepParameter,
    fit_models,
    rmse,
    sweep_bagging,
    sweep_boosting,
)
from ensemble_powerflow.evaluation.sweeps import validate_grid
from ensemble_powerflow.learners import BagConfig, BoostConfig
from ensemble_powerflow.sampling import LabelFamily


class TestValidateGrid:
    @pytest.mark.parametrize(
        "grid, lowest",
        [([], 0), ([1, 1, 2], 0), ([3, 2], 0), ([0, 1], 1)],
    )
    def test_invalid_grids_raise_error(self, grid, lowest):
        """Test empty, repeated, decreasing and too-small grids"""
        with pytest.raises(ValueError):
            validate_grid(grid, lowest)

    def test_curve_length_must_match_grid(self):
        """Test that every series has one value per grid point"""
        with pytest.raises(ValueError, match="grid length"):
            SweepCurve(
                "case5", SweepParameter.T, (1, 2), {("bus_P", "test"): (0.1,)}
            )


class TestSweepBoosting:
    @pytest.fixture(scope="class")
    def curve(self, case5, case5_sampler, case5_dataset):
        return sweep_boosting(
            case5,
            [0, 1, 5, 10],
            case5_sampler,
            BoostConfig(theta=0.2),
            dataset=case5_dataset,
        )

    def test_zero_stages_give_label_spread(self, curve, case5_split):
        """Test that T = 0 scores the training mean: RMSE is the label std"""
        train, _ = case5_split

        expected = float(np.mean(train.labels_bus_p.std(axis=0)))

        assert curve.values(LabelFamily.BUS_P, "train")[0] == pytest.approx(expected)

    def test_prefix_matches_a_direct_fit(self, curve, case5, case5_split):
        """Test that the T = 5 point equals a model fitted with 5 stages"""
        train, test = case5_split
        models = fit_models(
            Method.GB, train, case5, boost_cfg=BoostConfig(n_learners=5, theta=0.2)
        )

        for family in LabelFamily:
            prediction = models.predict_family(test.features, family)
            direct = rmse(prediction, test.labels(family))
            assert curve.values(family)[2] == pytest.approx(direct, rel=1e-9)

    def test_training_error_falls(self, curve):
        """Test that training RMSE decreases along the T grid"""
        values = curve.values(LabelFamily.BUS_P, "train")

        assert np.all(np.diff(values) <= 1e-12)

    def test_csv(self, curve, tmp_path):
        """Test the long-format CSV of a boosting sweep"""
        written = curve.to_csv(tmp_path / "sweep_T.csv")

        assert [p.name for p in written] == ["sweep_T.csv"]
        frame = curve.to_frame()
        assert len(frame) == 4 * 4 * 2
        assert set(frame["param"]) == {"T"}


class TestSweepBagging:
    @pytest.fixture(scope="class")
    def curve(self, case5, case5_sampler, case5_dataset):
        return sweep_bagging(
            case5,
            [1, 2, 4],
            case5_sampler,
            BagConfig(seed=5),
            dataset=case5_dataset,
        )

    def test_prefix_matches_a_direct_fit(self, curve, case5, case5_split):
        """Test that the BT = 2 point equals a model fitted with 2 members"""
        train, test = case5_split
        models = fit_models(
            Method.BAGGING,
            train,
            case5,
            bag_cfg=BagConfig(n_bootstraps=2, seed=5),
        )

        for family in LabelFamily:
            prediction = models.predict_family(test.features, family)
            direct = rmse(prediction, test.labels(family))
            assert curve.values(family)[1] == pytest.approx(direct, rel=1e-9)

    def test_member_scatter(self, curve, tmp_path):
        """Test one scatter value per member and the members CSV"""
        assert len(curve.member_scatter[("bus_P", "test")]) == 4

        written = curve.to_csv(tmp_path / "sweep_BT.csv")

        assert [p.name for p in written] == ["sweep_BT.csv", "sweep_BT_members.csv"]

    def test_first_member_matches_single_member_curve(self, curve):
        """Test that BT = 1 is the first member's own score"""
        for family in LabelFamily:
            key = (family.value, "test")
            assert curve.series[key][0] == pytest.approx(curve.member_scatter[key][0])
