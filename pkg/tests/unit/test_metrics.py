import numpy as np
import pytest

from ensemble_powerflow.evaluation import per_output_rmse, rmse
from ensemble_powerflow.exceptions import ModelError


class TestRmse:
    def test_single_output(self):
        """Test errors 3 and 4 on one output"""
        pred = np.array([[3.0], [4.0]])

        assert rmse(pred, np.zeros((2, 1))) == pytest.approx(np.sqrt(12.5))

    def test_average_over_outputs(self):
        """Test that per-output RMSEs 1 and 3 average to 2"""
        pred = np.array([[1.0, 3.0], [-1.0, -3.0]])

        np.testing.assert_allclose(per_output_rmse(pred, np.zeros((2, 2))), [1.0, 3.0])
        assert rmse(pred, np.zeros((2, 2))) == pytest.approx(2.0)

    def test_perfect_prediction_is_zero(self):
        """Test a zero error"""
        truth = np.arange(6.0).reshape(3, 2)

        assert rmse(truth, truth) == 0.0

    def test_shape_mismatch_raises_error(self):
        """Test that prediction and truth must agree in shape"""
        with pytest.raises(ModelError, match="shape mismatch"):
            rmse(np.zeros((2, 2)), np.zeros((2, 3)))

    def test_empty_raises_error(self):
        """Test that at least one row is required"""
        with pytest.raises(ModelError):
            rmse(np.zeros((0, 2)), np.zeros((0, 2)))
