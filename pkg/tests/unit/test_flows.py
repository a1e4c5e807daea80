import numpy as np
import pytest

from ensemble_powerflow.powerflow import VoltageState, compute_flows, solve_ac

E2 = (1 + np.sqrt(0.99)) / 2


class TestVoltageState:
    def test_features_are_interleaved(self):
        """Test the [e1, f1, e2, f2] feature layout and its inverse"""
        state = VoltageState(e=np.array([1.0, 0.9]), f=np.array([0.0, -0.1]))

        x = state.as_features()

        np.testing.assert_array_equal(x, [1.0, 0.0, 0.9, -0.1])
        back = VoltageState.from_features(x)
        np.testing.assert_array_equal(back.e, state.e)
        np.testing.assert_array_equal(back.f, state.f)

    def test_mismatched_lengths_raise_error(self):
        """Test that e and f must have equal length"""
        with pytest.raises(ValueError, match="equal length"):
            VoltageState(e=np.ones(2), f=np.ones(3))


class TestComputeFlows:
    def test_flat_profile_unloaded_network(self, two_bus_case):
        """Test that equal voltages give zero injections and flows"""
        state = VoltageState(e=np.ones(2), f=np.zeros(2))

        flows = compute_flows(two_bus_case, state)

        for values in (flows.p_inj, flows.q_inj, flows.p_flow, flows.q_flow):
            np.testing.assert_allclose(values, 0.0, atol=1e-12)

    def test_two_bus_flows(self, two_bus_case):
        """Test from-end flows of the two-bus solution"""
        state = solve_ac(two_bus_case, tol=1e-12)

        flows = compute_flows(two_bus_case, state)

        assert flows.p_flow[0] == pytest.approx(0.5, abs=1e-9)
        assert flows.q_flow[0] == pytest.approx((1 - E2) / 0.1, abs=1e-9)
        assert flows.p_inj[1] == pytest.approx(-0.5, abs=1e-9)
        assert flows.active_losses == pytest.approx(0.0, abs=1e-9)

    def test_losses_are_non_negative(self, case5):
        """Test that total injection equals non-negative network losses"""
        flows = compute_flows(case5, solve_ac(case5))

        assert flows.active_losses >= 0.0
        assert flows.active_losses == pytest.approx(np.sum(flows.p_inj))

    def test_wrong_bus_count_raises_error(self, case5):
        """Test that the state must match the case size"""
        with pytest.raises(ValueError, match="voltage state has 2 buses"):
            compute_flows(case5, VoltageState(e=np.ones(2), f=np.zeros(2)))
