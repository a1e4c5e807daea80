import pytest

from ensemble_powerflow.exceptions import CaseSemanticError, CaseSyntaxError
from ensemble_powerflow.network import (
    BusKind,
    CaseParser,
    load_case,
    parse_case,
    serialize_case,
)

MINIMAL_CASE = """
function mpc = tiny
mpc.baseMVA = 100;
mpc.bus = [
    1   3   0   0   0   0   1   1   0   230   1   1.05   0.95;
    2   1   80  20  0   5   1   1   0   230   1   1.05   0.95;
];
mpc.gen = [
    1   0   0   50  -50  1.02   100   1   200   10;
];
mpc.branch = [
    1   2   0.01   0.1   0.02   150   0   0   0   0   1;
    1   2   0.01   0.1   0.02   150   0   0   0   0   0;
];
mpc.gencost = [
    2   0   0   3   0.02   12   30;
];
"""


class TestCaseParser:
    def test_parse_bundled_case5(self, case5):
        """Test the bundled case5 counts and slack bus"""
        assert case5.name == "case5"
        assert case5.n_bus == 5
        assert case5.n_branch == 6
        assert case5.n_gen == 5
        assert case5.slack_index == 3
        assert list(case5.indices_of(BusKind.PV)) == [0, 2, 4]

    def test_case5_per_unit_values(self, case5):
        """Test that loads and limits are converted to per-unit"""
        assert case5.p_load[1] == pytest.approx(3.0)
        assert case5.q_load[3] == pytest.approx(1.3147)
        assert case5.generators[2].p_max == pytest.approx(5.2)
        assert case5.branches[0].s_max == pytest.approx(4.0)
        assert [br.is_rated for br in case5.branches] == [
            True,
            False,
            False,
            False,
            False,
            True,
        ]

    def test_case5_linear_costs(self, case5):
        """Test that two-coefficient polynomial costs become c1 only"""
        costs = [g.cost for g in case5.generators]
        assert [c.c1 for c in costs] == [14, 15, 30, 40, 10]
        assert all(c.c0 == 0 and c.c2 == 0 for c in costs)

    def test_parse_minimal_case(self):
        """Test shunts, voltage setpoints, quadratic costs and dropped branches"""
        case = parse_case(MINIMAL_CASE)

        assert case.name == "tiny"
        assert case.n_branch == 1
        assert case.buses[0].v_setpoint == pytest.approx(1.02)
        assert case.buses[1].b_shunt == pytest.approx(0.05)
        assert case.generators[0].p_min == pytest.approx(0.1)
        cost = case.generators[0].cost
        assert (cost.c0, cost.c1, cost.c2) == (30, 12, 0.02)

    def test_no_slack_bus_raises_error(self, fixtures_dir):
        """Test that a case without a slack bus is a semantic error"""
        text = (fixtures_dir / "no_slack.m").read_text()

        with pytest.raises(CaseSemanticError, match="no slack bus"):
            parse_case(text)

    def test_missing_base_mva_raises_error(self):
        """Test that a case without mpc.baseMVA is a syntax error"""
        text = MINIMAL_CASE.replace("mpc.baseMVA = 100;", "")

        with pytest.raises(CaseSyntaxError, match="baseMVA"):
            parse_case(text)

    def test_malformed_row_raises_error(self):
        """Test that a non-numeric matrix entry is a syntax error"""
        text = MINIMAL_CASE.replace("80  20", "80  abc")

        with pytest.raises(CaseSyntaxError, match="malformed matrix row in mpc.bus"):
            parse_case(text)

    def test_unknown_bus_reference_raises_error(self):
        """Test that a branch to an unknown bus is a semantic error"""
        text = MINIMAL_CASE.replace("1   2   0.01", "1   7   0.01", 1)

        with pytest.raises(CaseSemanticError, match="unknown bus 7"):
            parse_case(text)

    def test_disconnected_network_raises_error(self):
        """Test that islands are rejected"""
        text = MINIMAL_CASE.replace(
            "0.02   150   0   0   0   0   1;", "0.02   150   0   0   0   0   0;"
        )

        with pytest.raises(CaseSemanticError, match="not connected"):
            parse_case(text)

    def test_json_serialization_round_trip(self, case5):
        """Test that the canonical JSON parses back to an equal case"""
        assert parse_case(serialize_case(case5)) == case5

    def test_invalid_json_raises_error(self):
        """Test that broken JSON is a syntax error"""
        with pytest.raises(CaseSyntaxError, match="invalid case JSON"):
            parse_case('{"name": ')

    def test_from_ppc_matches_matpower_text(self, case5):
        """Test that a PYPOWER dictionary converts like the MATPOWER text"""
        ppc = {
            "baseMVA": 100.0,
            "bus": [
                [1, 3, 0, 0, 0, 0, 1, 1, 0, 230, 1, 1.05, 0.95],
                [2, 1, 80, 20, 0, 5, 1, 1, 0, 230, 1, 1.05, 0.95],
            ],
            "gen": [[1, 0, 0, 50, -50, 1.02, 100, 1, 200, 10]],
            "branch": [
                [1, 2, 0.01, 0.1, 0.02, 150, 0, 0, 0, 0, 1],
                [1, 2, 0.01, 0.1, 0.02, 150, 0, 0, 0, 0, 0],
            ],
            "gencost": [[2, 0, 0, 3, 0.02, 12, 30]],
        }

        assert CaseParser().from_ppc(ppc, "tiny") == parse_case(MINIMAL_CASE)


class TestLoadCase:
    def test_missing_file_raises_error(self, tmp_path):
        """Test that an unknown name that is not a file raises FileNotFoundError"""
        with pytest.raises(FileNotFoundError, match="case file not found"):
            load_case(tmp_path / "missing.m")

    def test_load_json_file(self, fixtures_dir):
        """Test loading a canonical JSON case from disk"""
        case = load_case(fixtures_dir / "two_bus.json")

        assert case.name == "two_bus"
        assert case.n_bus == 2

    def test_load_case118(self):
        """Test that the IEEE 118-bus case comes from PYPOWER"""
        pytest.importorskip("pypower")

        case = load_case("case118")

        assert case.n_bus == 118
