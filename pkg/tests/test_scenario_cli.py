import copy
import subprocess
import sys
from pathlib import Path

import pytest
import yaml

from massfringe.errors import ScenarioError
from massfringe.scenario import load_scenario, validate_scenario

SCENARIOS = Path(__file__).resolve().parent.parent / "scenarios"
ALL_FIXTURES = sorted(SCENARIOS.glob("*.yaml"))


def base_scenario() -> dict:
    return {
        "units": "natural",
        "experiment": "pattern",
        "method": "shifted",
        "initial_state": {"kind": "double-slit", "k0": 1000.0,
                          "slit_width": 0.03, "y_width": 0.05},
        "spectrum": {"kind": "discrete",
                     "components": [{"mass": 20000.0, "weight": 1.0}]},
        "geometry": {"L": 100.0},
        "worldline": {"kind": "rest"},
    }


class TestValidation:
    @pytest.mark.parametrize("path", ALL_FIXTURES, ids=lambda p: p.stem)
    def test_shipped_fixtures_validate(self, path):
        s = load_scenario(path)
        assert s.units == "natural"

    def test_units_field_is_mandatory(self):
        data = base_scenario()
        del data["units"]
        with pytest.raises(ScenarioError, match="units"):
            validate_scenario(data)
        data["units"] = "si"
        with pytest.raises(ScenarioError, match="units"):
            validate_scenario(data)

    def test_unknown_keys_rejected(self):
        data = base_scenario()
        data["turbo"] = True
        with pytest.raises(ScenarioError, match="turbo"):
            validate_scenario(data)
        data = base_scenario()
        data["initial_state"]["velocity"] = 3.0
        with pytest.raises(ScenarioError, match="velocity"):
            validate_scenario(data)

    def test_weights_must_sum_to_one_with_field_path(self):
        data = base_scenario()
        data["spectrum"]["components"] = [{"mass": 20000.0, "weight": 0.6},
                                          {"mass": 21000.0, "weight": 0.6}]
        with pytest.raises(ScenarioError, match="weights must sum to 1"):
            validate_scenario(data)

    def test_negative_mass_reported_with_index(self):
        data = base_scenario()
        data["spectrum"]["components"] = [{"mass": -5.0, "weight": 1.0}]
        with pytest.raises(ScenarioError, match=r"components\[0\].mass"):
            validate_scenario(data)

    def test_experiment_cross_requirements(self):
        data = base_scenario()
        data["experiment"] = "tau-dec"
        data["worldline"] = {"kind": "uniform-acceleration", "accel": 5e-6}
        with pytest.raises(ScenarioError, match="thermal"):
            validate_scenario(data)
        data = base_scenario()
        data["experiment"] = "frame-equivalence"
        with pytest.raises(ScenarioError, match="gravity"):
            validate_scenario(data)

    def test_lab_method_needs_gravity(self):
        data = base_scenario()
        data["method"] = "lab"
        with pytest.raises(ScenarioError, match="gravity"):
            validate_scenario(data)

    def test_builders(self):
        s = validate_scenario(base_scenario())
        assert s.build_initial_state().k0 == 1000.0
        assert s.build_spectrum().mean_mass == 20000.0
        assert s.build_worldline().kind == "rest"


class TestOverridesAndLoading:
    def test_override_changes_nested_value(self, tmp_path):
        path = tmp_path / "s.yaml"
        path.write_text(yaml.safe_dump(base_scenario()))
        s = load_scenario(path, overrides=["geometry.L=250.0",
                                           "initial_state.k0=500"])
        assert s.geometry.L == 250.0
        assert s.initial_state.k0 == 500.0

    def test_override_must_contain_equals(self, tmp_path):
        path = tmp_path / "s.yaml"
        path.write_text(yaml.safe_dump(base_scenario()))
        with pytest.raises(ScenarioError, match="key.path=value"):
            load_scenario(path, overrides=["geometry.L"])

    def test_missing_file(self):
        with pytest.raises(ScenarioError, match="not found"):
            load_scenario("/nonexistent/path.yaml")

    def test_non_mapping_document(self, tmp_path):
        path = tmp_path / "s.yaml"
        path.write_text("- just\n- a\n- list\n")
        with pytest.raises(ScenarioError, match="mapping"):
            load_scenario(path)


def run_cli(*args):
    return subprocess.run([sys.executable, "-m", "massfringe.cli", *args],
                          capture_output=True, text=True)


class TestCli:
    def test_run_pattern_scenario(self, tmp_path):
        out = tmp_path / "out"
        res = run_cli("run", str(SCENARIOS / "pattern_rest.yaml"),
                      "--output-dir", str(out))
        assert res.returncode == 0, res.stderr
        assert (out / "pattern.csv").exists()
        assert (out / "pattern.json").exists()
        assert "pattern.csv" in res.stdout

    def test_quiet_suppresses_output(self, tmp_path):
        res = run_cli("run", str(SCENARIOS / "pattern_rest.yaml"),
                      "--output-dir", str(tmp_path), "--quiet")
        assert res.returncode == 0
        assert res.stdout == ""

    def test_validation_error_exits_1(self, tmp_path):
        bad = tmp_path / "bad.yaml"
        data = base_scenario()
        data["spectrum"]["components"][0]["mass"] = -1.0
        bad.write_text(yaml.safe_dump(data))
        res = run_cli("run", str(bad), "--output-dir", str(tmp_path))
        assert res.returncode == 1
        assert "error" in res.stderr

    def test_numerical_failure_exits_2(self, tmp_path):
        # force an unresolvable grid: the slit structure aliases on it
        res = run_cli("run", str(SCENARIOS / "pattern_rest.yaml"),
                      "--output-dir", str(tmp_path),
                      "--override", "grid.points=64",
                      "--override", "grid.extent=8.0")
        assert res.returncode == 2
        assert "numerical failure" in res.stderr

    def test_determinism_byte_identical_outputs(self, tmp_path):
        outs = []
        for name in ("a", "b"):
            out = tmp_path / name
            res = run_cli("run", str(SCENARIOS / "pattern_rest.yaml"),
                          "--output-dir", str(out), "--quiet")
            assert res.returncode == 0
            outs.append((out / "pattern.csv").read_bytes())
        assert outs[0] == outs[1]

    def test_override_propagates_to_result(self, tmp_path):
        res = run_cli("run", str(SCENARIOS / "pattern_rest.yaml"),
                      "--output-dir", str(tmp_path),
                      "--override", "fit.window_periods=4")
        assert res.returncode == 0, res.stderr
