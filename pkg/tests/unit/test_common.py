# Built-in imports
import csv
import json

# External imports
import numpy as np
import pytest

# Own imports
from common.config import DEFAULT_CONFIG_PATH, AppConfig, load_app_config
from common.exceptions import (
    CapExceededError,
    IdsError,
    InvariantViolationError,
    SelfSimilarSpecError,
    SpecParseError,
)
from common.helpers.output_helper import OutputHelper
from spectral.stepfn import StepFunction


def test_repo_config_profiles():
    assert DEFAULT_CONFIG_PATH.name == "ids.json"
    dev = load_app_config("dev")
    assert dev.environment == "dev"
    assert dev.rank_tol == 1e-9
    assert dev.p_grid == (0.1, 0.5, 0.9)
    ci = load_app_config("ci")
    assert ci.threads == 2
    assert ci.verify_trials == 100


def test_missing_config_file_gives_defaults(tmp_path):
    config = load_app_config("dev", path=str(tmp_path / "absent.json"))
    assert config == AppConfig()


def test_unknown_profile_and_keys_are_rejected(tmp_path):
    path = tmp_path / "ids.json"
    path.write_text(json.dumps({"app_config": {"dev": {"colour": "blue"}}}))
    with pytest.raises(SpecParseError):
        load_app_config("dev", path=str(path))
    with pytest.raises(SpecParseError):
        load_app_config("prod", path=str(path))


def test_environment_variables_pick_profile_and_path(tmp_path, monkeypatch):
    path = tmp_path / "ids.json"
    path.write_text(json.dumps({"app_config": {"lab": {"dense_limit": 64}}}))
    monkeypatch.setenv("IDS_CONFIG_PATH", str(path))
    monkeypatch.setenv("IDS_ENVIRONMENT", "lab")
    config = load_app_config()
    assert config.environment == "lab"
    assert config.dense_limit == 64


def test_resolved_threads(monkeypatch):
    monkeypatch.delenv("IDS_THREADS", raising=False)
    assert AppConfig(threads=3).resolved_threads() == 3
    assert AppConfig().resolved_threads() >= 1
    monkeypatch.setenv("IDS_THREADS", "5")
    assert AppConfig(threads=3).resolved_threads() == 5


def test_with_overrides_ignores_none():
    config = AppConfig().with_overrides(rank_tol=None, dense_limit=16)
    assert config.rank_tol == 1e-9
    assert config.dense_limit == 16


def test_exception_hierarchy():
    assert issubclass(SpecParseError, ValueError)
    assert issubclass(SelfSimilarSpecError, IdsError)
    assert CapExceededError("too big", hint="use ids-mc").hint == "use ids-mc"
    error = InvariantViolationError(["a", "b"])
    assert error.failed_checks == ["a", "b"]
    assert "a, b" in str(error)
    assert SelfSimilarSpecError("bad", edge=((0, 1), (1, 0))).edge == ((0, 1), (1, 0))


def test_output_helper_writes_sorted_json(tmp_path):
    helper = OutputHelper(str(tmp_path / "out"))
    path = helper.write_json("report.json", {"b": 1, "a": [1.5]})
    text = (tmp_path / "out" / "report.json").read_text()
    assert path.endswith("report.json")
    assert text.index('"a"') < text.index('"b"')
    assert OutputHelper.read_json(path) == {"a": [1.5], "b": 1}


def test_output_helper_writes_step_function_csv(tmp_path):
    helper = OutputHelper(str(tmp_path))
    f = StepFunction(np.array([0.0, 2.0]), np.array([0.25, 1.0]))
    path = helper.write_step_function("ids.csv", f)
    with open(path, newline="") as handle:
        rows = list(csv.reader(handle))
    assert rows[0] == ["lambda", "value"]
    assert rows[1] == ["-inf", "0"]
    restored = StepFunction.from_csv_rows(rows[1:])
    assert np.array_equal(restored.breakpoints, f.breakpoints)
    assert np.array_equal(restored.values, f.values)


def test_read_json_missing_file_raises(tmp_path):
    with pytest.raises(OSError):
        OutputHelper.read_json(str(tmp_path / "missing.json"))
