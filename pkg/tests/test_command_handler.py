# tests/test_command_handler.py - v0.1.0
import io
import json
import os
import subprocess
import sys

import pytest

from cli.command_handler import (
    EXIT_CHECK_FAILED,
    EXIT_INPUT_ERROR,
    EXIT_OK,
    FORMATS,
    RunConfig,
    build_parser,
    main,
)
from config import settings
from core.orchestrator import preset_problem
from persistence.store import problem_to_dict, write_json


def run(argv):
    out = io.StringIO()
    code = main(argv, stdout=out)
    return code, out.getvalue()


def test_config_defaults():
    config = RunConfig.from_args(build_parser().parse_args(["solve", "--preset", "toda5"]))
    assert config.seed == settings.SEED
    assert config.formats == FORMATS
    only_csv = RunConfig.from_args(build_parser().parse_args(["solve", "--preset", "toda5", "--format", "csv"]))
    assert only_csv.formats == ("csv",)


def test_validate_builtin_kind():
    code, text = run(["validate", "--kind", "lower_triangular", "--dim", "4", "--samples", "20", "--seed", "3"])
    report = json.loads(text)
    assert code == EXIT_OK
    assert report["validated"] is True
    assert report["seed"] == 3
    assert report["projector"] is True


def test_validate_half_identity_fails(tmp_path):
    path = tmp_path / "half.json"
    matrix = [[0.5 if i == j else 0.0 for j in range(9)] for i in range(9)]
    path.write_text(json.dumps({"dim": 3, "kind": "custom", "matrix": matrix}))
    code, text = run(["validate", "--spec", str(path), "--samples", "10"])
    assert code == EXIT_CHECK_FAILED
    assert "mybe_plus" in json.loads(text)["failures"]


def test_validate_malformed_spec(tmp_path):
    path = tmp_path / "broken.json"
    path.write_text("{not json")
    assert run(["validate", "--spec", str(path)])[0] == EXIT_INPUT_ERROR


def test_validate_writes_report(tmp_path):
    out = tmp_path / "reports" / "validate.json"
    code, _ = run(["validate", "--kind", "qr_skew", "--dim", "3", "--samples", "5", "--out", str(out)])
    assert code == EXIT_OK
    assert json.loads(out.read_text())["sample_count"] == 5


def test_solve_preset_writes_both_formats(tmp_path):
    stem = tmp_path / "toda"
    code, text = run(["solve", "--preset", "toda5", "--out", str(stem)])
    assert code == EXIT_OK
    assert (tmp_path / "toda.json").exists()
    assert (tmp_path / "toda.csv").exists()
    document = json.loads(text)
    assert document["summary"]["max_drift"] <= 1e-10
    assert len(document["samples"]) == 21


def test_solve_csv_to_stdout():
    code, text = run(["solve", "--preset", "triangular3", "--seed", "5", "--format", "csv"])
    assert code == EXIT_OK
    assert text.splitlines()[0].startswith("t,a_11,")
    assert len(text.splitlines()) == 22


def test_solve_rejects_grid_not_starting_at_zero(tmp_path):
    document = problem_to_dict(preset_problem("triangular3", seed=1))
    document["t_grid"] = [0.1, 0.2, 0.3]
    path = tmp_path / "problem.json"
    write_json(str(path), document)
    assert run(["solve", "--problem", str(path)])[0] == EXIT_INPUT_ERROR


def test_solve_rejects_zero_grid_step(tmp_path):
    document = problem_to_dict(preset_problem("triangular3", seed=1))
    document["t_grid"] = {"start": 0.0, "stop": 1.0, "step": 0.0}
    path = tmp_path / "problem.json"
    write_json(str(path), document)
    assert run(["solve", "--problem", str(path)])[0] == EXIT_INPUT_ERROR


def test_solve_tol_sets_the_drift_bound():
    assert run(["solve", "--preset", "toda5", "--tol", "1e-8"])[0] == EXIT_OK
    assert run(["solve", "--preset", "toda5", "--tol", "1e-300"])[0] == EXIT_CHECK_FAILED
    assert run(["solve", "--preset", "toda5", "--tol", "-1"])[0] == EXIT_INPUT_ERROR


def test_solve_with_method_override():
    code, text = run(["solve", "--preset", "triangular3", "--method", "magnus_series", "--order", "6"])
    document = json.loads(text)
    assert code == EXIT_OK
    assert document["problem"]["method"] == "magnus_series"
    assert document["problem"]["tolerances"]["magnus_order"] == 6


def test_verify_star_suite(tmp_path):
    out = tmp_path / "star.json"
    code, text = run(["verify", "star", "--seed", "42", "--out", str(out)])
    report = json.loads(text)
    assert code == EXIT_OK
    assert report["suite"] == "star"
    assert report["seed"] == 42
    assert json.loads(out.read_text())["passed"] is True


@pytest.mark.parametrize("argv", [
    [],
    ["solve"],
    ["verify", "bogus"],
    ["validate", "--kind", "custom"],
    ["solve", "--preset", "toda5", "--problem", "p.json"],
])
def test_bad_arguments(argv):
    assert run(argv)[0] == EXIT_INPUT_ERROR


def test_bad_values_are_input_errors():
    assert run(["validate", "--kind", "qr_skew", "--dim", "0"])[0] == EXIT_INPUT_ERROR
    assert run(["validate", "--kind", "qr_skew", "--samples", "0"])[0] == EXIT_INPUT_ERROR


def test_help_exits_cleanly(capsys):
    assert main(["--help"]) == EXIT_OK
    assert "validate" in capsys.readouterr().out


def test_verify_all_is_byte_identical_across_processes(tmp_path):
    root = os.path.dirname(os.path.dirname(os.path.abspath(__file__)))
    outputs = []
    for k in range(2):
        out = tmp_path / f"all{k}.json"
        completed = subprocess.run(
            [sys.executable, os.path.join(root, "main.py"), "verify", "all", "--seed", "42", "--out", str(out)],
            cwd=root, capture_output=True, timeout=600,
        )
        assert completed.returncode == EXIT_OK, completed.stderr.decode()
        outputs.append(out.read_bytes())
    assert outputs[0] == outputs[1]
