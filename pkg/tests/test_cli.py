import json
import logging

import numpy as np
import pytest

from catbreak.attacks import METHODS, feat_attack
from catbreak.bench import INTERNAL_ERROR
from catbreak.categorical.io import read_dataset
from catbreak.classifier import load_model
from catbreak.cli import EXIT_ERROR, EXIT_PARTIAL, build_parser, main
from catbreak.errors import CatbreakError


@pytest.fixture(autouse=True)
def restore_root_logger():
    root = logging.getLogger()
    handlers, level = list(root.handlers), root.level
    yield
    root.handlers[:] = handlers
    root.setLevel(level)


@pytest.fixture
def workspace(tmp_path):
    out = str(tmp_path)
    assert main(["--out-dir", out, "gen-model", "--n", "6", "--m", "3", "--d", "4",
                 "--hidden", "8", "--sensitivity", "skewed:1"]) == 0
    model = str(tmp_path / "model.bin")
    assert main(["--out-dir", out, "--seed", "2", "gen-data", "--model", model,
                 "--count", "6"]) == 0
    return tmp_path


def write_spec(tmp_path, **extra):
    spec = {"model": "model.bin", "data": "data.jsonl", "methods": ["feat", "ompgs"],
            "budgets": [2], **extra}
    path = tmp_path / "bench.json"
    path.write_text(json.dumps(spec))
    return str(path)


def test_parser_lists_every_command():
    parser = build_parser()
    commands = parser._subparsers._group_actions[0].choices
    assert set(commands) == {
        "gen-model", "gen-data", "attack", "bench", "alpha-sweep", "sensitivity",
        "fidelity", "regret-sim", "stationarity",
    }


def test_gen_model_and_data(workspace):
    model = load_model(workspace / "model.bin")
    assert model.values_per_feature == (3,) * 6
    assert len(model.planted) == 1
    assert len(read_dataset(workspace / "data.jsonl")) == 6


def test_gen_model_affine(tmp_path):
    out = tmp_path / "affine.bin"
    assert main(["gen-model", "--kind", "affine", "--n", "3", "--m", "2", "--out", str(out)]) == 0
    assert load_model(out).kind == "affine"


def test_gen_model_exports_and_reuses_embedding_table(tmp_path):
    table = tmp_path / "table.bin"
    assert main(["gen-model", "--kind", "random", "--n", "4", "--m", "3", "--d", "2",
                 "--out", str(tmp_path / "a.bin"), "--embedding-out", str(table)]) == 0
    assert main(["gen-model", "--kind", "random", "--hidden", "4", "--embedding", str(table),
                 "--out", str(tmp_path / "b.bin")]) == 0
    first, second = load_model(tmp_path / "a.bin"), load_model(tmp_path / "b.bin")
    assert second.values_per_feature == (3,) * 4
    np.testing.assert_array_equal(second.table.vectors, first.table.vectors)


def test_gen_model_rejects_embedding_for_affine(tmp_path, capsys):
    code = main(["gen-model", "--kind", "affine", "--embedding-out", str(tmp_path / "t.bin"),
                 "--out", str(tmp_path / "m.bin")])
    assert code == EXIT_ERROR
    assert "no embedding table" in capsys.readouterr().err


def test_attack_writes_results_and_aggregate(workspace):
    model, data = str(workspace / "model.bin"), str(workspace / "data.jsonl")
    out = workspace / "attack.jsonl"
    assert main(["attack", "--method", "feat", "--model", model, "--data", data,
                 "--budget", "2", "--out", str(out)]) == 0
    lines = [json.loads(line) for line in out.read_text().splitlines()]
    assert len(lines) == 7
    assert [line["instance"] for line in lines[:-1]] == list(range(6))
    assert lines[-1]["aggregate"] is True
    assert lines[-1]["attempted"] == 6
    assert lines[-1]["config"]["budget"] == 2


def test_black_box_attack_refuses_gradient_methods(workspace, capsys):
    model, data = str(workspace / "model.bin"), str(workspace / "data.jsonl")
    code = main(["attack", "--method", "feat", "--black-box", "--model", model, "--data", data])
    assert code == EXIT_ERROR
    assert "BLACK_BOX_MODEL" in capsys.readouterr().err


def test_attack_keeps_going_after_a_failed_instance(workspace, monkeypatch):
    calls = []

    def flaky(handle, inst, cfg):
        calls.append(inst)
        if len(calls) == 2:
            raise CatbreakError("NO_ALTERNATIVES", "nothing to try")
        if len(calls) == 3:
            raise RuntimeError("worker died")
        return feat_attack(handle, inst, cfg)

    monkeypatch.setitem(METHODS, "feat", flaky)
    model, data = str(workspace / "model.bin"), str(workspace / "data.jsonl")
    out = workspace / "partial.jsonl"
    code = main(["attack", "--model", model, "--data", data, "--budget", "2", "--out", str(out)])
    assert code == EXIT_PARTIAL
    lines = [json.loads(line) for line in out.read_text().splitlines()]
    assert len(lines) == 7
    assert lines[1]["error"] == "NO_ALTERNATIVES"
    assert lines[2]["error"] == INTERNAL_ERROR
    assert lines[2]["message"] == "RuntimeError: worker died"
    assert all("error" not in line for line in lines[3:6])
    assert lines[-1]["failures"] == 2
    assert lines[-1]["attempted"] == 6


def test_invalid_budget_exits_with_error(workspace, capsys):
    model, data = str(workspace / "model.bin"), str(workspace / "data.jsonl")
    code = main(["attack", "--model", model, "--data", data, "--budget", "-1"])
    assert code == EXIT_ERROR
    assert "budget must be >= 0" in capsys.readouterr().err


def test_bench_writes_outputs(workspace):
    spec = write_spec(workspace)
    out = workspace / "bench-out"
    assert main(["--out-dir", str(out), "--threads", "2", "bench", "--spec", spec]) == 0
    assert (out / "metrics.csv").exists()
    report = json.loads((out / "report.json").read_text())
    assert report["config"]["threads"] == 2


def test_bench_exits_two_on_failed_runs(workspace):
    spec = write_spec(
        workspace,
        methods=["gradattack"],
        overrides={"gradattack": {"combo_depth": 2, "exhaustive_limit": 1}},
    )
    assert main(["--out-dir", str(workspace / "b"), "bench", "--spec", spec]) == EXIT_PARTIAL


def test_alpha_sweep_writes_table(workspace):
    spec = write_spec(workspace, methods=["feat", "feat-b"])
    out = workspace / "sweep"
    assert main(["--out-dir", str(out), "alpha-sweep", "--spec", spec, "--alphas", "0,4"]) == 0
    table = json.loads((out / "alpha_sweep.json").read_text())
    assert {row["alpha"] for row in table["rows"]} == {0.0, 4.0}
    assert (out / "alpha4_metrics.csv").exists()


def test_sensitivity_and_fidelity_reports(workspace):
    model, data = str(workspace / "model.bin"), str(workspace / "data.jsonl")
    csv_path = workspace / "fs.csv"
    assert main(["--out-dir", str(workspace), "sensitivity", "--model", model, "--data", data,
                 "--csv", str(csv_path)]) == 0
    report = json.loads((workspace / "sensitivity.json").read_text())
    assert len(report["values"]) == 6
    assert csv_path.read_text().startswith("feature,fs")

    assert main(["--out-dir", str(workspace), "fidelity", "--model", model, "--data", data,
                 "--sample", "3"]) == 0
    fidelity = json.loads((workspace / "fidelity.json").read_text())
    assert fidelity["instances"] == 3


def test_regret_sim(tmp_path, capsys):
    out = tmp_path / "regret.json"
    assert main(["regret-sim", "--arms", "1.0:0.1,1.5:0.1", "--horizon", "500",
                 "--seeds", "5", "--out", str(out)]) == 0
    report = json.loads(out.read_text())
    assert report["seeds"] == 5
    assert report["empirical_regret_mean"] <= report["bound"]
    assert "bound" in capsys.readouterr().out


def test_regret_sim_rejects_bad_arms(tmp_path):
    assert main(["--out-dir", str(tmp_path), "regret-sim", "--arms", "3.0:0.1,1.0"]) == EXIT_ERROR


def test_stationarity_compare(workspace):
    model, data = str(workspace / "model.bin"), str(workspace / "data.jsonl")
    assert main(["--out-dir", str(workspace), "stationarity", "--model", model, "--data", data,
                 "--top-k", "2", "--window", "3", "--compare"]) == 0
    report = json.loads((workspace / "stationarity.json").read_text())
    assert set(report) == {"version", "sensitive", "insensitive"}
    assert report["sensitive"]["marginal"] is True


def test_stationarity_attack_reward_readings(workspace):
    model, data = str(workspace / "model.bin"), str(workspace / "data.jsonl")
    out = workspace / "raw.json"
    assert main(["stationarity", "--model", model, "--data", data, "--top-k", "2",
                 "--window", "3", "--attack-reward", "--out", str(out)]) == 0
    report = json.loads(out.read_text())
    assert report["sensitive"]["marginal"] is False
    assert len(report["sensitive"]["features"]) <= 2


def test_stationarity_rejects_instance_out_of_range(workspace):
    model, data = str(workspace / "model.bin"), str(workspace / "data.jsonl")
    code = main(["--out-dir", str(workspace), "stationarity", "--model", model, "--data", data,
                 "--instance", "99"])
    assert code == EXIT_ERROR
