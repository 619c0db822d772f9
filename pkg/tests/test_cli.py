import json

import numpy as np
import pytest

from salat.bench.runner import BenchConfig, build_training_set
from salat.cli import EXIT_DIVERGED, EXIT_SCHEMA, main
from salat.geometry import query_to_dict, save_dataset
from salat.tpgmm import TPGMM


@pytest.fixture(scope="module")
def dataset_file(tmp_path_factory):
    path = tmp_path_factory.mktemp("data") / "docker.json"
    ds = build_training_set("docker", seed=0, config=BenchConfig(horizon=30), n_demos=8)
    save_dataset(ds, path)
    return path, ds


def test_train_and_generate_tpgmm(tmp_path, dataset_file, capsys):
    data_path, ds = dataset_file
    model_path = tmp_path / "model.json"
    rc = main(
        [
            "train",
            "--data",
            str(data_path),
            "--method",
            "alpha-tpgmm",
            "--out",
            str(model_path),
            "--gmm-components",
            "4",
        ]
    )
    assert rc == 0
    assert "trained alpha-tpgmm" in capsys.readouterr().out
    model = TPGMM.load(model_path)
    assert model.variant == "alpha"

    query_path = tmp_path / "query.json"
    with open(query_path, "w") as fh:
        json.dump(query_to_dict(ds.demos[0].query), fh)
    out_path = tmp_path / "traj.json"
    rc = main(
        [
            "generate",
            "--model",
            str(model_path),
            "--query",
            str(query_path),
            "--out",
            str(out_path),
        ]
    )
    assert rc == 0
    with open(out_path) as fh:
        payload = json.load(fh)
    traj = np.array(payload["trajectory"])
    assert traj.shape == (30, 2)
    assert np.all(np.isfinite(traj))
    assert np.array(payload["attention"]).shape == (30, 2)


def test_train_salit_bundle(tmp_path, dataset_file):
    data_path, ds = dataset_file
    model_path = tmp_path / "salit.json"
    rc = main(
        [
            "train",
            "--data",
            str(data_path),
            "--method",
            "salit",
            "--out",
            str(model_path),
            "--attn-epochs",
            "40",
            "--attn-hidden",
            "8",
        ]
    )
    assert rc == 0
    with open(model_path) as fh:
        assert json.load(fh)["kind"] == "salit"


def test_generate_svg_output(tmp_path, dataset_file):
    from salat.bench.scenario import ScenarioSampler

    data_path, ds = dataset_file
    model_path = tmp_path / "m.json"
    main(
        [
            "train",
            "--data",
            str(data_path),
            "--method",
            "tpgmm",
            "--out",
            str(model_path),
            "--gmm-components",
            "4",
        ]
    )
    scenario = ScenarioSampler("docker", "train", seed=0).sample()
    scenario_path = tmp_path / "scenario.json"
    with open(scenario_path, "w") as fh:
        json.dump(scenario.to_dict(), fh)
    query_path = tmp_path / "q.json"
    with open(query_path, "w") as fh:
        json.dump(query_to_dict(scenario.query()), fh)
    svg_path = tmp_path / "out.svg"
    rc = main(
        [
            "generate",
            "--model",
            str(model_path),
            "--query",
            str(query_path),
            "--out",
            str(tmp_path / "t.json"),
            "--svg",
            str(svg_path),
            "--scenario",
            str(scenario_path),
        ]
    )
    assert rc == 0
    assert svg_path.read_text().startswith("<svg")


def test_bad_dataset_schema_exit_code(tmp_path):
    bad = tmp_path / "bad.json"
    with open(bad, "w") as fh:
        json.dump({"schema": 99, "demos": []}, fh)
    with pytest.raises(SystemExit) as exc:
        main(["train", "--data", str(bad), "--method", "tpgmm", "--out", "x.json"])
    assert exc.value.code == EXIT_SCHEMA


def test_bad_model_file_exit_code(tmp_path):
    bad = tmp_path / "bad-model.json"
    with open(bad, "w") as fh:
        json.dump({"kind": "mystery"}, fh)
    query = tmp_path / "q.json"
    with open(query, "w") as fh:
        json.dump({"frames": [{"rotation": [[1, 0], [0, 1]], "translation": [0, 0]}]}, fh)
    with pytest.raises(SystemExit) as exc:
        main(
            [
                "generate",
                "--model",
                str(bad),
                "--query",
                str(query),
                "--out",
                str(tmp_path / "o.json"),
            ]
        )
    assert exc.value.code == EXIT_SCHEMA


def test_svg_without_scenario_rejected(tmp_path, dataset_file):
    data_path, ds = dataset_file
    model_path = tmp_path / "m.json"
    main(
        [
            "train",
            "--data",
            str(data_path),
            "--method",
            "tpgmm",
            "--out",
            str(model_path),
            "--gmm-components",
            "4",
        ]
    )
    query_path = tmp_path / "q.json"
    with open(query_path, "w") as fh:
        json.dump(query_to_dict(ds.demos[0].query), fh)
    with pytest.raises(SystemExit) as exc:
        main(
            [
                "generate",
                "--model",
                str(model_path),
                "--query",
                str(query_path),
                "--out",
                str(tmp_path / "o.json"),
                "--svg",
                str(tmp_path / "o.svg"),
            ]
        )
    assert exc.value.code == EXIT_SCHEMA


def test_bench_command_writes_report(tmp_path, capsys):
    report_path = tmp_path / "report.json"
    rc = main(
        [
            "bench",
            "--task",
            "docker",
            "--methods",
            "tpgmm",
            "--trials",
            "5",
            "--report",
            str(report_path),
            "--gmm-components",
            "4",
        ]
    )
    assert rc == 0
    with open(report_path) as fh:
        data = json.load(fh)
    assert data["task"] == "docker"
    assert "tpgmm" in data["results"]
    assert "rate=" in capsys.readouterr().out


def test_bench_rejects_unknown_method(tmp_path):
    with pytest.raises(SystemExit) as exc:
        main(
            [
                "bench",
                "--task",
                "docker",
                "--methods",
                "mystery",
                "--report",
                str(tmp_path / "r.json"),
            ]
        )
    assert exc.value.code == EXIT_SCHEMA


def test_train_is_deterministic(tmp_path, dataset_file):
    data_path, _ = dataset_file
    argv = [
        "train",
        "--data",
        str(data_path),
        "--method",
        "alpha-tpgmm",
        "--gmm-components",
        "4",
        "--seed",
        "7",
    ]
    out_a = tmp_path / "a.json"
    out_b = tmp_path / "b.json"
    assert main(argv + ["--out", str(out_a)]) == 0
    assert main(argv + ["--out", str(out_b)]) == 0
    assert out_a.read_bytes() == out_b.read_bytes()


def test_bench_zero_trials_gives_empty_report(tmp_path):
    report_path = tmp_path / "r.json"
    rc = main(
        [
            "bench",
            "--task",
            "docker",
            "--methods",
            "tpgmm",
            "--trials",
            "0",
            "--report",
            str(report_path),
            "--gmm-components",
            "4",
        ]
    )
    assert rc == 0
    with open(report_path) as fh:
        data = json.load(fh)
    assert data["trials"] == 0
    result = data["results"]["tpgmm"]
    assert result["successes"] == 0
    assert sum(result["failures"].values()) == 0
