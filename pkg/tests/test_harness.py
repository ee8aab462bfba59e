import csv
import json
import math
import os

import pytest

from ballsgd.errors import ConfigError
from ballsgd.harness import (ExperimentConfig, run_config, sweep_epsilon)
from ballsgd.optimizer import CONVERGED


def practical_raw(**overrides):
    raw = {
        "objective": {"kind": "quartic", "dim": 2, "sigma": 1.0},
        "noise": {"kind": "uniform-ball", "sigma": 1.0},
        "schedule": {"mode": "manual", "eta": 0.01, "ball_radius": 0.5,
                     "k0": 3000, "ko": 400, "epsilon": 6e-5, "p": 0.1},
        "algorithm": "ball-sgd",
        "n_seeds": 2,
        "base_seed": 0,
        "budget_mode": "unlimited-episodes",
    }
    raw.update(overrides)
    return raw


def test_config_rejects_unknown_top_level_key():
    with pytest.raises(ConfigError) as exc:
        ExperimentConfig.from_dict(practical_raw(bogus=1))
    assert exc.value.field == "bogus"


def test_config_rejects_unknown_nested_key_with_dotted_path():
    raw = practical_raw()
    raw["objective"]["extra"] = 1
    with pytest.raises(ConfigError) as exc:
        ExperimentConfig.from_dict(raw)
    assert exc.value.field == "objective.extra"


def test_config_requires_objective_fields():
    raw = practical_raw()
    del raw["objective"]["dim"]
    with pytest.raises(ConfigError) as exc:
        ExperimentConfig.from_dict(raw)
    assert exc.value.field == "objective.dim"


def test_config_rejects_injected_noise_kind():
    with pytest.raises(ConfigError) as exc:
        ExperimentConfig.from_dict(practical_raw(
            noise={"kind": "injected", "sigma": 1.0}))
    assert exc.value.field == "noise.kind"


def test_config_rejects_bad_scalars():
    for key, value in [("n_seeds", 0), ("threads", 0), ("max_steps", 0),
                       ("algorithm", "adam"), ("budget_mode", "forever"),
                       ("base_seed", 1.5)]:
        with pytest.raises(ConfigError) as exc:
            ExperimentConfig.from_dict(practical_raw(**{key: value}))
        assert exc.value.field == key


def test_config_json_round_trip():
    config = ExperimentConfig.from_json(json.dumps(practical_raw()))
    again = ExperimentConfig.from_dict(config.to_dict())
    assert again == config


def test_config_rejects_invalid_json_text():
    with pytest.raises(ConfigError):
        ExperimentConfig.from_json("{not json")


def test_convex_quadratic_single_seed_converges(tmp_path):
    raw = {
        "objective": {"kind": "quadratic", "H": [[1.0, 0.0], [0.0, 1.0]],
                      "b": [0.0, 0.0], "sigma": 0.0},
        "noise": {"kind": "uniform-ball", "sigma": 0.0},
        "schedule": {"mode": "manual", "eta": 0.05, "ball_radius": 5.0,
                     "k0": 200, "ko": 100, "epsilon": 0.01},
        "n_seeds": 1,
        "budget_mode": "unlimited-episodes",
    }
    config = ExperimentConfig.from_dict(raw)
    artifacts = run_config(config, out_dir=str(tmp_path / "out"))
    assert artifacts.summary["convergence_fraction"] == 1.0
    assert artifacts.results[0].terminated == CONVERGED


def test_artifact_files_and_seed_fanout(tmp_path):
    config = ExperimentConfig.from_dict(practical_raw(base_seed=17))
    artifacts = run_config(config, out_dir=str(tmp_path / "out"))
    names = sorted(os.listdir(tmp_path / "out"))
    assert names == ["episodes.csv", "run_000.json", "run_001.json",
                     "schedule.json", "summary.json"]
    assert [r.seed for r in artifacts.results] == [17, 18]
    with open(tmp_path / "out" / "run_001.json") as fh:
        assert json.load(fh)["seed"] == 18


def test_rerun_is_byte_identical(tmp_path):
    config = ExperimentConfig.from_dict(practical_raw())
    for name in ("a", "b"):
        run_config(config, out_dir=str(tmp_path / name))
    for filename in os.listdir(tmp_path / "a"):
        with open(tmp_path / "a" / filename, "rb") as fa, \
                open(tmp_path / "b" / filename, "rb") as fb:
            assert fa.read() == fb.read(), filename


def test_csv_matches_summary_numbers(tmp_path):
    config = ExperimentConfig.from_dict(practical_raw())
    artifacts = run_config(config, out_dir=str(tmp_path / "out"))
    with open(tmp_path / "out" / "episodes.csv", newline="") as fh:
        rows = list(csv.DictReader(fh))
    assert len(rows) == len(artifacts.summary["episodes"])
    for parsed, ref in zip(rows, artifacts.summary["episodes"]):
        assert int(parsed["seed"]) == ref["seed"]
        assert float(parsed["f_drop"]) == ref["f_drop"]
        assert parsed["pass"] == ("1" if ref["pass"] else "0")


def test_csv_dialect(tmp_path):
    config = ExperimentConfig.from_dict(practical_raw(n_seeds=1))
    run_config(config, out_dir=str(tmp_path / "out"))
    with open(tmp_path / "out" / "episodes.csv", "rb") as fh:
        data = fh.read()
    assert b"\r" not in data
    header = data.split(b"\n", 1)[0].decode()
    assert header == ("seed,episode,start_step,length,f_anchor,f_exit,"
                      "f_drop,threshold,pass")


def test_threaded_runs_match_sequential(tmp_path):
    sequential = run_config(ExperimentConfig.from_dict(practical_raw()),
                            out_dir=str(tmp_path / "seq"))
    threaded = run_config(ExperimentConfig.from_dict(
        practical_raw(threads=2)), out_dir=str(tmp_path / "par"))
    assert [r.to_dict() for r in sequential.results] == \
        [r.to_dict() for r in threaded.results]


def test_summary_embeds_config_without_output_dir(tmp_path):
    config = ExperimentConfig.from_dict(practical_raw(
        output_dir=str(tmp_path / "somewhere")))
    artifacts = run_config(config)
    assert artifacts.summary["config"]["output_dir"] is None
    assert artifacts.summary["config"]["n_seeds"] == 2


def test_run_config_requires_some_output_dir():
    config = ExperimentConfig.from_dict(practical_raw())
    with pytest.raises(ConfigError) as exc:
        run_config(config)
    assert exc.value.field == "output_dir"


def sweep_config():
    return ExperimentConfig.from_dict(practical_raw(
        schedule={"mode": "theoretical", "epsilon": 1e-3, "p": 0.1},
        budget_mode="theorem",
        max_steps=2000,
    ))


def test_sweep_rows_sorted_and_k0_monotone(tmp_path):
    result = sweep_epsilon(sweep_config(), [1e-2, 1e-3, 5e-3], n_seeds=1,
                           out_dir=str(tmp_path / "sweep"))
    eps = [row["epsilon"] for row in result.rows]
    assert eps == sorted(eps, reverse=True)
    k0s = [row["k0"] for row in result.rows]
    assert all(b > a for a, b in zip(k0s, k0s[1:]))
    assert all(row["log10_inv_epsilon"] ==
               pytest.approx(math.log10(1.0 / row["epsilon"]))
               for row in result.rows)
    assert os.path.exists(tmp_path / "sweep" / "sweep.csv")
    assert os.path.exists(tmp_path / "sweep" / "sweep.json")


def test_sweep_marks_infeasible_epsilon_skipped():
    # delta = sqrt(rho * epsilon) > 1 makes the target infeasible
    result = sweep_epsilon(sweep_config(), [1e-2, 100.0], n_seeds=1)
    by_eps = {row["epsilon"]: row for row in result.rows}
    assert by_eps[100.0]["skipped"] is True
    assert math.isnan(by_eps[100.0]["k0"])
    assert by_eps[1e-2]["skipped"] is False
    assert by_eps[1e-2]["k0"] > 0


def test_sweep_deduplicates_epsilons():
    result = sweep_epsilon(sweep_config(), [1e-2, 1e-2], n_seeds=1)
    assert len(result.rows) == 1
