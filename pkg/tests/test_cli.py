"""End-to-end CLI behavior: reports, exit codes, and the benchmark harness."""

import json
import pathlib
import subprocess
import sys

import pytest

from qoscompose import load_classifier
from qoscompose.cli import _parse_grid, main, run_bench

FIXTURES = pathlib.Path(__file__).resolve().parent.parent / "fixtures"


def fixture_args(command, **extra):
    argv = [
        command,
        "--registry", str(extra.pop("registry", FIXTURES / "registry.csv")),
        "--plan", str(FIXTURES / "plan.json"),
        "--taxonomy", str(FIXTURES / "taxonomy.txt"),
        "--config", str(extra.pop("config", FIXTURES / "config.json")),
    ]
    for key, value in extra.items():
        argv += [f"--{key}", str(value)]
    return argv


def test_compose_on_shipped_fixtures(capsys):
    assert main(fixture_args("compose")) == 0
    report = json.loads(capsys.readouterr().out)
    primary = report["primary"]
    assert {t["task"]: t["service"] for t in primary["tasks"]} == {
        "book_vehicle": "bv_fast",
        "plan_route": "pr_city",
        "process_payment": "pay_card",
    }
    assert primary["score"] == 0.5625
    alternative = report["alternative"]
    assert {t["task"]: t["service"] for t in alternative["tasks"]} == {
        "book_vehicle": "bv_fast",
        "plan_route": "pr_scenic",
        "process_payment": "pay_card",
    }
    for section in (primary, alternative):
        product = 1.0
        for row in section["tasks"]:
            assert row["final_utility"] == row["utility"] * row["link_quality"]
            product *= row["final_utility"]
        assert section["score"] == product
    # the swap turns the route->payment link Exact
    by_task = {t["task"]: t for t in alternative["tasks"]}
    assert by_task["process_payment"]["link_quality"] == 1.0
    assert by_task["plan_route"]["links"][0]["pairs"][0]["match"] == "Exact"


def test_compose_is_deterministic(capsys):
    assert main(fixture_args("compose")) == 0
    first = capsys.readouterr().out
    assert main(fixture_args("compose")) == 0
    assert capsys.readouterr().out == first


def test_compose_out_flag_matches_stdout(tmp_path, capsys):
    out = tmp_path / "report.json"
    assert main(fixture_args("compose", out=out)) == 0
    assert capsys.readouterr().out == ""
    assert main(fixture_args("compose")) == 0
    assert out.read_text() == capsys.readouterr().out


def test_missing_input_file_exits_3(capsys):
    code = main(fixture_args("compose", registry="/nonexistent/registry.csv"))
    assert code == 3
    assert "error" in capsys.readouterr().err


def test_broken_registry_exits_10(tmp_path, capsys):
    bad = tmp_path / "registry.csv"
    bad.write_text("service_id,task_id,latency:-,inputs,outputs\nx,t,abc,A,B\n")
    code = main(fixture_args("compose", registry=bad))
    assert code == 10
    assert capsys.readouterr().err.startswith("error [load]:")


def test_all_disjoint_links_exit_41(tmp_path, capsys):
    # route services demand Boat while every vehicle service emits Car kinds,
    # and Car/Boat are declared disjoint
    lines = (FIXTURES / "registry.csv").read_text().splitlines()
    rewritten = [
        line.replace(",Vehicle,CityRoute", ",Boat,CityRoute")
        .replace(",Car,Route", ",Boat,Route")
        .replace(",Auto,Route", ",Boat,Route")
        for line in lines
    ]
    bad = tmp_path / "registry.csv"
    bad.write_text("\n".join(rewritten) + "\n")
    code = main(fixture_args("compose", registry=bad, threshold="0.0"))
    assert code == 41
    err = capsys.readouterr().err
    assert err.startswith("error [selection]:")
    assert "plan_route" in err


def test_threshold_override_thins_queues(capsys):
    assert main(fixture_args("compose", threshold="0.9")) == 0
    report = json.loads(capsys.readouterr().out)
    assert report["alternative"] is None  # every queue is a singleton
    assert report["primary"]["score"] == 0.5625


def test_unreachable_demand_exits_26(tmp_path, capsys):
    config = json.loads((FIXTURES / "config.json").read_text())
    config["request"]["ranges"]["response_time"] = [900, 2000]
    path = tmp_path / "config.json"
    path.write_text(json.dumps(config))
    code = main(fixture_args("compose", config=path))
    assert code == 26
    assert capsys.readouterr().err.startswith("error [training]:")


def test_impossible_threshold_exits_40(capsys):
    code = main(fixture_args("compose", threshold="1.0"))
    assert code == 40
    assert capsys.readouterr().err.startswith("error [selection]:")


def test_replace_selected_service(capsys):
    args = fixture_args("replace") + ["--task", "plan_route", "--service", "pr_city"]
    assert main(args) == 0
    report = json.loads(capsys.readouterr().out)
    by_task = {t["task"]: t for t in report["tasks"]}
    assert by_task["plan_route"]["service"] == "pr_scenic"
    # both neighbors link Exact to the stand-in, so the averaged quality is 1.0
    assert by_task["plan_route"]["link_quality"] == 1.0
    # downstream selections keep their original stored utilities
    assert by_task["process_payment"]["final_utility"] == 0.75


def test_replace_with_saved_composite(tmp_path, capsys):
    saved = tmp_path / "composite.json"
    assert main(fixture_args("compose", out=saved)) == 0
    args = fixture_args("replace") + [
        "--task", "plan_route",
        "--service", "pr_city",
        "--composite", str(saved),
    ]
    assert main(args) == 0
    report = json.loads(capsys.readouterr().out)
    assert {t["task"]: t["service"] for t in report["tasks"]} == {
        "book_vehicle": "bv_fast",
        "plan_route": "pr_scenic",
        "process_payment": "pay_card",
    }


def test_replace_error_codes(capsys):
    base = fixture_args("replace")
    assert main(base + ["--task", "no_such_task", "--service", "pr_city"]) == 14
    capsys.readouterr()
    # bv_cheap never enters a queue, so it cannot have been selected
    assert main(base + ["--task", "book_vehicle", "--service", "bv_cheap"]) == 43
    capsys.readouterr()
    # process_payment has a single eligible candidate and no stand-in
    assert main(base + ["--task", "process_payment", "--service", "pay_card"]) == 44


def test_classify_writes_loadable_rules(tmp_path, capsys):
    out = tmp_path / "rules.txt"
    argv = [
        "classify",
        "--registry", str(FIXTURES / "registry.csv"),
        "--config", str(FIXTURES / "config.json"),
    ]
    assert main(argv + ["--out", str(out)]) == 0
    classifier = load_classifier(str(out))
    assert classifier.default_class == "2"
    assert len(classifier.rules) == 22
    perfect = [r for r in classifier.rules if r.confidence == 1.0]
    assert len(perfect) == 22  # this request is fully separable
    assert main(argv) == 0
    assert capsys.readouterr().out == out.read_text()


def test_generate_then_compose_round_trip(tmp_path, capsys):
    argv = [
        "generate",
        "--tasks", "4",
        "--candidates", "3",
        "--attributes", "4",
        "--seed", "11",
        "--out", str(tmp_path),
    ]
    assert main(argv) == 0
    capsys.readouterr()
    for name in ("registry.csv", "plan.json", "taxonomy.txt", "config.json"):
        assert (tmp_path / name).exists()
    compose_argv = [
        "compose",
        "--registry", str(tmp_path / "registry.csv"),
        "--plan", str(tmp_path / "plan.json"),
        "--taxonomy", str(tmp_path / "taxonomy.txt"),
        "--config", str(tmp_path / "config.json"),
        "--threshold", "0.0",
    ]
    assert main(compose_argv) == 0
    report = json.loads(capsys.readouterr().out)
    assert len(report["primary"]["tasks"]) == 4
    assert 0.0 < report["primary"]["score"] <= 1.0


def test_bench_csv_shape(capsys):
    argv = ["bench", "--grid", "2,3x2", "--reps", "2", "--seed", "5"]
    assert main(argv) == 0
    lines = capsys.readouterr().out.strip().splitlines()
    assert lines[0] == (
        "tasks,candidates,repetitions,mean_ranking_ms,"
        "mean_selection_ms,mean_alternative_ms"
    )
    assert len(lines) == 3  # two task sizes x one candidate size
    for line in lines[1:]:
        cells = line.split(",")
        assert len(cells) == 6
        assert int(cells[2]) == 2
        assert all(float(c) >= 0.0 for c in cells[3:])


def test_bench_classification_column(capsys):
    argv = [
        "bench", "--grid", "2x2", "--reps", "1", "--include-classification",
    ]
    assert main(argv) == 0
    lines = capsys.readouterr().out.strip().splitlines()
    assert lines[0].endswith(",classification_ms")
    assert len(lines[1].split(",")) == 7


def test_run_bench_returns_all_grid_points():
    results = run_bench([2, 3], [2, 4], attributes=2, repetitions=2, seed=3)
    assert [(r.tasks, r.candidates) for r in results] == [
        (2, 2), (2, 4), (3, 2), (3, 4),
    ]
    for res in results:
        assert len(res.selection_ms) == 2
        assert res.mean_ranking_ms >= res.mean_selection_ms


def test_parse_grid_forms():
    assert _parse_grid("10,20x30,40") == ([10, 20], [30, 40])
    assert _parse_grid("5") == ([5], [5])
    assert _parse_grid("5,7") == ([5, 7], [5, 7])
    with pytest.raises(ValueError):
        _parse_grid("x5")
    with pytest.raises(ValueError):
        _parse_grid("abc")
    with pytest.raises(ValueError):
        _parse_grid("0")
    with pytest.raises(ValueError):
        _parse_grid("5x-3")


def test_bench_rejects_bad_grid(capsys):
    assert main(["bench", "--grid", "abc"]) == 2
    assert "malformed benchmark grid" in capsys.readouterr().err


def test_module_entry_point_runs():
    proc = subprocess.run(
        [sys.executable, "-m", "qoscompose.cli"] + fixture_args("compose"),
        capture_output=True,
        text=True,
    )
    assert proc.returncode == 0
    assert json.loads(proc.stdout)["primary"]["score"] == 0.5625
