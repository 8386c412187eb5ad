import json
from fractions import Fraction

import pytest

from steiner_mcts.bench import (
    CSV_COLUMNS,
    BenchConfig,
    ExperimentResult,
    ResultInvariantError,
    emit_report,
    load_manifest,
    resolve_jobs,
    results_csv,
    run_experiment,
    runtime_table,
    summarize,
)
from steiner_mcts.generators import make_dataset
from steiner_mcts.gnn import SEGNN, ModelConfig
from steiner_mcts.io import save_instance

TINY = ModelConfig(hidden=8, edge_dim=4)


@pytest.fixture(scope="module")
def dataset():
    insts, _ = make_dataset("erdos_renyi", 14, 6, [0.2, 0.4], seed=8, weighted=True)
    return insts


def test_result_invariants():
    ExperimentResult("a", 9, 10, 9).check()
    ExperimentResult("b", None, 10, 10).check()
    with pytest.raises(ResultInvariantError):
        ExperimentResult("c", 9, 10, 11).check()
    with pytest.raises(ResultInvariantError):
        ExperimentResult("d", 9, 10, 8).check()
    with pytest.raises(ResultInvariantError):
        ExperimentResult("e", 4, 9, 9).check()


def test_run_and_summary(dataset):
    results = run_experiment(dataset, SEGNN(TINY), BenchConfig(simulations=20))
    assert [r.instance_id for r in results] == [i.id for i in dataset]
    for r in results:
        assert r.opt_cost <= r.mcts_cost <= r.approx_cost
        assert set(r.runtimes_ms) == {"opt", "approx", "mcts"}
    s = summarize(results)
    assert s["instances"] == s["instances_with_opt"] == 6
    assert 1.0 <= s["mean_mcts_over_opt"] <= s["mean_approx_over_opt"] <= 2.0


def test_exact_limit_omits_opt(dataset):
    results = run_experiment(dataset, SEGNN(TINY), BenchConfig(simulations=5, exact_limit=2))
    assert all(r.opt_cost is None for r in results if len(next(i for i in dataset if i.id == r.instance_id).terminals) > 2)
    csv = results_csv(results, timing=False)
    assert csv.splitlines()[0] == ",".join(CSV_COLUMNS)


def test_csv_is_reproducible_and_parallel_safe(dataset):
    model = SEGNN(TINY)
    a = results_csv(run_experiment(dataset, model, BenchConfig(simulations=15, timing=False)), timing=False)
    b = results_csv(run_experiment(dataset, model, BenchConfig(simulations=15, timing=False)), timing=False)
    c = results_csv(run_experiment(dataset, model, BenchConfig(simulations=15, timing=False, jobs=2)), timing=False)
    assert a == b == c
    assert ",,," in a.splitlines()[1] + ","


def test_profile_caps(dataset):
    assert len(run_experiment(dataset, SEGNN(TINY), BenchConfig(profile="smoke", max_instances=2))) == 2
    assert BenchConfig(profile="paper-mini").budget(50) == 800
    assert BenchConfig(profile="stretch").budget(160) == 1200
    with pytest.raises(ValueError):
        BenchConfig(profile="huge")


def test_jobs_env(monkeypatch):
    monkeypatch.setenv("STEINER_MCTS_JOBS", "3")
    assert resolve_jobs(1) == 3
    monkeypatch.delenv("STEINER_MCTS_JOBS")
    assert resolve_jobs(0) == 1


def test_fractional_costs_in_csv():
    r = ExperimentResult("f", Fraction(5, 2), Fraction(7, 2), Fraction(5, 2), {"opt": 1.0, "approx": 0.5, "mcts": 2.0})
    line = results_csv([r]).splitlines()[1]
    assert line == "f,5/2,7/2,5/2,1.000,0.500,2.000"


def test_report_files(tmp_path, dataset):
    results = run_experiment(dataset, SEGNN(TINY), BenchConfig(simulations=5))
    summary = emit_report(results, tmp_path / "a", timing=True, svg=True, title="t")
    assert {p.name for p in (tmp_path / "a").iterdir()} == {"results.csv", "summary.json", "scatter.json", "scatter.svg"}
    assert json.loads((tmp_path / "a" / "summary.json").read_text()) == json.loads(json.dumps(summary))
    emit_report(results, tmp_path / "b", timing=True, svg=True, title="t")
    assert (tmp_path / "a" / "scatter.svg").read_bytes() == (tmp_path / "b" / "scatter.svg").read_bytes()
    with pytest.raises(ValueError):
        emit_report([], tmp_path / "c")


def test_runtime_table_layout():
    s = {"mean_runtime_s": {"2-apprx": 0.001, "MCTS": 0.5, "OPT": None}}
    table = runtime_table({"GE": s, "ER50": s})
    assert table.splitlines()[0] == "| Graphs/Algorithms | GE | ER50 |"
    assert table.splitlines()[2] == "| 2-apprx | 0.00 | 0.00 |"
    assert table.splitlines()[4] == "| OPT | n/a | n/a |"


def test_load_manifest(tmp_path, dataset):
    entries = []
    for inst in dataset[:2]:
        save_instance(inst, tmp_path / f"{inst.id}.json")
        entries.append({"id": inst.id, "file": f"{inst.id}.json"})
    (tmp_path / "manifest.json").write_text(json.dumps({"instances": entries}))
    assert load_manifest(tmp_path / "manifest.json") == dataset[:2]
