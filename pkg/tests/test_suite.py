import json

import numpy as np
import pandas as pd
import pytest

from sboc.bench import get_function, run_metrics, run_suite, save_report
from sboc.bench.suite import REPORT_SCHEMA, _Job, _run_job
from sboc.core import InvalidConfig
from sboc.engine import SbocConfig, run

K_MAX = 20


@pytest.fixture(scope="module")
def small_report():
    functions = [get_function("branin"), get_function(1)]
    return run_suite(SbocConfig(k_max=K_MAX), functions, runs=2, seeds=[3, 1], k_max=K_MAX)


def test_ordering(small_report):
    assert [fs.id for fs in small_report.functions] == [1, 5]
    for fs in small_report.functions:
        assert [r.seed for r in fs.runs] == [1, 3]


def test_single_run_medians_equal_metrics():
    fn = get_function("branin")
    report = run_suite(SbocConfig(k_max=K_MAX), [fn], runs=1, seeds=[7], k_max=K_MAX)
    result = run(fn.evaluate_raw, fn.domain, SbocConfig(k_max=K_MAX, seed=7))
    metrics = run_metrics(result, fn, K_MAX)
    medians = report.functions[0].medians
    assert medians["delta_x"] == metrics.delta_x
    assert medians["delta_f"] == metrics.delta_f
    assert medians["gamma"] == metrics.gamma


def test_summary_structure(small_report):
    summary = small_report.summary()
    assert summary["overall"]["n_functions"] == 2
    assert summary["n_runs"] == 4
    assert set(summary["by_dimension"]) == {"N=2"}
    assert set(summary["by_dimension_class"]) == {"N<=4"}
    assert 0.0 <= summary["overall"]["success_rate"] <= 1.0


def test_success_flag_follows_median():
    report = run_suite(SbocConfig(k_max=K_MAX), [get_function("booth")], runs=2, seeds=[1, 2], k_max=K_MAX)
    fs = report.functions[0]
    assert fs.success() == (fs.median_of("delta_f") <= 0.01)


def test_report_json(small_report, tmp_path):
    path = save_report(small_report, tmp_path / "out" / "report.json")
    data = json.loads(path.read_text(encoding="utf-8"))
    assert data["schema"] == REPORT_SCHEMA
    assert data["version"] == 1
    assert len(data["functions"]) == 2
    first = data["functions"][0]
    assert first["n_runs"] == 2
    assert set(first["medians"]) >= {"delta_x", "delta_f", "gamma"}
    assert "wall_time" not in first["runs"][0]


def test_reports_are_reproducible(tmp_path):
    fn = [get_function(1)]
    a = run_suite(SbocConfig(k_max=15), fn, runs=2, seeds=[1, 2], k_max=15, out=tmp_path / "a.json")
    b = run_suite(SbocConfig(k_max=15), fn, runs=2, seeds=[1, 2], k_max=15, out=tmp_path / "b.json")
    assert (tmp_path / "a.json").read_bytes() == (tmp_path / "b.json").read_bytes()
    assert a.to_dict() == b.to_dict()


def test_record_timing(tmp_path):
    report = run_suite(SbocConfig(k_max=12), [get_function(1)], runs=1, seeds=[1], k_max=12, record_timing=True)
    assert report.to_dict()["functions"][0]["runs"][0]["wall_time"] > 0
    assert "wall_time" in report.to_frame().columns


@pytest.mark.parametrize("suffix", [".csv", ".xlsx"])
def test_table_export(small_report, tmp_path, suffix):
    from sboc.bench import export_table
    path = export_table(small_report, tmp_path / f"runs{suffix}")
    frame = pd.read_csv(path) if suffix == ".csv" else pd.read_excel(path, sheet_name="Laeufe")
    assert len(frame) == 4
    assert {"id", "seed", "delta_x", "delta_f", "gamma", "k_star"} <= set(frame.columns)
    if suffix == ".xlsx":
        assert len(pd.read_excel(path, sheet_name="Funktionen")) == 2


def test_parallel_matches_serial():
    functions = [get_function(1), get_function(28)]
    serial = run_suite(SbocConfig(k_max=14), functions, runs=2, seeds=[1, 2], k_max=14)
    parallel = run_suite(SbocConfig(k_max=14), functions, runs=2, seeds=[1, 2], k_max=14, jobs=2)
    assert serial.to_dict() == parallel.to_dict()


def test_failed_run_is_recorded(monkeypatch):
    from sboc.bench import suite
    from sboc.core import ObjectiveFailure

    def broken(objective, domain, config):
        raise ObjectiveFailure("Simulation abgestürzt")

    monkeypatch.setattr(suite, "run", broken)
    record = _run_job(_Job(1, 4, K_MAX, SbocConfig(k_max=K_MAX), 0.01))
    assert record.failed
    assert record.error.startswith("ObjectiveFailure")


@pytest.mark.parametrize("kwargs", [{"runs": 0}, {"runs": 3, "seeds": [1, 2]}, {"runs": 2, "seeds": [4, 4]}])
def test_invalid_suite_arguments(kwargs):
    with pytest.raises(InvalidConfig):
        run_suite(SbocConfig(k_max=K_MAX), [get_function(1)], **kwargs)


def test_medians_skip_failed_runs():
    from sboc.bench.metrics import RunMetrics
    from sboc.bench.suite import FunctionSummary, RunRecord

    fs = FunctionSummary(id=1, name="x", dimension=2, motf=False, multimodal=True, k_max=10, f_star=0.0)
    fs.runs.append(RunRecord(1, 1, metrics=RunMetrics(0.2, 0.0, 0.5, 5, 10)))
    fs.runs.append(RunRecord(1, 2, error="ObjectiveFailure: x"))
    fs.runs.append(RunRecord(1, 3, metrics=RunMetrics(0.4, 0.04, 1.0, 10, 10)))
    assert fs.n_failed == 1
    assert fs.median_of("delta_x") == pytest.approx(0.3)
    assert fs.success() is False
    assert np.isnan(fs.median_of("iterations_to_success"))
