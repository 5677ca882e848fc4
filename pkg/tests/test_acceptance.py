"""Lange Läufe: SHCB über zehn Seeds und der 2D-Desk-Benchmark. Nur mit ``--runslow``."""

import time

import numpy as np
import pytest

from sboc.bench import get_function, run_metrics, run_suite, select_functions
from sboc.engine import SbocConfig, run

DESK_IDS = [1, 4, 5, 9, 24, 28, 43, 44]


@pytest.mark.slow
def test_shcb_ten_seeds():
    shcb = get_function(1)
    metrics = []
    for seed in range(1, 11):
        result = run(shcb.evaluate_raw, shcb.domain, SbocConfig(k_max=50, seed=seed))
        metrics.append(run_metrics(result, shcb, 50))

    delta_f = np.array([m.delta_f for m in metrics])
    assert np.median(delta_f) <= 0.01
    assert np.sum(delta_f <= 0.01) >= 8
    assert np.median([m.k_star for m in metrics]) <= 50


@pytest.mark.slow
def test_desk_benchmark():
    started = time.perf_counter()
    report = run_suite(SbocConfig(k_max=200), select_functions(ids=DESK_IDS), runs=10, seeds=range(1, 11),
                       k_max=200, jobs=4)
    assert time.perf_counter() - started < 30 * 60
    assert sum(fs.success() for fs in report.functions) >= 6
