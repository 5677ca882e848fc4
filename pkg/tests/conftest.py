"""Gemeinsame Fixtures: die zehn SHCB-Startpunkte und die Clusterzuordnung nach Iteration 1."""

import numpy as np
import pytest

# normierte Koordinaten und tabellierte f-Werte (4 Nachkommastellen)
SHCB_START_POINTS = np.array([
    [0.5578, 0.9748],
    [0.3233, 0.1973],
    [0.8141, 0.4830],
    [0.0483, 0.6901],
    [0.7448, 0.0230],
    [0.3853, 0.8083],
    [0.8752, 0.5305],
    [0.2344, 0.2999],
    [0.6171, 0.3739],
    [0.2576, 0.5810],
])
SHCB_START_VALUES = np.array([0.0730, 1.0156, 2.3451, 1.0924, 0.9367, -0.4732, 2.2416, 2.2059, 0.4236, 1.9222])
SHCB_START_INCUMBENT = (np.array([0.3853, 0.8083]), -0.4732)

# Iteration 1: Startpunkte plus [0, 1]; vier Cluster
SHCB_ITER1_POINTS = np.vstack([SHCB_START_POINTS, [0.0, 1.0]])
SHCB_ITER1_LABELS = np.array([0, 2, 0, 2, 3, 1, 0, 2, 0, 1, 2])


def pytest_addoption(parser):
    parser.addoption("--runslow", action="store_true", default=False, help="Akzeptanz- und Benchmarkläufe ausführen")


def pytest_collection_modifyitems(config, items):
    if config.getoption("--runslow"):
        return
    skip_slow = pytest.mark.skip(reason="nur mit --runslow")
    for item in items:
        if "slow" in item.keywords:
            item.add_marker(skip_slow)


@pytest.fixture
def shcb_start_points():
    return SHCB_START_POINTS.copy(), SHCB_START_VALUES.copy()


@pytest.fixture
def shcb_iteration1():
    return SHCB_ITER1_POINTS.copy(), SHCB_ITER1_LABELS.copy()


@pytest.fixture
def shcb_domain():
    from sboc.core import BoxDomain
    return BoxDomain([-2.0, -1.0], [2.0, 1.0])
