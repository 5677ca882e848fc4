"""Testfunktionen, Gütemaße und Benchmark-Harness."""

from .functions import (
    REGISTRY,
    TestFunction,
    all_functions,
    discrepancy_list,
    evaluate,
    get_function,
    select_functions,
    self_check,
)
from .metrics import SUCCESS_THRESHOLD, RunMetrics, delta_f, delta_x, gamma, median, run_metrics
from .suite import BenchmarkReport, FunctionSummary, RunRecord, export_table, run_suite, save_report

__all__ = [
    "REGISTRY",
    "SUCCESS_THRESHOLD",
    "BenchmarkReport",
    "FunctionSummary",
    "RunMetrics",
    "RunRecord",
    "TestFunction",
    "all_functions",
    "delta_f",
    "delta_x",
    "discrepancy_list",
    "evaluate",
    "export_table",
    "gamma",
    "get_function",
    "median",
    "run_metrics",
    "run_suite",
    "save_report",
    "select_functions",
    "self_check",
]
