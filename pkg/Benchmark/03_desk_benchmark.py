#!/usr/bin/env python3
"""
Schritt 3: Desk-Benchmark auf der 2D-Teilmenge

SBOC-RBF auf acht zweidimensionalen Testfunktionen, je zehn Seeds.
Erfolg je Funktion: Median Δf* <= 0.01.

Ausgabe:
- results/03_desk_report.json
- results/03_desk_runs.xlsx
"""

import logging
import sys
from pathlib import Path

sys.path.insert(0, str(Path(__file__).resolve().parent.parent))

from sboc.bench import run_suite, select_functions  # noqa: E402
from sboc.engine import SbocConfig  # noqa: E402
from sboc.surrogate import SurrogateSpec  # noqa: E402

logging.basicConfig(level=logging.INFO, format='%(asctime)s - %(levelname)s - %(message)s')
logger = logging.getLogger(__name__)

RESULTS_DIR = Path(__file__).resolve().parent / "results"
FUNCTION_IDS = [1, 4, 5, 9, 24, 28, 43, 44]
K_MAX = 200
SEEDS = range(1, 11)
SURROGATE = "rbf"
JOBS = 4
MIN_SUCCESS = 6


def main():
    logger.info("=== SCHRITT 3: DESK-BENCHMARK (2D) ===")
    functions = select_functions(ids=FUNCTION_IDS)
    report = run_suite(
        SbocConfig(k_max=K_MAX, surrogate=SurrogateSpec(SURROGATE)),
        functions,
        runs=len(SEEDS),
        seeds=SEEDS,
        k_max=K_MAX,
        jobs=JOBS,
        out=RESULTS_DIR / "03_desk_report.json",
        table=RESULTS_DIR / "03_desk_runs.xlsx",
    )

    n_success = sum(fs.success() for fs in report.functions)
    if n_success < MIN_SUCCESS:
        logger.error(f"✗ Erfolg auf {n_success}/{len(functions)} Funktionen, erwartet mindestens {MIN_SUCCESS}")
        sys.exit(1)
    logger.info(f"✓ Erfolg auf {n_success}/{len(functions)} Funktionen")


if __name__ == "__main__":
    main()
