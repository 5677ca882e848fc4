#!/usr/bin/env python3
"""
Schritt 2: SHCB-Lauf ab den zehn Startpunkten aus shcb_start_points.csv

Prüft zunächst die Startwerte gegen die tabellierten f-Werte und schreibt
dann den vollständigen Trace eines SBOC-RBF-Laufs.

Ausgabe:
- results/02_shcb_trace.csv
"""

import logging
import sys
from pathlib import Path

import pandas as pd

sys.path.insert(0, str(Path(__file__).resolve().parent.parent))

from sboc.bench import get_function, run_metrics  # noqa: E402
from sboc.engine import SbocConfig, run  # noqa: E402

logging.basicConfig(level=logging.INFO, format='%(asctime)s - %(levelname)s - %(message)s')
logger = logging.getLogger(__name__)

BASE_DIR = Path(__file__).resolve().parent
POINTS_FILE = BASE_DIR / "shcb_start_points.csv"
TRACE_FILE = BASE_DIR / "results" / "02_shcb_trace.csv"
K_MAX = 50
SEED = 7
# Startpunkte sind auf 4 Stellen gerundet, steile Stellen weichen stärker ab
WARN_DEVIATION = 2e-3


def load_points(path: Path) -> pd.DataFrame:
    points = pd.read_csv(path, comment="#")
    logger.info(f"✓ {len(points)} Startpunkte geladen: {path.name}")
    return points


def main():
    logger.info("=== SCHRITT 2: SHCB AB DEN TABELLIERTEN STARTPUNKTEN ===")
    shcb = get_function("six-hump-camel-back")
    points = load_points(POINTS_FILE)

    for row in points.itertuples(index=False):
        value = shcb.evaluate_raw([row.z1, row.z2])
        deviation = abs(value - row.f_table)
        mark = "✓" if deviation <= WARN_DEVIATION else "✗"
        logger.info(f"{mark} f({row.z1:+.4f}, {row.z2:+.4f}) = {value:+.5f} (Tabelle {row.f_table:+.4f}, Δ {deviation:.1e})")

    config = SbocConfig(k_max=K_MAX, seed=SEED, initial_points=points[["z1", "z2"]].to_numpy())
    result = run(shcb.evaluate_raw, shcb.domain, config)
    metrics = run_metrics(result, shcb, K_MAX)

    TRACE_FILE.parent.mkdir(parents=True, exist_ok=True)
    result.write_trace(TRACE_FILE)
    logger.info(f"✓ Trace gespeichert: {TRACE_FILE}")
    logger.info(
        f"f̂* = {result.f_best:.6f} bei {result.x_best_raw.round(4).tolist()}, "
        f"Δf* = {metrics.delta_f:.4f}, K* = {metrics.k_star}, γ = {metrics.gamma:.2f}"
    )


if __name__ == "__main__":
    main()
