#!/usr/bin/env python3
"""
Benchmark Pipeline Runner

Führt alle Skripte der Benchmark-Pipeline in der richtigen Reihenfolge aus:
1. 01_registry_check.py
2. 02_shcb_trace.py
3. 03_desk_benchmark.py
"""

import importlib.util
import logging
import subprocess
import sys
from pathlib import Path

BASE_DIR = Path(__file__).resolve().parent

logging.basicConfig(
    level=logging.INFO,
    format='%(asctime)s - %(levelname)s - %(message)s',
    handlers=[
        logging.StreamHandler(sys.stdout),
        logging.FileHandler(BASE_DIR / 'pipeline_run.log')
    ]
)
logger = logging.getLogger(__name__)

PIPELINE_STEPS = [
    {"script": "01_registry_check.py", "description": "Registry-Selbsttest"},
    {"script": "02_shcb_trace.py", "description": "SHCB-Lauf ab tabellierten Startpunkten"},
    {"script": "03_desk_benchmark.py", "description": "Desk-Benchmark 2D"},
]

EXPECTED_OUTPUTS = [
    "results/01_registry_check.xlsx",
    "results/01_discrepancies.json",
    "results/02_shcb_trace.csv",
    "results/03_desk_report.json",
    "results/03_desk_runs.xlsx",
]

REQUIRED_PACKAGES = ["numpy", "scipy", "pandas", "openpyxl", "sklearn", "tqdm"]


def run_script(script_name: str, description: str) -> bool:
    """
    Führt ein Pipeline-Skript aus und gibt True zurück, wenn es erfolgreich war.

    Args:
        script_name: Name des Skripts (z.B. "01_registry_check.py")
        description: Beschreibung was das Skript macht
    """
    logger.info(f"=== STARTE: {description} ===")
    logger.info(f"Führe aus: {script_name}")

    try:
        result = subprocess.run(
            [sys.executable, script_name],
            capture_output=True,
            text=True,
            cwd=BASE_DIR
        )
    except OSError as e:
        logger.error(f"✗ AUSNAHME: {description}")
        logger.error(f"Fehler: {e}")
        return False

    # Skripte loggen auf stderr (basicConfig-Default)
    if result.returncode == 0:
        logger.info(f"✓ ERFOLGREICH: {description}")
        if result.stderr:
            logger.info(f"Ausgabe:\n{result.stderr}")
        return True

    logger.error(f"✗ FEHLER: {description}")
    logger.error(f"Return Code: {result.returncode}")
    if result.stderr:
        logger.error(f"Fehlerausgabe:\n{result.stderr}")
    if result.stdout:
        logger.info(f"Standardausgabe:\n{result.stdout}")
    return False


def check_prerequisites() -> bool:
    """Prüft Eingabedatei, Skripte und installierte Pakete."""
    logger.info("=== PRÜFE VORAUSSETZUNGEN ===")

    required_files = ["shcb_start_points.csv"] + [step["script"] for step in PIPELINE_STEPS]
    for file_name in required_files:
        if not (BASE_DIR / file_name).exists():
            logger.error(f"✗ Datei nicht gefunden: {file_name}")
            return False
        logger.info(f"✓ Datei gefunden: {file_name}")

    for package in REQUIRED_PACKAGES:
        if importlib.util.find_spec(package) is None:
            logger.error(f"✗ Paket nicht installiert: {package}")
            return False
    logger.info(f"✓ Pakete vorhanden: {', '.join(REQUIRED_PACKAGES)}")

    logger.info("✓ Alle Voraussetzungen erfüllt")
    return True


def main():
    logger.info("=== BENCHMARK PIPELINE STARTET ===")
    logger.info(f"Verzeichnis: {BASE_DIR}")

    if not check_prerequisites():
        logger.error("Voraussetzungen nicht erfüllt! Pipeline wird abgebrochen.")
        sys.exit(1)

    total_steps = len(PIPELINE_STEPS)
    for i, step in enumerate(PIPELINE_STEPS, 1):
        logger.info(f"\n--- SCHRITT {i}/{total_steps} ---")
        if not run_script(step["script"], step["description"]):
            logger.error(f"Pipeline-Schritt {i} fehlgeschlagen! Pipeline wird abgebrochen.")
            sys.exit(1)

    logger.info("\n=== PIPELINE ABGESCHLOSSEN ===")
    logger.info(f"Erfolgreiche Schritte: {total_steps}/{total_steps}")
    logger.info("\n=== AUSGABEDATEIEN ===")
    for output in EXPECTED_OUTPUTS:
        mark = "✓" if (BASE_DIR / output).exists() else "✗"
        logger.info(f"{mark} {output}")


if __name__ == "__main__":
    main()
