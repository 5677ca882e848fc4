#!/usr/bin/env python3
"""
Schritt 1: Selbsttest der Testfunktions-Registry

Wertet alle 52 Testfunktionen an ihren tabellierten Minimierern aus und
vergleicht mit f*. Funktionen außerhalb der Toleranz max(1e-3, 1e-3·|f*|)
landen in der Diskrepanzliste.

Ausgabe:
- results/01_registry_check.xlsx
- results/01_discrepancies.json
"""

import json
import logging
import sys
from pathlib import Path

sys.path.insert(0, str(Path(__file__).resolve().parent.parent))

from sboc.bench import discrepancy_list, self_check  # noqa: E402

logging.basicConfig(level=logging.INFO, format='%(asctime)s - %(levelname)s - %(message)s')
logger = logging.getLogger(__name__)

RESULTS_DIR = Path(__file__).resolve().parent / "results"
CHECK_FILE = RESULTS_DIR / "01_registry_check.xlsx"
DISCREPANCY_FILE = RESULTS_DIR / "01_discrepancies.json"
MIN_PASSED = 48


def main():
    logger.info("=== SCHRITT 1: REGISTRY-SELBSTTEST ===")
    RESULTS_DIR.mkdir(parents=True, exist_ok=True)

    check = self_check()
    passed = int(check["passed"].sum())
    logger.info(f"Bestanden: {passed}/{len(check)}")

    # Listen sind in Excel-Zellen nicht darstellbar
    check.assign(f_at_minimizers=check["f_at_minimizers"].map(lambda v: ", ".join(f"{x:.6g}" for x in v))) \
        .to_excel(CHECK_FILE, index=False)
    logger.info(f"✓ Selbsttest gespeichert: {CHECK_FILE}")

    discrepancies = discrepancy_list(check)
    for entry in discrepancies:
        logger.warning(
            f"✗ TF{entry['id']} {entry['name']}: f* laut Tabelle {entry['f_star_table']:g}, "
            f"berechnet {[round(v, 6) for v in entry['f_at_minimizers']]}"
        )
    with open(DISCREPANCY_FILE, "w", encoding="utf-8") as f:
        json.dump(discrepancies, f, indent=2, ensure_ascii=False)
    logger.info(f"✓ Diskrepanzliste gespeichert: {DISCREPANCY_FILE} ({len(discrepancies)} Einträge)")

    if passed < MIN_PASSED:
        logger.error(f"✗ Nur {passed} Funktionen bestanden, erwartet mindestens {MIN_PASSED}")
        sys.exit(1)


if __name__ == "__main__":
    main()
