#!/usr/bin/env python3
"""
Kommandozeile für SBOC.

    python -m sboc run --fn six-hump-camel-back --kmax 50 --seed 7 --trace t.csv
    python -m sboc run --exec ./f --bounds "0,1;-2,2"
    python -m sboc bench --suite 2d --runs 10 --seed 1 --out report.json
    python -m sboc list

Exit-Codes: 0 OK, 1 unerwarteter Fehler, 2 Argumentfehler,
3 Zielfunktion fehlgeschlagen, 4 Surrogat fehlgeschlagen.
"""

import argparse
import json
import logging
import sys
from pathlib import Path
from typing import List, Optional

import numpy as np
import pandas as pd

from .bench import run_metrics, run_suite, select_functions
from .bench.functions import all_functions, get_function
from .blackbox import MODES, BlackBoxEvaluator
from .core import BoxDomain, InvalidConfig, ObjectiveFailure, OutOfBounds, SurrogateFailure
from .engine import SbocConfig, run
from .surrogate import SurrogateSpec, available_kinds

logger = logging.getLogger(__name__)

EXIT_OK = 0
EXIT_ERROR = 1
EXIT_USAGE = 2
EXIT_OBJECTIVE = 3
EXIT_SURROGATE = 4


def init_logging(verbose: bool = False, quiet: bool = False):
    level = logging.DEBUG if verbose else logging.WARNING if quiet else logging.INFO
    logging.basicConfig(
        level=level,
        format='%(asctime)s - %(levelname)s - %(message)s',
        handlers=[logging.StreamHandler(sys.stderr)],
        force=True,
    )


def load_points(path, dimension: int) -> np.ndarray:
    """Liest Startpunkte (Originaleinheiten) aus einer Datei mit Trennzeichen , ; oder Leerraum."""
    path = Path(path)
    if not path.exists():
        raise InvalidConfig(f"Startpunkt-Datei nicht gefunden: {path}")

    def read(header):
        frame = pd.read_csv(path, header=header, comment="#", sep=r"[,;\s]+", engine="python")
        return frame.dropna(axis=1, how="all").to_numpy(dtype=float)

    try:
        points = read(None)
    except ValueError:
        # erste Zeile ist eine Kopfzeile
        points = read(0)
    if points.ndim != 2 or points.shape[1] != dimension:
        raise InvalidConfig(f"Startpunkte in {path} haben {points.shape[-1]} Spalten, erwartet {dimension}")
    logger.info(f"✓ {len(points)} Startpunkte geladen: {path}")
    return points


def parse_ids(text: Optional[str]) -> List[int]:
    if not text:
        return []
    try:
        return [int(part.strip().lower().removeprefix("tf")) for part in text.split(",") if part.strip()]
    except ValueError as e:
        raise InvalidConfig(f"Ungültige id-Liste '{text}'") from e


def cmd_run(args) -> int:
    """Ein SBOC-Lauf auf einer Testfunktion oder einem externen Programm."""
    if bool(args.fn) == bool(args.exec):
        logger.error("✗ Genau eines von --fn oder --exec angeben")
        return EXIT_USAGE

    evaluator = None
    fn = None
    result = None
    try:
        if args.fn:
            fn = get_function(args.fn)
            domain = BoxDomain.from_string(args.bounds) if args.bounds else fn.domain
            objective = fn.evaluate_raw
        else:
            if not args.bounds:
                logger.error("✗ --exec braucht --bounds")
                return EXIT_USAGE
            domain = BoxDomain.from_string(args.bounds)
            evaluator = BlackBoxEvaluator(args.exec, mode=args.mode, timeout=args.timeout)
            objective = evaluator

        initial_points = load_points(args.init_points, domain.dimension) if args.init_points else None
        config = SbocConfig(
            k_max=args.kmax if args.kmax is not None else 100 * domain.dimension,
            k0=args.k0,
            surrogate=SurrogateSpec(args.surrogate),
            seed=args.seed,
            initial_points=initial_points,
        )
        result = run(objective, domain, config)

    except (InvalidConfig, OutOfBounds) as e:
        logger.error(f"✗ Ungültige Argumente: {e}")
        return EXIT_USAGE
    except ObjectiveFailure as e:
        logger.error(f"✗ Zielfunktion fehlgeschlagen: {e}")
        if args.trace and e.partial_result is not None:
            e.partial_result.write_trace(args.trace)
            logger.info(f"Teil-Trace geschrieben: {args.trace}")
        return EXIT_OBJECTIVE
    except SurrogateFailure as e:
        logger.error(f"✗ Surrogat fehlgeschlagen: {e}")
        return EXIT_SURROGATE
    finally:
        if evaluator is not None:
            evaluator.close()

    if evaluator is not None and evaluator.calls != result.n_evaluations:
        logger.warning(f"Aufrufzähler {evaluator.calls} != Auswertungen {result.n_evaluations}")

    print("x_best: " + " ".join(f"{v:.12g}" for v in result.x_best_raw))
    print(f"f_best: {result.f_best:.12g}")
    print(f"evaluations: {result.n_evaluations}")

    if args.trace:
        result.write_trace(args.trace)
        logger.info(f"✓ Trace geschrieben: {args.trace}")

    if args.report:
        payload = {
            "x_best": result.x_best_raw.tolist(),
            "f_best": result.f_best,
            "evaluations": result.n_evaluations,
            "termination": result.termination,
        }
        if fn is not None and not args.bounds:
            payload["metrics"] = run_metrics(result, fn, config.k_max).to_dict()
        with open(args.report, "w", encoding="utf-8") as f:
            json.dump(payload, f, indent=2)
        logger.info(f"✓ Report geschrieben: {args.report}")
    return EXIT_OK


def cmd_bench(args) -> int:
    """Benchmark über eine Funktionsauswahl mit mehreren Seeds."""
    try:
        functions = select_functions(args.suite, parse_ids(args.ids))
        config = SbocConfig(k_max=args.kmax or 1, surrogate=SurrogateSpec(args.surrogate), seed=args.seed)
        report = run_suite(
            config,
            functions,
            runs=args.runs,
            seeds=range(args.seed, args.seed + args.runs),
            k_max=args.kmax,
            jobs=args.jobs,
            out=args.out,
            table=args.table,
            record_timing=args.record_timing,
        )
    except InvalidConfig as e:
        logger.error(f"✗ Ungültige Argumente: {e}")
        return EXIT_USAGE

    for line in report.summary_lines():
        print(line)
    return EXIT_OK


def cmd_list(args) -> int:
    frame = pd.DataFrame(
        [{"id": fn.id, "slug": fn.slug, "N": fn.dimension, "f_star": fn.f_star, "motf": fn.motf}
         for fn in all_functions()]
    )
    print(frame.to_string(index=False))
    return EXIT_OK


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="sboc", description="Surrogatbasierte Optimierung mit Clustering")
    parser.add_argument("-v", "--verbose", action="store_true", help="Debug-Ausgaben")
    parser.add_argument("-q", "--quiet", action="store_true", help="Nur Warnungen und Fehler")
    sub = parser.add_subparsers(dest="command")

    p_run = sub.add_parser("run", help="Einen Optimierungslauf ausführen")
    p_run.add_argument("--fn", help="Testfunktion (id oder Name, z.B. 'branin' oder 5)")
    p_run.add_argument("--exec", help="Externes Programm als Zielfunktion")
    p_run.add_argument("--bounds", help='Schranken "l1,u1;l2,u2;..."')
    p_run.add_argument("--mode", choices=MODES, default="per-call", help="Black-Box-Protokoll")
    p_run.add_argument("--timeout", type=float, default=60.0, help="Zeitlimit je Auswertung (s)")
    p_run.add_argument("--surrogate", choices=available_kinds(), default="rbf")
    p_run.add_argument("--kmax", type=int, help="Auswertungsbudget (Default 100·N)")
    p_run.add_argument("--k0", type=int, help="Größe des Anfangsdesigns (Default 5·N)")
    p_run.add_argument("--seed", type=int, default=0)
    p_run.add_argument("--trace", help="Trace als CSV schreiben")
    p_run.add_argument("--init-points", dest="init_points", help="Startpunkte (Originaleinheiten)")
    p_run.add_argument("--report", help="Ergebnis als JSON schreiben")
    p_run.set_defaults(handler=cmd_run)

    p_bench = sub.add_parser("bench", help="Benchmark-Suite ausführen")
    p_bench.add_argument("--suite", choices=("all", "2d", "motf", "non-motf"), default="all")
    p_bench.add_argument("--ids", help="Kommagetrennte Funktions-ids, z.B. '1,5,9'")
    p_bench.add_argument("--runs", type=int, default=10)
    p_bench.add_argument("--seed", type=int, default=1)
    p_bench.add_argument("--kmax", type=int, help="Budget für alle Funktionen (Default 100·N)")
    p_bench.add_argument("--surrogate", choices=available_kinds(), default="rbf")
    p_bench.add_argument("--jobs", type=int, default=1, help="Parallele Prozesse")
    p_bench.add_argument("--out", default="benchmark_report.json", help="Report (JSON)")
    p_bench.add_argument("--table", help="Flache Tabelle (.csv oder .xlsx)")
    p_bench.add_argument("--record-timing", dest="record_timing", action="store_true",
                         help="Laufzeiten in Report und Tabelle aufnehmen")
    p_bench.set_defaults(handler=cmd_bench)

    p_list = sub.add_parser("list", help="Testfunktionen auflisten")
    p_list.set_defaults(handler=cmd_list)
    return parser


def main(argv: Optional[List[str]] = None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as e:
        return EXIT_USAGE if e.code else EXIT_OK

    init_logging(args.verbose, args.quiet)
    if args.command is None:
        parser.print_help(sys.stderr)
        return EXIT_USAGE

    try:
        return args.handler(args)
    except Exception as e:
        logger.exception(f"✗ Unerwarteter Fehler: {e}")
        return EXIT_ERROR


if __name__ == "__main__":
    sys.exit(main())
