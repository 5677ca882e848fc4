"""
Mehrfachläufe über die Testfunktions-Registry und Aggregation zum
BenchmarkReport (Mediane, Erfolgsflag, Erfolgsrate S, Aufschlüsselungen).
"""

import json
import logging
import math
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field, replace
from pathlib import Path
from typing import Dict, Iterable, List, Optional, Sequence

import numpy as np
import pandas as pd
from tqdm import tqdm

from ..core import BelowOptimum, InvalidConfig, ObjectiveFailure, SurrogateFailure
from ..engine import SbocConfig, run
from .functions import REGISTRY, TestFunction
from .metrics import SUCCESS_THRESHOLD, RunMetrics, median, run_metrics

logger = logging.getLogger(__name__)

REPORT_SCHEMA = "sboc-benchmark-report"
REPORT_VERSION = 1


@dataclass
class RunRecord:
    function_id: int
    seed: int
    metrics: Optional[RunMetrics] = None
    f_best: Optional[float] = None
    x_best: Optional[List[float]] = None
    termination: Optional[str] = None
    wall_time: float = 0.0
    error: Optional[str] = None

    @property
    def failed(self) -> bool:
        return self.error is not None


@dataclass
class FunctionSummary:
    id: int
    name: str
    dimension: int
    motf: bool
    multimodal: bool
    k_max: int
    f_star: float
    runs: List[RunRecord] = field(default_factory=list)

    @property
    def completed(self) -> List[RunRecord]:
        return [r for r in self.runs if not r.failed]

    @property
    def n_failed(self) -> int:
        return len(self.runs) - len(self.completed)

    def median_of(self, name: str) -> float:
        values = [getattr(r.metrics, name) for r in self.completed if getattr(r.metrics, name) is not None]
        return median(values)

    @property
    def medians(self) -> Dict[str, float]:
        return {name: self.median_of(name) for name in ("delta_x", "delta_f", "gamma", "k_star", "iterations_to_success")}

    def success(self, threshold: float = SUCCESS_THRESHOLD) -> bool:
        delta_f = self.median_of("delta_f")
        return bool(self.completed) and delta_f <= threshold


@dataclass
class BenchmarkReport:
    settings: Dict[str, object]
    functions: List[FunctionSummary]

    @property
    def record_timing(self) -> bool:
        return bool(self.settings.get("record_timing", False))

    @property
    def threshold(self) -> float:
        return float(self.settings.get("threshold", SUCCESS_THRESHOLD))

    def success_rate(self, functions: Optional[Iterable[FunctionSummary]] = None) -> float:
        functions = list(self.functions if functions is None else functions)
        if not functions:
            return float("nan")
        return sum(fs.success(self.threshold) for fs in functions) / len(functions)

    def _medians(self, fs: FunctionSummary) -> Dict[str, float]:
        medians = fs.medians
        if self.record_timing:
            medians["wall_time"] = median([r.wall_time for r in fs.completed])
        return medians

    def _group(self, functions: List[FunctionSummary]) -> dict:
        return {
            "n_functions": len(functions),
            "n_success": sum(fs.success(self.threshold) for fs in functions),
            "success_rate": self.success_rate(functions),
            "mean_delta_x": _nanmean(fs.median_of("delta_x") for fs in functions),
            "mean_delta_f": _nanmean(fs.median_of("delta_f") for fs in functions),
            "mean_gamma": _nanmean(fs.median_of("gamma") for fs in functions),
        }

    def _breakdown(self, key) -> Dict[str, dict]:
        groups: Dict[str, List[FunctionSummary]] = {}
        for fs in self.functions:
            groups.setdefault(key(fs), []).append(fs)
        return {name: self._group(groups[name]) for name in sorted(groups)}

    def summary(self) -> dict:
        return {
            "overall": self._group(self.functions),
            "by_dimension": self._breakdown(lambda fs: f"N={fs.dimension}"),
            "by_motf": self._breakdown(lambda fs: "motf" if fs.motf else "non-motf"),
            "by_dimension_class": self._breakdown(lambda fs: "N<=4" if fs.dimension <= 4 else "N>4"),
            "by_modality": self._breakdown(lambda fs: "multimodal" if fs.multimodal else "unimodal"),
            "n_runs": sum(len(fs.runs) for fs in self.functions),
            "n_failed_runs": sum(fs.n_failed for fs in self.functions),
        }

    def to_dict(self) -> dict:
        functions = []
        for fs in self.functions:
            functions.append({
                "id": fs.id,
                "name": fs.name,
                "N": fs.dimension,
                "motf": fs.motf,
                "multimodal": fs.multimodal,
                "k_max": fs.k_max,
                "f_star": fs.f_star,
                "medians": self._medians(fs),
                "success": fs.success(self.threshold),
                "n_runs": len(fs.runs),
                "n_failed": fs.n_failed,
                "runs": [
                    {
                        "seed": r.seed,
                        "metrics": r.metrics.to_dict() if r.metrics else None,
                        "f_best": r.f_best,
                        "x_best": r.x_best,
                        "termination": r.termination,
                        "error": r.error,
                        **({"wall_time": r.wall_time} if self.record_timing else {}),
                    }
                    for r in fs.runs
                ],
            })
        return _clean({
            "schema": REPORT_SCHEMA,
            "version": REPORT_VERSION,
            "settings": self.settings,
            "summary": self.summary(),
            "functions": functions,
        })

    def to_frame(self) -> pd.DataFrame:
        """Flache Tabelle mit einer Zeile pro Lauf."""
        rows = []
        for fs in self.functions:
            for r in fs.runs:
                metrics = r.metrics.to_dict() if r.metrics else {}
                rows.append({
                    "id": fs.id,
                    "name": fs.name,
                    "N": fs.dimension,
                    "motf": fs.motf,
                    "seed": r.seed,
                    "k_max": fs.k_max,
                    "f_best": r.f_best,
                    "delta_x": metrics.get("delta_x"),
                    "delta_f": metrics.get("delta_f"),
                    "gamma": metrics.get("gamma"),
                    "k_star": metrics.get("k_star"),
                    "k_final": metrics.get("k_final"),
                    "iterations_to_success": metrics.get("iterations_to_success"),
                    "termination": r.termination,
                    "error": r.error,
                    **({"wall_time": r.wall_time} if self.record_timing else {}),
                })
        return pd.DataFrame(rows)

    def summary_lines(self) -> List[str]:
        overall = self.summary()["overall"]
        lines = [f"Erfolgsrate S = {overall['success_rate']:.3f} ({overall['n_success']}/{overall['n_functions']})"]
        for fs in self.functions:
            mark = "✓" if fs.success(self.threshold) else "✗"
            m = fs.medians
            lines.append(
                f"{mark} TF{fs.id:<3} {fs.name:<22} N={fs.dimension:<3} "
                f"Δx̃={m['delta_x']:.4f} Δf̃={m['delta_f']:.4f} γ̃={m['gamma']:.3f} Fehlläufe={fs.n_failed}"
            )
        return lines


def _nanmean(values: Iterable[float]) -> float:
    values = [v for v in values if not math.isnan(v)]
    return float(np.mean(values)) if values else float("nan")


def _clean(obj):
    """NaN -> None und numpy-Skalare -> Python, damit json.dump gültiges JSON schreibt."""
    if isinstance(obj, dict):
        return {k: _clean(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [_clean(v) for v in obj]
    if isinstance(obj, (np.floating, float)):
        return None if math.isnan(obj) else float(obj)
    if isinstance(obj, np.integer):
        return int(obj)
    if isinstance(obj, np.bool_):
        return bool(obj)
    return obj


def save_report(report: BenchmarkReport, path) -> Path:
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    with open(path, "w", encoding="utf-8") as f:
        json.dump(report.to_dict(), f, indent=2, ensure_ascii=False)
    logger.info(f"✓ Report gespeichert: {path}")
    return path


def export_table(report: BenchmarkReport, path) -> Path:
    """Schreibt die Lauf-Tabelle als .csv oder .xlsx."""
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    frame = report.to_frame()
    if path.suffix.lower() == ".xlsx":
        with pd.ExcelWriter(path, engine="openpyxl") as writer:
            frame.to_excel(writer, sheet_name="Laeufe", index=False)
            functions = [{k: v for k, v in fs.items() if k != "runs"} for fs in report.to_dict()["functions"]]
            pd.json_normalize(functions).to_excel(writer, sheet_name="Funktionen", index=False)
    else:
        frame.to_csv(path, index=False, float_format="%.12g")
    logger.info(f"✓ Tabelle gespeichert: {path}")
    return path


@dataclass(frozen=True)
class _Job:
    function_id: int
    seed: int
    k_max: int
    config: SbocConfig
    threshold: float


def _run_job(job: _Job) -> RunRecord:
    fn = REGISTRY[job.function_id]
    config = replace(job.config, k_max=job.k_max, seed=job.seed, initial_points=None)
    try:
        result = run(fn.evaluate_raw, fn.domain, config)
        metrics = run_metrics(result, fn, job.k_max, job.threshold)
    except (ObjectiveFailure, SurrogateFailure, BelowOptimum) as e:
        logger.error(f"✗ TF{fn.id} Seed {job.seed}: {type(e).__name__}: {e}")
        return RunRecord(function_id=fn.id, seed=job.seed, error=f"{type(e).__name__}: {e}")

    return RunRecord(
        function_id=fn.id,
        seed=job.seed,
        metrics=metrics,
        f_best=result.f_best,
        x_best=result.x_best_raw.tolist(),
        termination=result.termination,
        wall_time=result.wall_time,
    )


def run_suite(config: SbocConfig, functions: Sequence[TestFunction], runs: int = 10,
              seeds: Optional[Sequence[int]] = None, k_max: Optional[int] = None,
              threshold: float = SUCCESS_THRESHOLD, jobs: int = 1, out=None, table=None,
              record_timing: bool = False) -> BenchmarkReport:
    """
    Führt pro Funktion und Seed einen unabhängigen SBOC-Lauf aus.

    Args:
        config: Vorlage; k_max und seed werden je Lauf gesetzt
        functions: Auszuwertende Testfunktionen
        runs: Läufe pro Funktion
        seeds: Seeds (mindestens ``runs`` verschiedene); Default config.seed + 0..runs-1
        k_max: Budget; Default 100·N
        threshold: Erfolgsschwelle für Δf*
        jobs: Anzahl paralleler Prozesse
        out: Optionaler Pfad für den JSON-Report
        table: Optionaler Pfad für die flache Tabelle (.csv/.xlsx)
        record_timing: Laufzeiten in Report und Tabelle aufnehmen (dann nicht mehr bytegleich reproduzierbar)

    Returns:
        BenchmarkReport, geordnet nach (Funktions-id, Seed)
    """
    if runs < 1:
        raise InvalidConfig(f"runs muss >= 1 sein, nicht {runs}")
    seeds = list(seeds) if seeds is not None else [config.seed + r for r in range(runs)]
    if len(seeds) < runs:
        raise InvalidConfig(f"{runs} Läufe, aber nur {len(seeds)} Seeds")
    seeds = seeds[:runs]
    if len(set(seeds)) != len(seeds):
        raise InvalidConfig(f"Seeds müssen verschieden sein: {seeds}")

    functions = sorted(functions, key=lambda fn: fn.id)
    job_list = [
        _Job(fn.id, seed, k_max if k_max is not None else 100 * fn.dimension, config, threshold)
        for fn in functions
        for seed in sorted(seeds)
    ]
    logger.info(f"=== BENCHMARK: {len(functions)} Funktionen × {runs} Läufe ({len(job_list)} Jobs) ===")

    if jobs > 1:
        with ProcessPoolExecutor(max_workers=jobs) as executor:
            records = list(tqdm(executor.map(_run_job, job_list), total=len(job_list), desc="Benchmark"))
    else:
        records = [_run_job(job) for job in tqdm(job_list, desc="Benchmark")]

    summaries = {
        fn.id: FunctionSummary(
            id=fn.id, name=fn.name, dimension=fn.dimension, motf=fn.motf, multimodal=fn.multimodal,
            k_max=k_max if k_max is not None else 100 * fn.dimension, f_star=fn.f_star,
        )
        for fn in functions
    }
    for record in records:
        summaries[record.function_id].runs.append(record)

    report = BenchmarkReport(
        settings={
            "surrogate": config.surrogate.kind,
            "surrogate_options": dict(config.surrogate.options),
            "runs": runs,
            "seeds": sorted(seeds),
            "k_max": k_max,
            "threshold": threshold,
            "eta_schedule": list(config.eta_schedule),
            "elbow_threshold": config.elbow_threshold,
            "neighborhood_fraction": config.neighborhood_fraction,
            "record_timing": record_timing,
        },
        functions=[summaries[fn.id] for fn in functions],
    )
    for line in report.summary_lines():
        logger.info(line)

    if out is not None:
        save_report(report, out)
    if table is not None:
        export_table(report, table)
    return report
