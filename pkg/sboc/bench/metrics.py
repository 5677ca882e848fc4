"""
Gütemaße eines Laufs: Abstand zum nächsten Minimierer (Δx*), relative
Zielfunktionslücke (Δf*) und normierter Auswertungsaufwand (γ).
"""

import logging
from dataclasses import asdict, dataclass
from typing import Optional, Sequence, Tuple

import numpy as np

from ..core import BelowOptimum, InvalidConfig
from .functions import TestFunction

logger = logging.getLogger(__name__)

SUCCESS_THRESHOLD = 0.01


@dataclass(frozen=True)
class RunMetrics:
    delta_x: float
    delta_f: float
    gamma: float
    k_star: int
    k_final: int
    iterations_to_success: Optional[int] = None

    def to_dict(self) -> dict:
        return asdict(self)


def delta_x(x_best, fn: TestFunction) -> float:
    """min über alle Minimierer von ||x̂* - x*|| / sqrt(N), normierte Koordinaten."""
    x_best = np.asarray(x_best, dtype=float).reshape(1, -1)
    distances = np.linalg.norm(fn.minimizer_array - x_best, axis=1)
    return float(min(1.0, np.min(distances) / np.sqrt(fn.dimension)))


def delta_f(f_best: float, fn: TestFunction) -> float:
    """
    Relative Lücke zu f*; für f* = 0 absolut und bei 1 gesättigt.

    Werte knapp unter f* (Rundung, gerundete Tabellenwerte) werden auf 0
    geklemmt; Werte unter dem erreichbaren Minimum sind ein Fehler.
    """
    f_star = fn.reference_f_star
    floor = min(f_star, fn.attainable_min)
    if f_best < floor - 1e-9 * (1 + abs(floor)):
        logger.error(f"✗ TF{fn.id}: f̂* = {f_best!r} liegt unter dem Optimum {floor!r}")
        raise BelowOptimum(f"TF{fn.id} ({fn.name}): f̂* = {f_best!r} < f* = {floor!r}")

    if f_star != 0:
        gap = (f_best - f_star) / abs(f_star)
    else:
        gap = min(1.0, f_best)
    return float(np.clip(gap, 0.0, 1.0))


def gamma(f_history: Sequence[float], fn: TestFunction, k_max: int,
          threshold: float = SUCCESS_THRESHOLD) -> Tuple[float, int]:
    """
    Normierter Aufwand bis zum Erfolg.

    Returns:
        (γ, K*) mit K* = erste Auswertung, ab der der laufende Bestwert
        Δf* <= threshold erfüllt, sonst K_max
    """
    history = np.asarray(f_history, dtype=float)
    if history.size == 0:
        raise InvalidConfig("gamma braucht mindestens eine Auswertung")
    if not threshold > 0:
        raise InvalidConfig(f"Erfolgsschwelle muss > 0 sein, nicht {threshold}")

    k_star = first_success(history, fn, threshold)
    if k_star is None:
        k_star = k_max
    return min(k_star, k_max) / k_max, k_star


def first_success(f_history: Sequence[float], fn: TestFunction, threshold: float = SUCCESS_THRESHOLD) -> Optional[int]:
    """Erste Auswertung (1-basiert) mit Δf* <= threshold, None falls nie erreicht."""
    running_best = np.minimum.accumulate(np.asarray(f_history, dtype=float))
    # laufender Bestwert ist monoton, also nur an Verbesserungen prüfen
    improved = np.flatnonzero(np.r_[True, running_best[1:] < running_best[:-1]])
    for index in improved:
        if delta_f(running_best[index], fn) <= threshold:
            return int(index) + 1
    return None


def median(values: Sequence[float]) -> float:
    """Median als Ordnungsstatistik (gerade Anzahl: Mittel der beiden mittleren Werte)."""
    values = np.asarray(values, dtype=float)
    if values.size == 0:
        return float("nan")
    return float(np.median(values))


def run_metrics(result, fn: TestFunction, k_max: int, threshold: float = SUCCESS_THRESHOLD) -> RunMetrics:
    """Berechnet alle Maße für ein RunResult aus ``sboc.engine``."""
    g, k_star = gamma(result.f_history, fn, k_max, threshold)
    reached = first_success(result.f_history, fn, threshold)
    iterations_to_success = None if reached is None else int(result.ledger[reached - 1].iteration)
    return RunMetrics(
        delta_x=delta_x(result.x_best, fn),
        delta_f=delta_f(result.f_best, fn),
        gamma=g,
        k_star=k_star,
        k_final=result.n_evaluations,
        iterations_to_success=iterations_to_success,
    )
