"""
SBOC-Hauptschleife.

Pro Iteration werden bis zu drei Punkte ausgewertet:

1. Minimum des Surrogats (Multistart ab allen Archivpunkten)
2. Exploration: Mittelpunkt zwischen den am weitesten entfernten Nachbar-Clustern
3. Exploitation: gewichteter Schwerpunkt der Nachbarschaft des Incumbent

Jeder Kandidat wird nur ausgewertet, wenn er mehr als ε von allen
Archivpunkten entfernt liegt. Das Budget wird am Ende jeder Iteration geprüft.
"""

import logging
import math
import time
from dataclasses import dataclass, field, replace
from enum import Enum
from typing import Callable, Dict, List, Optional, Sequence, Tuple

import numpy as np
import pandas as pd
from scipy.optimize import minimize

from .clustering import Clustering, elbow_select, exploration_point, kmeans
from .core import (
    BoxDomain,
    Dataset,
    DegenerateSpread,
    InvalidConfig,
    ObjectiveFailure,
    RngStream,
    SbocError,
    SurrogateFailure,
    TooFewPoints,
    default_epsilon,
    denormalize,
    incumbent,
    min_separation_ok,
    normalize,
)
from .sampling import SobolSequence
from .surrogate import SurrogateModel, SurrogateSpec, required_points, train

logger = logging.getLogger(__name__)

DEFAULT_ETA_SCHEDULE = (0.5, 1.5, 2.5, 5.0, 10.0)

Objective = Callable[[np.ndarray], float]


class Strategy(str, Enum):
    INITIAL = "initial"
    AUGMENT = "augment"
    SURROGATE_MIN = "surrogate-min"
    EXPLORE = "explore"
    EXPLOIT = "exploit"


@dataclass
class SbocConfig:
    k_max: int
    k0: Optional[int] = None
    epsilon: Optional[float] = None
    eta_schedule: Tuple[float, ...] = DEFAULT_ETA_SCHEDULE
    elbow_threshold: float = 0.10
    neighborhood_fraction: float = 0.2
    surrogate: SurrogateSpec = field(default_factory=SurrogateSpec)
    multistart_budget: Optional[int] = None
    multistart_starts: Optional[int] = 10
    seed: int = 0
    initial_points: Optional[np.ndarray] = None
    sobol_skip: int = 1
    max_stalled_iterations: int = 10

    def resolve(self, dimension: int) -> "SbocConfig":
        """Füllt dimensionsabhängige Defaults und validiert die Konfiguration."""
        resolved = replace(
            self,
            k0=self.k0 if self.k0 is not None else 5 * dimension,
            epsilon=self.epsilon if self.epsilon is not None else default_epsilon(dimension),
            multistart_budget=self.multistart_budget if self.multistart_budget is not None else 200 * dimension,
            eta_schedule=tuple(float(e) for e in self.eta_schedule),
        )
        if resolved.initial_points is not None:
            points = np.atleast_2d(np.asarray(resolved.initial_points, dtype=float))
            if points.shape[1] != dimension:
                raise InvalidConfig(f"Startpunkte haben {points.shape[1]} Spalten, Suchraum {dimension}")
            resolved = replace(resolved, initial_points=points)
        resolved.validate(dimension)
        return resolved

    def validate(self, dimension: int):
        n_initial = len(self.initial_points) if self.initial_points is not None else self.k0
        if n_initial < dimension + 2:
            raise InvalidConfig(f"Anfangsdesign braucht mindestens N+2 = {dimension + 2} Punkte, nicht {n_initial}")
        if self.k_max < 1:
            raise InvalidConfig(f"K_max muss positiv sein, nicht {self.k_max}")
        if not self.epsilon > 0:
            raise InvalidConfig(f"ε muss > 0 sein, nicht {self.epsilon}")
        if not self.eta_schedule or any(not eta > 0 for eta in self.eta_schedule):
            raise InvalidConfig(f"η-Zyklus muss nichtleer und positiv sein: {self.eta_schedule}")
        if not 0 < self.neighborhood_fraction <= 1:
            raise InvalidConfig(f"Nachbarschaftsanteil muss in (0, 1] liegen, nicht {self.neighborhood_fraction}")
        if not 0 < self.elbow_threshold < 1:
            raise InvalidConfig(f"Elbow-Schwelle muss in (0, 1) liegen, nicht {self.elbow_threshold}")
        if self.multistart_budget < 1:
            raise InvalidConfig("Multistart-Budget muss positiv sein")
        if self.multistart_starts is not None and self.multistart_starts < 1:
            raise InvalidConfig(f"multistart_starts muss >= 1 sein, nicht {self.multistart_starts}")
        if self.sobol_skip < 0 or self.max_stalled_iterations < 1:
            raise InvalidConfig("sobol_skip >= 0 und max_stalled_iterations >= 1 erforderlich")


@dataclass(frozen=True, eq=False)
class LedgerEntry:
    k: int
    iteration: int
    strategy: str
    x: np.ndarray
    x_raw: np.ndarray
    f: float


@dataclass(frozen=True, eq=False)
class PointAddition:
    strategy: str
    x: np.ndarray
    f: Optional[float] = None
    k: Optional[int] = None
    skipped: bool = False
    reason: Optional[str] = None


@dataclass
class IterationRecord:
    iteration: int
    additions: List[PointAddition]
    x_best: np.ndarray
    f_best: float
    n_clusters: Optional[int] = None
    eta: Optional[float] = None
    neighborhood_size: Optional[int] = None
    timings: Dict[str, float] = field(default_factory=dict)

    @property
    def n_added(self) -> int:
        return sum(1 for a in self.additions if not a.skipped)


@dataclass
class RunResult:
    domain: BoxDomain
    x_best: np.ndarray
    f_best: float
    ledger: List[LedgerEntry]
    iterations: List[IterationRecord]
    termination: str = "budget"
    wall_time: float = 0.0

    @property
    def n_evaluations(self) -> int:
        return len(self.ledger)

    @property
    def x_best_raw(self) -> np.ndarray:
        return denormalize(self.x_best, self.domain)

    @property
    def f_history(self) -> np.ndarray:
        return np.array([entry.f for entry in self.ledger])

    def to_trace_frame(self) -> pd.DataFrame:
        """
        Trace mit einer Zeile pro Auswertung.

        Spalten: iter, K, strategy, x1..xN, f, xbest1..xbestN, fbest
        (Koordinaten normiert).
        """
        N = self.domain.dimension
        rows = []
        best_x, best_f = None, np.inf
        for entry in self.ledger:
            if entry.f < best_f:
                best_x, best_f = entry.x, entry.f
            rows.append([entry.iteration, entry.k, entry.strategy, *entry.x, entry.f, *best_x, best_f])
        columns = (
            ["iter", "K", "strategy"]
            + [f"x{n}" for n in range(1, N + 1)]
            + ["f"]
            + [f"xbest{n}" for n in range(1, N + 1)]
            + ["fbest"]
        )
        return pd.DataFrame(rows, columns=columns)

    def write_trace(self, path):
        self.to_trace_frame().to_csv(path, index=False, float_format="%.12g")


def eta_for_iteration(iteration: int, schedule: Sequence[float] = DEFAULT_ETA_SCHEDULE) -> float:
    if iteration < 1:
        raise InvalidConfig(f"Iterationsindex beginnt bei 1, nicht {iteration}")
    return float(schedule[(iteration - 1) % len(schedule)])


def minimize_surrogate(model: SurrogateModel, domain: BoxDomain, starts, budget: int,
                       max_starts: Optional[int] = None) -> np.ndarray:
    """
    Multistart-Minimierung des Surrogats in [0,1]^N.

    Alle Startpunkte werden mit einer einzigen Vektor-Vorhersage bewertet.
    Von den ``max_starts`` besten (None: von allen) läuft je eine beschränkte
    Powell-Suche mit höchstens ``budget`` Vorhersagen. Zurückgegeben wird der
    beste Endpunkt; ist kein Endpunkt besser als der beste Start, der beste Start.
    """
    starts = np.atleast_2d(np.asarray(starts, dtype=float))
    if starts.size == 0:
        raise InvalidConfig("minimize_surrogate braucht mindestens einen Startpunkt")
    if max_starts is not None and max_starts < 1:
        raise InvalidConfig(f"max_starts muss >= 1 sein, nicht {max_starts}")

    bounds = [(0.0, 1.0)] * domain.dimension
    start_values = np.asarray(model.predict(starts), dtype=float).reshape(-1)
    # Gleichstand: kleinerer Archivindex zuerst
    order = np.argsort(start_values, kind="stable")[:max_starts]
    best_x, best_value = starts[order[0]].copy(), float(start_values[order[0]])

    for start in starts[order]:
        result = minimize(
            model.predict,
            start,
            method="Powell",
            bounds=bounds,
            options={"maxfev": budget, "xtol": 1e-6, "ftol": 1e-12},
        )
        x = np.clip(result.x, 0.0, 1.0)
        value = model.predict(x)
        if value < best_value:
            best_x, best_value = x, value

    return best_x


def neighborhood_size(count: int, fraction: float) -> int:
    # round() fängt Darstellungsfehler wie 0.2 * 15 = 3.0000000000000004 ab
    return min(count, max(1, math.ceil(round(fraction * count, 9))))


def exploitation_weights(dataset: Dataset, eta: float, fraction: float) -> Tuple[np.ndarray, np.ndarray]:
    """
    Nachbarschaft LN des Incumbent und ihre normierten Gewichte.

    w ∝ exp(-sqrt((f - f̂*) / η)); der Incumbent selbst gehört zu LN.

    Returns:
        (Indizes von LN, Gewichte mit Summe 1)
    """
    x_best, f_best = incumbent(dataset)
    members = dataset.nearest(x_best, neighborhood_size(len(dataset), fraction))
    excess = np.maximum(dataset.y[members] - f_best, 0.0)
    weights = np.exp(-np.sqrt(excess / eta))
    return members, weights / weights.sum()


def exploitation_point(dataset: Dataset, eta: float, fraction: float, epsilon: float) -> Optional[np.ndarray]:
    if len(dataset) < 2:
        raise TooFewPoints("Exploitation braucht mindestens 2 Punkte")
    if not eta > 0:
        raise InvalidConfig(f"η muss > 0 sein, nicht {eta}")
    members, weights = exploitation_weights(dataset, eta, fraction)
    candidate = np.clip(weights @ dataset.X[members], 0.0, 1.0)
    return candidate if min_separation_ok(candidate, dataset, epsilon) else None


class SbocOptimizer:
    def __init__(self, objective: Objective, domain: BoxDomain, config: SbocConfig):
        """
        Args:
            objective: Zielfunktion in Originaleinheiten, liefert einen float
            domain: Suchraum
            config: Konfiguration (Defaults werden für domain.dimension aufgelöst)
        """
        self.objective = objective
        self.domain = domain
        self.config = config.resolve(domain.dimension)
        self.rng = RngStream(self.config.seed, "sboc")
        self.dataset = Dataset(domain.dimension)
        self.ledger: List[LedgerEntry] = []
        self.iterations: List[IterationRecord] = []
        self.sobol = SobolSequence(domain.dimension, skip=self.config.sobol_skip)
        self._started = None

    # === Auswertung ===

    def _result(self, termination: str) -> RunResult:
        x_best, f_best = incumbent(self.dataset) if len(self.dataset) else (np.full(self.domain.dimension, np.nan), np.inf)
        return RunResult(
            domain=self.domain,
            x_best=np.array(x_best),
            f_best=float(f_best),
            ledger=list(self.ledger),
            iterations=list(self.iterations),
            termination=termination,
            wall_time=time.perf_counter() - self._started if self._started else 0.0,
        )

    def evaluate(self, x: np.ndarray, strategy: Strategy, iteration: int) -> PointAddition:
        """Wertet einen normierten Punkt aus und nimmt ihn ins Archiv auf."""
        x = np.clip(np.asarray(x, dtype=float), 0.0, 1.0)
        x_raw = denormalize(x, self.domain)
        try:
            y = float(self.objective(x_raw))
        except SbocError as e:
            logger.error(f"✗ Auswertung bei {x_raw.tolist()} fehlgeschlagen: {e}")
            raise ObjectiveFailure(str(e), partial_result=self._result("objective-failure")) from e
        except Exception as e:
            logger.error(f"✗ Zielfunktion warf {type(e).__name__} bei {x_raw.tolist()}: {e}")
            raise ObjectiveFailure(f"{type(e).__name__}: {e}", partial_result=self._result("objective-failure")) from e

        if not np.isfinite(y):
            logger.error(f"✗ Nicht-endlicher Funktionswert {y!r} bei {x_raw.tolist()}")
            raise ObjectiveFailure(f"Nicht-endlicher Funktionswert {y!r}", partial_result=self._result("objective-failure"))

        self.dataset.add(x, y)
        k = len(self.dataset)
        self.ledger.append(LedgerEntry(k=k, iteration=iteration, strategy=strategy.value, x=x, x_raw=x_raw, f=y))
        return PointAddition(strategy=strategy.value, x=x, f=y, k=k)

    def _screened(self, x: np.ndarray, strategy: Strategy, iteration: int) -> PointAddition:
        if min_separation_ok(x, self.dataset, self.config.epsilon):
            return self.evaluate(x, strategy, iteration)
        logger.debug(f"Iteration {iteration}: {strategy.value} verworfen (Abstand <= ε)")
        return PointAddition(strategy=strategy.value, x=np.asarray(x, dtype=float), skipped=True, reason="epsilon")

    # === Initialisierung ===

    def _initial_design(self):
        if self.config.initial_points is not None:
            for x_raw in self.config.initial_points:
                x = normalize(x_raw, self.domain)
                if not min_separation_ok(x, self.dataset, 0.0):
                    logger.warning(f"Doppelter Startpunkt {np.asarray(x_raw).tolist()} wird übersprungen")
                    continue
                self.evaluate(x, Strategy.INITIAL, 0)
        else:
            for x in self.sobol.draw(self.config.k0):
                self.evaluate(x, Strategy.INITIAL, 0)
        logger.info(f"Anfangsdesign: {len(self.dataset)} Punkte, f̂* = {incumbent(self.dataset)[1]:.6g}")

    def _augment(self, count: int):
        added = 0
        while added < count:
            x = self.sobol.draw(1)[0]
            if min_separation_ok(x, self.dataset, 0.0):
                self.evaluate(x, Strategy.AUGMENT, 0)
                added += 1

    def _train(self, iteration: int) -> Optional[SurrogateModel]:
        spec = self.config.surrogate
        rng = self.rng.child(f"iter-{iteration}/surrogate")
        try:
            return train(spec, self.dataset, rng)
        except SbocError as e:
            if iteration > 1:
                logger.warning(f"Iteration {iteration}: Surrogattraining fehlgeschlagen ({e}), erster Punkt entfällt")
                return None
            needed = max(0, required_points(spec.kind, self.domain.dimension) - len(self.dataset))
            if needed == 0:
                logger.error(f"✗ Surrogattraining fehlgeschlagen: {e}")
                raise SurrogateFailure(f"Training von '{spec.kind}' fehlgeschlagen: {e}") from e
            logger.info(f"Zu wenige Punkte für '{spec.kind}': ergänze {needed} Sobol-Punkte")

        self._augment(needed)
        try:
            return train(spec, self.dataset, rng)
        except SbocError as e:
            logger.error(f"✗ Surrogattraining auch nach Ergänzung fehlgeschlagen: {e}")
            raise SurrogateFailure(f"Training von '{spec.kind}' fehlgeschlagen: {e}") from e

    def _cluster(self, iteration: int) -> Clustering:
        points = self.dataset.X
        rng = self.rng.child(f"iter-{iteration}/kmeans")
        try:
            _, clustering = elbow_select(points, rng, threshold=self.config.elbow_threshold)
        except (DegenerateSpread, TooFewPoints) as e:
            logger.debug(f"Iteration {iteration}: Elbow nicht anwendbar ({e}), C* = 2")
            clustering = kmeans(points, 2, rng)
        return clustering

    # === Iteration ===

    def step(self, iteration: int) -> IterationRecord:
        """Führt eine SBOC-Iteration aus und gibt ihren Protokolleintrag zurück."""
        additions: List[PointAddition] = []
        timings: Dict[str, float] = {}

        tic = time.perf_counter()
        model = self._train(iteration)
        timings["surrogate_training"] = time.perf_counter() - tic

        tic = time.perf_counter()
        if model is None:
            additions.append(PointAddition(Strategy.SURROGATE_MIN.value, np.full(self.domain.dimension, np.nan),
                                           skipped=True, reason="surrogate-error"))
        else:
            candidate = minimize_surrogate(model, self.domain, self.dataset.X, self.config.multistart_budget,
                                           self.config.multistart_starts)
            additions.append(self._screened(candidate, Strategy.SURROGATE_MIN, iteration))
        timings["surrogate_minimization"] = time.perf_counter() - tic

        tic = time.perf_counter()
        clustering = self._cluster(iteration)
        timings["clustering"] = time.perf_counter() - tic

        tic = time.perf_counter()
        additions.append(self._screened(exploration_point(clustering, self.dataset.X), Strategy.EXPLORE, iteration))
        timings["exploration"] = time.perf_counter() - tic

        tic = time.perf_counter()
        eta = eta_for_iteration(iteration, self.config.eta_schedule)
        n_neighbors = neighborhood_size(len(self.dataset), self.config.neighborhood_fraction)
        candidate = exploitation_point(self.dataset, eta, self.config.neighborhood_fraction, self.config.epsilon)
        if candidate is None:
            members, weights = exploitation_weights(self.dataset, eta, self.config.neighborhood_fraction)
            additions.append(PointAddition(Strategy.EXPLOIT.value, weights @ self.dataset.X[members],
                                           skipped=True, reason="epsilon"))
        else:
            additions.append(self.evaluate(candidate, Strategy.EXPLOIT, iteration))
        timings["exploitation"] = time.perf_counter() - tic

        x_best, f_best = incumbent(self.dataset)
        return IterationRecord(
            iteration=iteration,
            additions=additions,
            x_best=np.array(x_best),
            f_best=f_best,
            n_clusters=clustering.n_clusters,
            eta=eta,
            neighborhood_size=n_neighbors,
            timings=timings,
        )

    def run(self) -> RunResult:
        self._started = time.perf_counter()
        self._initial_design()

        iteration, stalled, termination = 0, 0, "budget"
        while len(self.dataset) < self.config.k_max:
            iteration += 1
            record = self.step(iteration)
            self.iterations.append(record)
            logger.info(
                f"Iteration {iteration}: K = {len(self.dataset)}, f̂* = {record.f_best:.6g}, "
                f"C* = {record.n_clusters}, η = {record.eta}, +{record.n_added}"
            )
            if record.n_added == 0:
                logger.warning(f"Iteration {iteration}: alle Kandidaten verworfen, kein neuer Punkt")
            stalled = stalled + 1 if record.n_added == 0 else 0
            if stalled >= self.config.max_stalled_iterations:
                logger.warning(f"Abbruch: {stalled} Iterationen ohne neuen Punkt (K = {len(self.dataset)})")
                termination = "stalled"
                break

        result = self._result(termination)
        logger.info(f"✓ SBOC beendet nach {result.n_evaluations} Auswertungen: f̂* = {result.f_best:.6g}")
        return result


def run(objective: Objective, domain: BoxDomain, config: SbocConfig) -> RunResult:
    """Führt einen vollständigen SBOC-Lauf aus."""
    return SbocOptimizer(objective, domain, config).run()
