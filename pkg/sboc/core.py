"""
Kernbausteine für SBOC: Suchraum, Normierung, Stichprobenarchiv mit Incumbent,
Abstandsprüfung und reproduzierbare Zufallsströme.

Alle übrigen Module arbeiten ausschließlich in normierten Koordinaten [0,1]^N;
die Umrechnung in Originaleinheiten passiert nur hier.
"""

import hashlib
import logging
from dataclasses import dataclass
from typing import Iterable, List, Optional, Sequence, Tuple

import numpy as np
from scipy.spatial.distance import cdist

logger = logging.getLogger(__name__)

# Relative Toleranz für Bound-Verletzungen (Rundungsfehler lokaler Löser)
BOUNDS_TOLERANCE = 1e-12


# === Fehlerhierarchie ===

class SbocError(Exception):
    """Basisklasse aller SBOC-Fehler."""


class InvalidConfig(SbocError, ValueError):
    pass


class OutOfBounds(SbocError, ValueError):
    pass


class EmptyDataset(SbocError, ValueError):
    pass


class DuplicatePoint(SbocError, ValueError):
    pass


class TooFewPoints(SbocError, ValueError):
    pass


class DimensionUnsupported(SbocError, ValueError):
    pass


class BelowOptimum(SbocError, ValueError):
    pass


class SingularSystem(SbocError, RuntimeError):
    pass


class IllConditioned(SbocError, RuntimeError):
    pass


class DegenerateSpread(SbocError, RuntimeError):
    pass


class SurrogateFailure(SbocError, RuntimeError):
    pass


class ObjectiveFailure(SbocError, RuntimeError):
    """
    Zielfunktion lieferte keinen endlichen Wert oder ist abgestürzt.

    Attributes:
        partial_result: RunResult bis einschließlich der letzten gültigen Auswertung
    """

    def __init__(self, message: str, partial_result=None):
        super().__init__(message)
        self.partial_result = partial_result


# === Suchraum ===

class BoxDomain:
    def __init__(self, lower: Sequence[float], upper: Sequence[float]):
        """
        Box-Suchraum in Originaleinheiten.

        Args:
            lower: Untere Schranken, eine pro Dimension
            upper: Obere Schranken, eine pro Dimension
        """
        lower = np.asarray(lower, dtype=float).reshape(-1)
        upper = np.asarray(upper, dtype=float).reshape(-1)

        if lower.size == 0:
            raise InvalidConfig("Suchraum braucht mindestens eine Dimension")
        if lower.shape != upper.shape:
            raise InvalidConfig(f"Schranken passen nicht zusammen: {lower.size} vs. {upper.size}")
        if not (np.all(np.isfinite(lower)) and np.all(np.isfinite(upper))):
            raise InvalidConfig("Schranken müssen endlich sein")
        if np.any(lower >= upper):
            bad = np.flatnonzero(lower >= upper).tolist()
            raise InvalidConfig(f"lower < upper verletzt in Dimension(en) {bad}")

        self.lower = lower
        self.upper = upper
        self.lower.setflags(write=False)
        self.upper.setflags(write=False)

    @property
    def dimension(self) -> int:
        return int(self.lower.size)

    @property
    def width(self) -> np.ndarray:
        return self.upper - self.lower

    @classmethod
    def from_string(cls, text: str) -> "BoxDomain":
        """Parst die CLI-Syntax ``"l1,u1;l2,u2;..."``."""
        lower, upper = [], []
        for part in text.split(";"):
            part = part.strip()
            if not part:
                continue
            pieces = part.split(",")
            if len(pieces) != 2:
                raise InvalidConfig(f"Ungültiges Schrankenpaar '{part}' (erwartet 'l,u')")
            try:
                lower.append(float(pieces[0]))
                upper.append(float(pieces[1]))
            except ValueError as e:
                raise InvalidConfig(f"Ungültige Zahl in '{part}'") from e
        return cls(lower, upper)

    def __repr__(self) -> str:
        pairs = ", ".join(f"[{l:g}, {u:g}]" for l, u in zip(self.lower, self.upper))
        return f"BoxDomain({pairs})"


def normalize(x_raw: Sequence[float], domain: BoxDomain) -> np.ndarray:
    """
    Bildet einen Punkt in Originaleinheiten auf [0,1]^N ab.

    Verletzungen bis 1e-12 der Intervallbreite werden geklemmt, größere
    führen zu OutOfBounds.
    """
    x_raw = np.asarray(x_raw, dtype=float).reshape(-1)
    if x_raw.size != domain.dimension:
        raise OutOfBounds(f"Punkt hat {x_raw.size} Koordinaten, Suchraum {domain.dimension}")

    tol = BOUNDS_TOLERANCE * domain.width
    if np.any(x_raw < domain.lower - tol) or np.any(x_raw > domain.upper + tol) or not np.all(np.isfinite(x_raw)):
        logger.error(f"✗ Punkt außerhalb des Suchraums: {x_raw.tolist()} für {domain}")
        raise OutOfBounds(f"Punkt {x_raw.tolist()} liegt außerhalb von {domain}")

    return np.clip((x_raw - domain.lower) / domain.width, 0.0, 1.0)


def denormalize(x: Sequence[float], domain: BoxDomain) -> np.ndarray:
    """Umkehrung von ``normalize``; das Ergebnis liegt immer in [lower, upper]."""
    x = np.asarray(x, dtype=float).reshape(-1)
    return np.clip(domain.lower + x * domain.width, domain.lower, domain.upper)


# === Stichprobenarchiv ===

@dataclass(frozen=True)
class SamplePoint:
    x: np.ndarray
    y: float

    def __post_init__(self):
        x = np.array(self.x, dtype=float).reshape(-1)
        if np.any(x < 0.0) or np.any(x > 1.0):
            raise OutOfBounds(f"SamplePoint außerhalb von [0,1]^N: {x.tolist()}")
        if not np.isfinite(self.y):
            raise ObjectiveFailure(f"Nicht-endlicher Funktionswert {self.y!r}")
        x.setflags(write=False)
        object.__setattr__(self, "x", x)
        object.__setattr__(self, "y", float(self.y))


class Dataset:
    """Geordnetes Archiv aller ausgewerteten Punkte mit Incumbent-Index."""

    def __init__(self, dimension: int, points: Iterable[SamplePoint] = ()):
        self.dimension = int(dimension)
        self._points: List[SamplePoint] = []
        self._X = np.empty((0, self.dimension))
        self._y = np.empty(0)
        self.best_index: Optional[int] = None
        for point in points:
            self.append(point)

    def __len__(self) -> int:
        return len(self._points)

    def __iter__(self):
        return iter(self._points)

    def __getitem__(self, index: int) -> SamplePoint:
        return self._points[index]

    @property
    def points(self) -> List[SamplePoint]:
        return list(self._points)

    @property
    def X(self) -> np.ndarray:
        """Alle Punkte als (K, N)-Matrix, schreibgeschützte Kopie."""
        view = self._X.copy()
        view.setflags(write=False)
        return view

    @property
    def y(self) -> np.ndarray:
        view = self._y.copy()
        view.setflags(write=False)
        return view

    def add(self, x: Sequence[float], y: float) -> int:
        return self.append(SamplePoint(np.asarray(x, dtype=float), y))

    def append(self, point: SamplePoint) -> int:
        """Hängt einen Punkt an und gibt seinen Index zurück."""
        if point.x.size != self.dimension:
            raise OutOfBounds(f"Punkt hat {point.x.size} Koordinaten, Archiv {self.dimension}")
        if len(self._points) and not min_separation_ok(point.x, self, 0.0):
            raise DuplicatePoint(f"Punkt {point.x.tolist()} ist bereits im Archiv")

        self._points.append(point)
        self._X = np.vstack([self._X, point.x])
        self._y = np.append(self._y, point.y)

        index = len(self._points) - 1
        # strikt kleiner: bei Gleichstand bleibt der frühere Punkt Incumbent
        if self.best_index is None or point.y < self._y[self.best_index]:
            self.best_index = index
        return index

    def nearest(self, x: Sequence[float], count: int) -> np.ndarray:
        """Indizes der ``count`` nächsten Punkte, Gleichstand nach Index."""
        d = cdist(np.asarray(x, dtype=float).reshape(1, -1), self._X)[0]
        return np.argsort(d, kind="stable")[:count]


def incumbent(dataset: Dataset) -> Tuple[np.ndarray, float]:
    """Bester Punkt (x̂*, f̂*) des Archivs."""
    if len(dataset) == 0:
        raise EmptyDataset("Incumbent eines leeren Archivs angefragt")
    best = dataset[dataset.best_index]
    return best.x, best.y


def min_separation_ok(x: Sequence[float], dataset: Dataset, epsilon: float) -> bool:
    """True, wenn x zu jedem Archivpunkt einen Abstand > epsilon hat."""
    if len(dataset) == 0:
        return True
    d = cdist(np.asarray(x, dtype=float).reshape(1, -1), dataset._X)
    return bool(np.all(d > epsilon))


def default_epsilon(dimension: int) -> float:
    return 1e-4 * np.sqrt(dimension)


# === Reproduzierbare Zufallsströme ===

def _label_words(label: str) -> List[int]:
    digest = hashlib.sha256(label.encode("utf-8")).digest()
    return [int.from_bytes(digest[i:i + 4], "little") for i in range(0, 16, 4)]


class RngStream:
    """
    Benannter Zufallsstrom, abgeleitet aus einem Master-Seed.

    Gleiches (seed, label) ergibt auf allen Plattformen dieselben Zahlen
    (SeedSequence + PCG64). Unterströme entstehen über ``child``.
    """

    def __init__(self, seed: int, label: str = "root"):
        if seed < 0 or seed >= 2 ** 64:
            raise InvalidConfig(f"Seed muss in [0, 2^64) liegen, nicht {seed}")
        self.seed = int(seed)
        self.label = label
        entropy = [self.seed & 0xFFFFFFFF, self.seed >> 32, *_label_words(label)]
        self.generator = np.random.Generator(np.random.PCG64(np.random.SeedSequence(entropy)))

    def child(self, label: str) -> "RngStream":
        return RngStream(self.seed, f"{self.label}/{label}")

    def seed_int(self) -> int:
        """32-bit-Seed für Bibliotheken, die ``random_state`` als int erwarten."""
        return int(self.generator.integers(0, 2 ** 31 - 1))

    def __repr__(self) -> str:
        return f"RngStream(seed={self.seed}, label={self.label!r})"
