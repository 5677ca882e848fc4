"""
Registry der 52 Testfunktionen mit Suchraum, normierten Minimierern und f*.

Die Ausdrücke folgen den üblichen öffentlichen Definitionen. ``self_check``
vergleicht f(x*) mit dem tabellierten f*; Abweichungen landen in der
Diskrepanzliste statt stillschweigend korrigiert zu werden.
"""

import logging
import re
from dataclasses import dataclass
from functools import cached_property
from typing import Callable, Dict, List, Sequence, Tuple, Union

import numpy as np
import pandas as pd
from scipy.optimize import minimize
from tqdm import tqdm

from ..core import BoxDomain, InvalidConfig, denormalize

logger = logging.getLogger(__name__)

PI = np.pi


# === Funktionsausdrücke (Originaleinheiten) ===

def six_hump_camel_back(x):
    z1, z2 = x
    return (4 - 2.1 * z1 ** 2 + z1 ** 4 / 3) * z1 ** 2 + z1 * z2 + (-4 + 4 * z2 ** 2) * z2 ** 2


def ackley3(x):
    x1, x2 = x
    return -200 * np.exp(-0.02 * np.sqrt(x1 ** 2 + x2 ** 2)) + 5 * np.exp(np.cos(3 * x1) + np.sin(3 * x2))


def ackley4(x):
    a, b = x[:-1], x[1:]
    return np.sum(np.exp(-0.2) * np.sqrt(a ** 2 + b ** 2) + 3 * (np.cos(2 * a) + np.sin(2 * b)))


def beale(x):
    x1, x2 = x
    return (1.5 - x1 + x1 * x2) ** 2 + (2.25 - x1 + x1 * x2 ** 2) ** 2 + (2.625 - x1 + x1 * x2 ** 3) ** 2


def branin(x):
    x1, x2 = x
    b, c, t = 5.1 / (4 * PI ** 2), 5 / PI, 1 / (8 * PI)
    return (x2 - b * x1 ** 2 + c * x1 - 6) ** 2 + 10 * (1 - t) * np.cos(x1) + 10


def cross_in_tray(x):
    x1, x2 = x
    inner = np.abs(np.sin(x1) * np.sin(x2) * np.exp(np.abs(100 - np.sqrt(x1 ** 2 + x2 ** 2) / PI))) + 1
    return -1e-4 * inner ** 0.1


def easom(x):
    x1, x2 = x
    return -np.cos(x1) * np.cos(x2) * np.exp(-((x1 - PI) ** 2) - (x2 - PI) ** 2)


def eggholder(x):
    x1, x2 = x
    return -(x2 + 47) * np.sin(np.sqrt(np.abs(x2 + x1 / 2 + 47))) - x1 * np.sin(np.sqrt(np.abs(x1 - (x2 + 47))))


def goldstein_price(x):
    x1, x2 = x
    a = 1 + (x1 + x2 + 1) ** 2 * (19 - 14 * x1 + 3 * x1 ** 2 - 14 * x2 + 6 * x1 * x2 + 3 * x2 ** 2)
    b = 30 + (2 * x1 - 3 * x2) ** 2 * (18 - 32 * x1 + 12 * x1 ** 2 + 48 * x2 - 36 * x1 * x2 + 27 * x2 ** 2)
    return a * b


def holder_table(x):
    x1, x2 = x
    return -np.abs(np.sin(x1) * np.cos(x2) * np.exp(np.abs(1 - np.sqrt(x1 ** 2 + x2 ** 2) / PI)))


def michalewicz(x, m=10):
    i = np.arange(1, x.size + 1)
    return -np.sum(np.sin(x) * np.sin(i * x ** 2 / PI) ** (2 * m))


def schwefel(x):
    return 418.9829 * x.size - np.sum(x * np.sin(np.sqrt(np.abs(x))))


def shubert(x):
    j = np.arange(1, 6)
    return np.prod([np.sum(j * np.cos((j + 1) * xi + j)) for xi in x])


def styblinski_tang(x):
    return 0.5 * np.sum(x ** 4 - 16 * x ** 2 + 5 * x)


def mccormick(x):
    x1, x2 = x
    return np.sin(x1 + x2) + (x1 - x2) ** 2 - 1.5 * x1 + 2.5 * x2 + 1


_H3_ALPHA = np.array([1.0, 1.2, 3.0, 3.2])
_H3_A = np.array([[3.0, 10, 30], [0.1, 10, 35], [3.0, 10, 30], [0.1, 10, 35]])
_H3_P = 1e-4 * np.array([[3689, 1170, 2673], [4699, 4387, 7470], [1091, 8732, 5547], [381, 5743, 8828]])

_H6_ALPHA = _H3_ALPHA
_H6_A = np.array([
    [10, 3, 17, 3.5, 1.7, 8],
    [0.05, 10, 17, 0.1, 8, 14],
    [3, 3.5, 1.7, 10, 17, 8],
    [17, 8, 0.05, 10, 0.1, 14],
])
_H6_P = 1e-4 * np.array([
    [1312, 1696, 5569, 124, 8283, 5886],
    [2329, 4135, 8307, 3736, 1004, 9991],
    [2348, 1451, 3522, 2883, 3047, 6650],
    [4047, 8828, 8732, 5743, 1091, 381],
])


def hartmann3(x):
    return -np.sum(_H3_ALPHA * np.exp(-np.sum(_H3_A * (x - _H3_P) ** 2, axis=1)))


def hartmann6(x):
    return -np.sum(_H6_ALPHA * np.exp(-np.sum(_H6_A * (x - _H6_P) ** 2, axis=1)))


_SHEKEL_C = np.array([
    [4, 1, 8, 6, 3, 2, 5, 8, 6, 7],
    [4, 1, 8, 6, 7, 9, 3, 1, 2, 3.6],
    [4, 1, 8, 6, 3, 2, 5, 8, 6, 7],
    [4, 1, 8, 6, 7, 9, 3, 1, 2, 3.6],
])
_SHEKEL_BETA = 0.1 * np.array([1, 2, 2, 4, 4, 6, 3, 7, 5, 5])


def shekel(x, m):
    C, beta = _SHEKEL_C[:, :m], _SHEKEL_BETA[:m]
    return -np.sum(1.0 / (np.sum((x[:, None] - C) ** 2, axis=0) + beta))


def trid(x):
    return np.sum((x - 1) ** 2) - np.sum(x[1:] * x[:-1])


def bukin6(x):
    x1, x2 = x
    return 100 * np.sqrt(np.abs(x2 - 0.01 * x1 ** 2)) + 0.01 * np.abs(x1 + 10)


def griewank(x):
    i = np.arange(1, x.size + 1)
    return 1 + np.sum(x ** 2) / 4000 - np.prod(np.cos(x / np.sqrt(i)))


def levy(x):
    w = 1 + (x - 1) / 4
    head = np.sin(PI * w[0]) ** 2
    body = np.sum((w[:-1] - 1) ** 2 * (1 + 10 * np.sin(PI * w[:-1] + 1) ** 2))
    tail = (w[-1] - 1) ** 2 * (1 + np.sin(2 * PI * w[-1]) ** 2)
    return head + body + tail


def levy13(x):
    x1, x2 = x
    return (np.sin(3 * PI * x1) ** 2 + (x1 - 1) ** 2 * (1 + np.sin(3 * PI * x2) ** 2)
            + (x2 - 1) ** 2 * (1 + np.sin(2 * PI * x2) ** 2))


def rastrigin(x):
    return 10 * x.size + np.sum(x ** 2 - 10 * np.cos(2 * PI * x))


def perm(x, beta=0.5):
    d = x.size
    j = np.arange(1, d + 1)
    return sum(np.sum((j ** i + beta) * ((x / j) ** i - 1)) ** 2 for i in range(1, d + 1))


def sum_of_squares(x):
    return np.sum(np.arange(1, x.size + 1) * x ** 2)


def booth(x):
    x1, x2 = x
    return (x1 + 2 * x2 - 7) ** 2 + (2 * x1 + x2 - 5) ** 2


def rosenbrock(x):
    return np.sum(100 * (x[1:] - x[:-1] ** 2) ** 2 + (x[:-1] - 1) ** 2)


def adjiman(x):
    x1, x2 = x
    return np.cos(x1) * np.sin(x2) - x1 / (x2 ** 2 + 1)


def alpine(x):
    return np.sum(np.abs(x * np.sin(x) + 0.1 * x))


def bartels_conn(x):
    x1, x2 = x
    return np.abs(x1 ** 2 + x2 ** 2 + x1 * x2) + np.abs(np.sin(x1)) + np.abs(np.cos(x2))


def bird(x):
    x1, x2 = x
    return (np.sin(x1) * np.exp((1 - np.cos(x2)) ** 2) + np.cos(x2) * np.exp((1 - np.sin(x1)) ** 2)
            + (x1 - x2) ** 2)


def colville(x):
    x1, x2, x3, x4 = x
    return (100 * (x1 ** 2 - x2) ** 2 + (x1 - 1) ** 2 + (x3 - 1) ** 2 + 90 * (x3 ** 2 - x4) ** 2
            + 10.1 * ((x2 - 1) ** 2 + (x4 - 1) ** 2) + 19.8 * (x2 - 1) * (x4 - 1))


def dixon_price(x):
    i = np.arange(2, x.size + 1)
    return (x[0] - 1) ** 2 + np.sum(i * (2 * x[1:] ** 2 - x[:-1]) ** 2)


def exponential(x):
    return -np.exp(-0.5 * np.sum(x ** 2))


def hosaki(x):
    x1, x2 = x
    return (1 - 8 * x1 + 7 * x1 ** 2 - 7 / 3 * x1 ** 3 + 0.25 * x1 ** 4) * x2 ** 2 * np.exp(-x2)


def miele_cantrell(x):
    x1, x2, x3, x4 = x
    return (np.exp(-x1) - x2) ** 4 + 100 * (x2 - x3) ** 6 + np.tan(x3 - x4) ** 4 + x1 ** 8


def price2(x):
    x1, x2 = x
    return 1 + np.sin(x1) ** 2 + np.sin(x2) ** 2 - 0.1 * np.exp(-(x1 ** 2) - x2 ** 2)


def salomon(x):
    r = np.sqrt(np.sum(x ** 2))
    return 1 - np.cos(2 * PI * r) + 0.1 * r


def ackley(x):
    d = x.size
    return (-20 * np.exp(-0.2 * np.sqrt(np.sum(x ** 2) / d)) - np.exp(np.sum(np.cos(2 * PI * x)) / d)
            + 20 + np.e)


def schwefel225(x):
    return np.sum((x[1:] - 1) ** 2 + (x[0] - x[1:] ** 2) ** 2)


def wavy(x, k=10):
    return 1 - np.mean(np.cos(k * x) * np.exp(-(x ** 2) / 2))


def zakharov(x):
    s = np.sum(0.5 * np.arange(1, x.size + 1) * x)
    return np.sum(x ** 2) + s ** 2 + s ** 4


# === Registry ===

@dataclass(frozen=True, eq=False)
class TestFunction:
    __test__ = False  # kein pytest-Testfall

    id: int
    name: str
    dimension: int
    lower: Tuple[float, ...]
    upper: Tuple[float, ...]
    minimizers: Tuple[Tuple[float, ...], ...]
    f_star: float
    func: Callable[[np.ndarray], float]
    motf: bool = False
    multimodal: bool = True
    slug: str = ""

    @property
    def domain(self) -> BoxDomain:
        return BoxDomain(self.lower, self.upper)

    @property
    def minimizer_array(self) -> np.ndarray:
        return np.asarray(self.minimizers, dtype=float)

    def evaluate_raw(self, x_raw) -> float:
        return float(self.func(np.asarray(x_raw, dtype=float)))

    def evaluate(self, x) -> float:
        """Wertet im normierten Punkt x aus."""
        return self.evaluate_raw(denormalize(x, self.domain))

    @property
    def tolerance(self) -> float:
        return max(1e-3, 1e-3 * abs(self.f_star))

    @cached_property
    def values_at_minimizers(self) -> np.ndarray:
        return np.array([self.evaluate(x) for x in self.minimizer_array])

    @property
    def consistent(self) -> bool:
        return bool(np.all(np.abs(self.values_at_minimizers - self.f_star) <= self.tolerance))

    @cached_property
    def attainable_min(self) -> float:
        """Kleinster Wert aus f(x*) und lokaler Politur ab jedem x*."""
        best = float(np.min(self.values_at_minimizers))
        bounds = [(0.0, 1.0)] * self.dimension
        for start in self.minimizer_array:
            for method, options in (("L-BFGS-B", {"ftol": 1e-15, "gtol": 1e-12}),
                                    ("Nelder-Mead", {"xatol": 1e-12, "fatol": 1e-15, "maxfev": 4000})):
                result = minimize(self.evaluate, start, method=method, bounds=bounds, options=options)
                if np.all(np.isfinite(result.x)):
                    best = min(best, self.evaluate(np.clip(result.x, 0.0, 1.0)))
        return best

    @cached_property
    def reference_f_star(self) -> float:
        """
        f* für Metriken: der Tabellenwert, solange er zur Implementierung
        passt, sonst das tatsächlich erreichbare Minimum.
        """
        if self.consistent and self.attainable_min >= self.f_star - self.tolerance:
            return float(self.f_star)
        logger.debug(f"TF{self.id} ({self.name}): Referenz-f* {self.attainable_min:.6g} statt {self.f_star:g}")
        return min(float(self.f_star), self.attainable_min)


def _box(n, low, high):
    return (low,) * n, (high,) * n


def _center(n):
    return ((0.5,) * n,)


def _repeat(n, value):
    return ((value,) * n,)


# id, Name, N, lower, upper, Minimierer (normiert), f*, Funktion, MOTF
_DEFINITIONS = [
    (1, "Six-Hump Camel Back", 2, (-2, -1), (2, 1), ((0.5225, 0.1437), (0.4775, 0.8563)), -1.0316, six_hump_camel_back, False),
    (2, "Ackley 3", 2, *_box(2, -32, 32), ((0.4893, 0.4944),), -195.629, ackley3, False),
    (3, "Ackley 4", 2, *_box(2, -5, 5), ((0.3490, 0.4245),), -4.5901, ackley4, False),
    (4, "Beale", 2, *_box(2, -4.5, 4.5), ((0.8333, 0.5556),), 0.0, beale, False),
    (5, "Branin", 2, (-5, 0), (10, 15), ((0.1239, 0.8183), (0.5428, 0.1517), (0.9617, 0.1650)), 0.3979, branin, False),
    (6, "Cross in Tray", 2, *_box(2, -10, 10),
     ((0.5697, 0.4303), (0.5697, 0.5697), (0.4303, 0.5697), (0.4303, 0.4303)), -2.0626, cross_in_tray, False),
    (7, "Easom", 2, *_box(2, -10, 10), ((0.6571, 0.6571),), -1.0, easom, False),
    (8, "Eggholder", 2, *_box(2, -512, 512), ((1.0, 0.8948),), -959.641, eggholder, False),
    (9, "Goldstein-Price", 2, *_box(2, -2, 2), ((0.5, 0.25),), 3.0, goldstein_price, False),
    (10, "Holder Table", 2, *_box(2, -10, 10),
     ((0.9028, 0.9832), (0.9028, 0.0168), (0.0972, 0.9832), (0.0972, 0.0168)), -19.2085, holder_table, False),
    (11, "Michalewicz", 2, *_box(2, 0, PI), ((0.7002, 0.4997),), -1.8013, michalewicz, False),
    (12, "Schwefel", 2, *_box(2, -500, 500), ((0.9210, 0.9210),), 0.0, schwefel, False),
    (13, "Shubert", 2, *_box(2, -5.12, 5.12),
     ((0.3608, 0.4218), (0.4218, 0.3608), (0.4218, 0.9744), (0.9744, 0.4218)), -186.731, shubert, False),
    (14, "Styblinski-Tang", 2, *_box(2, -5, 5), ((0.2096, 0.2096),), -78.332, styblinski_tang, False),
    (15, "McCormick", 2, (-1.5, -3), (4, 4), ((0.1732, 0.2075),), -1.9133, mccormick, False),
    (16, "Hartmann 3", 3, *_box(3, 0, 1), ((0.1146, 0.5556, 0.8525),), -3.8628, hartmann3, False),
    (17, "Shekel 5", 4, *_box(4, 0, 10), _repeat(4, 0.4), -10.1532, lambda x: shekel(x, 5), False),
    (18, "Shekel 7", 4, *_box(4, 0, 10), _repeat(4, 0.4), -10.4029, lambda x: shekel(x, 7), False),
    (19, "Trid", 5, *_box(5, -25, 25), ((0.6, 0.66, 0.68, 0.66, 0.6),), -30.0, trid, False),
    (20, "Hartmann 6", 6, *_box(6, 0, 1), ((0.2017, 0.1500, 0.4769, 0.2753, 0.3117, 0.6573),), -3.0425, hartmann6, False),
    (21, "Bukin", 2, (-15, -3), (-5, 3), ((0.5, 0.6667),), 0.0, bukin6, False),
    (22, "Griewank", 5, *_box(5, -600, 600), _center(5), 0.0, griewank, True),
    (23, "Levy", 6, *_box(6, -10, 10), _repeat(6, 0.55), 0.0, levy, False),
    (24, "Levy 13", 2, *_box(2, -10, 10), ((0.55, 0.55),), 0.0, levy13, False),
    (25, "Rastrigin", 6, *_box(6, -5.12, 5.12), _center(6), 0.0, rastrigin, True),
    (26, "Perm", 5, *_box(5, -5, 5), ((0.6, 0.7, 0.8, 0.9, 1.0),), 0.0, perm, False),
    (27, "Sum of Squares", 4, *_box(4, -5.12, 5.12), _center(4), 0.0, sum_of_squares, True),
    (28, "Booth", 2, *_box(2, -10, 10), ((0.55, 0.65),), 0.0, booth, False),
    (29, "Rosenbrock", 3, *_box(3, -2.048, 2.048), _repeat(3, 0.7441), 0.0, rosenbrock, False),
    (30, "Griewank", 2, *_box(2, -50, 50), _center(2), 0.0, griewank, True),
    (31, "Rastrigin", 2, *_box(2, -5.12, 5.12), _center(2), 0.0, rastrigin, True),
    (32, "Perm", 2, *_box(2, -2, 2), ((0.75, 1.0),), 0.0, perm, False),
    (33, "Perm", 3, *_box(3, -3, 3), ((0.6667, 0.8333, 1.0),), 0.0, perm, False),
    (34, "Adjiman", 2, (-1, -1), (2, 1), ((1.0, 0.5529),), -2.0218, adjiman, False),
    (35, "Alpine", 2, *_box(2, -10, 10), _center(2), 0.0, alpine, True),
    (36, "Alpine", 4, *_box(4, -10, 10), _center(4), 0.0, alpine, True),
    (37, "Alpine", 6, *_box(6, -10, 10), _center(6), 0.0, alpine, True),
    (38, "Bartels Conn", 2, *_box(2, -500, 500), _center(2), 1.0, bartels_conn, True),
    (39, "Bird", 2, *_box(2, -6.284, 6.284), ((0.8740, 0.7509), (0.3741, 0.2508)), -106.765, bird, False),
    (40, "Colville", 4, *_box(4, -10, 10), _repeat(4, 0.55), 0.0, colville, False),
    (41, "Dixon-Price", 2, *_box(2, -10, 10), ((0.55, 0.5354),), 0.0, dixon_price, False),
    (42, "Dixon-Price", 4, *_box(4, -10, 10), ((0.55, 0.5353, 0.5297, 0.5273),), 0.0, dixon_price, False),
    (43, "Exponential", 2, *_box(2, -1, 1), _center(2), -1.0, exponential, True),
    (44, "Hosaki", 2, (0, 0), (5, 6), ((0.8, 0.3333),), -2.3458, hosaki, False),
    (45, "Miele-Cantrell", 4, *_box(4, -1, 1), ((0.5, 1.0, 1.0, 1.0),), 0.0, miele_cantrell, False),
    (46, "Price", 2, *_box(2, -10, 10), _center(2), 0.9, price2, True),
    (47, "Salomon", 3, *_box(3, -100, 100), _center(3), 0.0, salomon, True),
    (48, "Ackley", 6, *_box(6, -5, 5), _center(6), 0.0, ackley, True),
    (49, "Exponential", 6, *_box(6, -1, 1), _center(6), -1.0, exponential, True),
    (50, "Schwefel 2.25", 10, *_box(10, 0, 10), _repeat(10, 0.1), 0.0, schwefel225, False),
    (51, "Wavy", 10, *_box(10, -PI, PI), _center(10), 0.0, wavy, True),
    (52, "Zakharov", 10, *_box(10, -5, 5), _center(10), 0.0, zakharov, True),
]

# unimodal und konvex, alle übrigen multimodal
UNIMODAL_IDS = frozenset({19, 27, 28, 29, 41, 42, 52})


def _slugify(name: str) -> str:
    return re.sub(r"[^a-z0-9]+", "-", name.lower()).strip("-")


def _build_registry() -> Dict[int, TestFunction]:
    base_slugs = [_slugify(d[1]) for d in _DEFINITIONS]
    registry = {}
    for definition, base in zip(_DEFINITIONS, base_slugs):
        fid, name, dim, lower, upper, minimizers, f_star, func, motf = definition
        slug = base if base_slugs.count(base) == 1 else f"{base}-{dim}d"
        registry[fid] = TestFunction(
            id=fid,
            name=name,
            dimension=dim,
            lower=tuple(float(v) for v in lower),
            upper=tuple(float(v) for v in upper),
            minimizers=tuple(tuple(float(v) for v in m) for m in minimizers),
            f_star=float(f_star),
            func=func,
            motf=motf,
            multimodal=fid not in UNIMODAL_IDS,
            slug=slug,
        )
    return registry


REGISTRY: Dict[int, TestFunction] = _build_registry()


def all_functions() -> List[TestFunction]:
    return [REGISTRY[i] for i in sorted(REGISTRY)]


def get_function(key: Union[int, str]) -> TestFunction:
    """Sucht eine Testfunktion über id (``5``, ``"5"``, ``"TF5"``) oder Slug."""
    text = str(key).strip()
    match = re.fullmatch(r"(?:tf)?(\d+)", text.lower())
    if match:
        fid = int(match.group(1))
        if fid not in REGISTRY:
            raise InvalidConfig(f"Keine Testfunktion mit id {fid}")
        return REGISTRY[fid]

    slug = _slugify(text)
    for fn in REGISTRY.values():
        if fn.slug == slug:
            return fn
    candidates = [fn.slug for fn in REGISTRY.values() if fn.slug.startswith(slug + "-")]
    if candidates:
        raise InvalidConfig(f"'{key}' ist mehrdeutig, gemeint ist eine von: {', '.join(candidates)}")
    raise InvalidConfig(f"Unbekannte Testfunktion '{key}'")


def select_functions(suite: str = "all", ids: Sequence[int] = ()) -> List[TestFunction]:
    if ids:
        return [get_function(i) for i in ids]
    if suite == "all":
        return all_functions()
    if suite == "2d":
        return [fn for fn in all_functions() if fn.dimension == 2]
    if suite == "motf":
        return [fn for fn in all_functions() if fn.motf]
    if suite == "non-motf":
        return [fn for fn in all_functions() if not fn.motf]
    raise InvalidConfig(f"Unbekannte Suite '{suite}' (all, 2d, motf, non-motf)")


def evaluate(fn: TestFunction, x) -> float:
    return fn.evaluate(x)


def self_check(functions: Sequence[TestFunction] = ()) -> pd.DataFrame:
    """
    Prüft |f(x*) - f*| <= max(1e-3, 1e-3·|f*|) an jedem Minimierer.

    Returns:
        DataFrame mit einer Zeile pro Funktion
    """
    rows = []
    for fn in tqdm(functions or all_functions(), desc="Selbsttest"):
        values = fn.values_at_minimizers
        deviation = float(np.max(np.abs(values - fn.f_star)))
        rows.append({
            "id": fn.id,
            "name": fn.name,
            "N": fn.dimension,
            "f_star": fn.f_star,
            "f_at_minimizers": values.tolist(),
            "max_deviation": deviation,
            "tolerance": fn.tolerance,
            "passed": deviation <= fn.tolerance,
        })
    return pd.DataFrame(rows)


def discrepancy_list(check: pd.DataFrame = None) -> List[dict]:
    """Nicht bestandene Selbsttest-Zeilen als maschinenlesbare Liste."""
    check = self_check() if check is None else check
    failed = check[~check["passed"]]
    return [
        {
            "id": int(row.id),
            "name": row.name,
            "f_star_table": float(row.f_star),
            "f_at_minimizers": [float(v) for v in row.f_at_minimizers],
            "max_deviation": float(row.max_deviation),
        }
        for row in failed.itertuples(index=False)
    ]
