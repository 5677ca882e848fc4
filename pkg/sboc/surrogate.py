"""
Surrogatmodelle: Multiquadric-RBF mit linearem Tail und Kriging mit
Gauß-Korrelation und quadratischem Trend.

Alle Modelle arbeiten in normierten Koordinaten und sind nach dem Training
unveränderlich. ``train`` wählt den Trainer über die Registry anhand von
``SurrogateSpec.kind``; eigene Modelltypen lassen sich mit
``register_surrogate`` hinzufügen.
"""

import json
import logging
import warnings
from abc import ABC, abstractmethod
from dataclasses import dataclass, field
from typing import Callable, Dict, NamedTuple, Tuple, Union

import numpy as np
from scipy.linalg import LinAlgError, LinAlgWarning, cho_factor, cho_solve, solve, solve_triangular
from scipy.optimize import minimize
from scipy.spatial.distance import cdist
from sklearn.preprocessing import PolynomialFeatures

from .core import Dataset, IllConditioned, InvalidConfig, RngStream, SingularSystem, TooFewPoints

logger = logging.getLogger(__name__)

MODEL_FORMAT = "sboc-surrogate"
MODEL_FORMAT_VERSION = 1

# Kriging: Nugget-Stufen und Suchraum für log10(θ)
NUGGET_LEVELS = (1e-10, 1e-8, 1e-6)
LOG10_THETA_BOUNDS = (-3.0, 3.0)
SIGMA2_FLOOR = 1e-12
LIKELIHOOD_PENALTY = 1e10


@dataclass(frozen=True)
class SurrogateSpec:
    kind: str = "rbf"
    options: Dict[str, object] = field(default_factory=dict)


class SurrogateModel(ABC):
    kind: str = ""

    @abstractmethod
    def predict(self, x) -> Union[float, np.ndarray]:
        """Vorhersage für einen Punkt (N,) oder eine Matrix (M, N)."""

    @abstractmethod
    def to_dict(self) -> dict:
        pass

    def to_json(self) -> str:
        payload = {"format": MODEL_FORMAT, "version": MODEL_FORMAT_VERSION, "kind": self.kind}
        payload.update(self.to_dict())
        return json.dumps(payload, indent=2)


def _as_matrix(x) -> Tuple[np.ndarray, bool]:
    x = np.asarray(x, dtype=float)
    return np.atleast_2d(x), x.ndim == 1


# === RBF ===

@dataclass(frozen=True, eq=False)
class RbfModel(SurrogateModel):
    centers: np.ndarray
    beta: np.ndarray
    tail: np.ndarray  # a0, a1..aN
    psi: float

    kind = "rbf"

    def predict(self, x):
        X, single = _as_matrix(x)
        basis = np.sqrt(cdist(X, self.centers, "sqeuclidean") + self.psi ** 2)
        values = basis @ self.beta + self.tail[0] + X @ self.tail[1:]
        return float(values[0]) if single else values

    def to_dict(self) -> dict:
        return {
            "psi": float(self.psi),
            "centers": self.centers.tolist(),
            "beta": self.beta.tolist(),
            "tail": self.tail.tolist(),
        }

    @classmethod
    def from_dict(cls, data: dict) -> "RbfModel":
        return cls(
            centers=np.asarray(data["centers"], dtype=float),
            beta=np.asarray(data["beta"], dtype=float),
            tail=np.asarray(data["tail"], dtype=float),
            psi=float(data["psi"]),
        )


def psi_grid(count: int, n_candidates: int = 10) -> np.ndarray:
    """Äquidistante ψ-Kandidaten auf [1/K, 1]."""
    return np.linspace(1.0 / count, 1.0, n_candidates)


def _strict_solve(A: np.ndarray, rhs: np.ndarray) -> np.ndarray:
    with warnings.catch_warnings():
        warnings.simplefilter("error", LinAlgWarning)
        solution = solve(A, rhs)
    if not np.all(np.isfinite(solution)):
        raise LinAlgError("nicht-endliche Lösung")
    return solution


def fit_rbf(X: np.ndarray, y: np.ndarray, psi: float) -> RbfModel:
    """Löst das geränderte Interpolationssystem [[Φ, P], [Pᵀ, 0]] für festes ψ."""
    K, N = X.shape
    phi = np.sqrt(cdist(X, X, "sqeuclidean") + psi ** 2)
    P = np.hstack([np.ones((K, 1)), X])
    A = np.block([[phi, P], [P.T, np.zeros((N + 1, N + 1))]])
    rhs = np.concatenate([y, np.zeros(N + 1)])

    try:
        solution = _strict_solve(A, rhs)
    except (LinAlgError, LinAlgWarning):
        ridge = 1e-10 * np.trace(phi) / K
        logger.debug(f"RBF-System schlecht konditioniert (ψ={psi:.4g}), Ridge {ridge:.3g}")
        A[:K, :K] += ridge * np.eye(K)
        try:
            solution = _strict_solve(A, rhs)
        except (LinAlgError, LinAlgWarning) as e:
            raise SingularSystem(f"RBF-System singulär für ψ={psi:.4g}, K={K}") from e

    return RbfModel(centers=X.copy(), beta=solution[:K], tail=solution[K:], psi=float(psi))


def train_rbf(dataset: Dataset, rng: RngStream, n_psi: int = 10, train_fraction: float = 0.8) -> RbfModel:
    """
    Trainiert ein Multiquadric-RBF-Modell mit ψ-Auswahl per Holdout-RMSE.

    Args:
        dataset: Trainingsdaten (mindestens N+2 Punkte)
        rng: Zufallsstrom für die 80/20-Aufteilung je ψ-Kandidat
        n_psi: Anzahl ψ-Kandidaten
        train_fraction: Anteil der Trainingspunkte je Kandidat

    Returns:
        Auf allen Punkten gefittetes RbfModel
    """
    X, y = dataset.X, dataset.y
    K, N = X.shape
    if K < N + 2:
        raise TooFewPoints(f"RBF braucht mindestens {N + 2} Punkte, vorhanden: {K}")

    candidates = psi_grid(K, n_psi)
    n_train = max(int(np.floor(train_fraction * K)), N + 2)
    scores = np.full(candidates.size, np.inf)

    if n_train < K:
        for j, psi in enumerate(candidates):
            order = rng.child(f"psi-{j}").generator.permutation(K)
            fit_idx, hold_idx = np.sort(order[:n_train]), order[n_train:]
            try:
                model = fit_rbf(X[fit_idx], y[fit_idx], psi)
            except SingularSystem:
                continue
            residual = model.predict(X[hold_idx]) - y[hold_idx]
            scores[j] = np.sqrt(np.mean(residual ** 2))
        # argmin liefert bei Gleichstand den ersten, also das kleinere ψ
        best = int(np.argmin(scores)) if np.any(np.isfinite(scores)) else 0
    else:
        best = 0

    psi = candidates[best]
    logger.debug(f"RBF: ψ={psi:.4f} gewählt (RMSE {scores[best]:.4g}, K={K})")
    return fit_rbf(X, y, psi)


# === Kriging ===

@dataclass(frozen=True, eq=False)
class KrigingModel(SurrogateModel):
    centers: np.ndarray
    powers: np.ndarray  # (p, N) Exponenten des Trendpolynoms
    trend: np.ndarray
    gamma: np.ndarray
    theta: np.ndarray
    sigma2: float
    nugget: float

    kind = "kriging"

    def trend_value(self, X: np.ndarray) -> np.ndarray:
        return _trend_matrix(X, self.powers) @ self.trend

    def predict(self, x):
        X, single = _as_matrix(x)
        values = self.trend_value(X) + _correlation(X, self.centers, self.theta) @ self.gamma
        return float(values[0]) if single else values

    def to_dict(self) -> dict:
        return {
            "theta": self.theta.tolist(),
            "sigma2": float(self.sigma2),
            "nugget": float(self.nugget),
            "powers": self.powers.tolist(),
            "trend": self.trend.tolist(),
            "centers": self.centers.tolist(),
            "gamma": self.gamma.tolist(),
        }

    @classmethod
    def from_dict(cls, data: dict) -> "KrigingModel":
        return cls(
            centers=np.asarray(data["centers"], dtype=float),
            powers=np.asarray(data["powers"], dtype=int),
            trend=np.asarray(data["trend"], dtype=float),
            gamma=np.asarray(data["gamma"], dtype=float),
            theta=np.asarray(data["theta"], dtype=float),
            sigma2=float(data["sigma2"]),
            nugget=float(data["nugget"]),
        )


def _trend_matrix(X: np.ndarray, powers: np.ndarray) -> np.ndarray:
    return np.prod(X[:, None, :] ** powers[None, :, :], axis=2)


def _correlation(A: np.ndarray, B: np.ndarray, theta: np.ndarray) -> np.ndarray:
    scale = np.sqrt(theta)
    return np.exp(-cdist(A * scale, B * scale, "sqeuclidean"))


class _GlsFit(NamedTuple):
    neg_log_likelihood: float
    beta: np.ndarray
    gamma: np.ndarray
    sigma2: float
    nugget: float


def _gls_fit(theta: np.ndarray, X: np.ndarray, F: np.ndarray, y: np.ndarray, nuggets=NUGGET_LEVELS) -> _GlsFit:
    """Verallgemeinerte kleinste Quadrate für festes θ; eskaliert den Nugget bei Bedarf."""
    K = X.shape[0]
    R0 = _correlation(X, X, theta)
    last_error = None
    for nugget in nuggets:
        try:
            factor = cho_factor(R0 + nugget * np.eye(K), lower=True)
        except LinAlgError as e:
            last_error = e
            continue
        L = factor[0]
        F_white = solve_triangular(L, F, lower=True)
        y_white = solve_triangular(L, y, lower=True)
        beta, *_ = np.linalg.lstsq(F_white, y_white, rcond=None)
        r_white = y_white - F_white @ beta
        sigma2 = max(float(r_white @ r_white) / K, SIGMA2_FLOOR)
        log_det = 2.0 * np.sum(np.log(np.diag(L)))
        nll = 0.5 * K * np.log(sigma2) + 0.5 * log_det
        gamma = cho_solve(factor, y - F @ beta)
        return _GlsFit(float(nll), beta, gamma, sigma2, nugget)
    raise IllConditioned(f"Korrelationsmatrix nicht positiv definit, auch mit Nugget {nuggets[-1]:g}") from last_error


def train_kriging(dataset: Dataset, rng: RngStream, n_starts: int = 5, max_evals: int = 200) -> KrigingModel:
    """
    Trainiert ein Kriging-Modell (Gauß-Korrelation, quadratischer Trend).

    θ maximiert die konzentrierte Log-Likelihood; gesucht wird in
    log10-Koordinaten auf [-3, 3]^N mit L-BFGS-B aus ``n_starts`` Startpunkten.
    """
    X, y = dataset.X, dataset.y
    K, N = X.shape
    poly = PolynomialFeatures(degree=2, include_bias=True).fit(X)
    n_trend = poly.n_output_features_
    if K < n_trend + 1:
        raise TooFewPoints(f"Kriging braucht mindestens {n_trend + 1} Punkte, vorhanden: {K}")

    F = poly.transform(X)
    y_mean = float(np.mean(y))
    y_std = float(np.std(y)) or 1.0
    y_scaled = (y - y_mean) / y_std

    def objective(log_theta: np.ndarray) -> float:
        try:
            return _gls_fit(10.0 ** log_theta, X, F, y_scaled).neg_log_likelihood
        except IllConditioned:
            return LIKELIHOOD_PENALTY

    bounds = [LOG10_THETA_BOUNDS] * N
    starts = rng.generator.uniform(*LOG10_THETA_BOUNDS, size=(n_starts, N))
    best_x, best_f = None, np.inf
    for start in starts:
        result = minimize(objective, start, method="L-BFGS-B", bounds=bounds, options={"maxfun": max_evals})
        if result.fun < best_f:
            best_x, best_f = np.clip(result.x, *LOG10_THETA_BOUNDS), float(result.fun)
    if best_x is None:
        best_x = starts[0]

    theta = 10.0 ** best_x
    fit = _gls_fit(theta, X, F, y_scaled)
    if fit.nugget > NUGGET_LEVELS[0]:
        logger.warning(f"Kriging: Nugget auf {fit.nugget:g} erhöht (K={K}, N={N})")

    trend = y_std * fit.beta
    trend[0] += y_mean
    logger.debug(f"Kriging: θ={np.round(theta, 4).tolist()}, -logL={fit.neg_log_likelihood:.4g}")
    return KrigingModel(
        centers=X.copy(),
        powers=poly.powers_.astype(int),
        trend=trend,
        gamma=y_std * fit.gamma,
        theta=theta,
        sigma2=y_std ** 2 * fit.sigma2,
        nugget=fit.nugget,
    )


# === Registry ===

class SurrogateKind(NamedTuple):
    trainer: Callable[..., SurrogateModel]
    required_points: Callable[[int], int]
    model_type: type


_REGISTRY: Dict[str, SurrogateKind] = {}


def register_surrogate(kind: str, trainer, required_points, model_type=None):
    """Registriert einen Modelltyp für ``train`` und ``load_model``."""
    _REGISTRY[kind] = SurrogateKind(trainer, required_points, model_type)


register_surrogate("rbf", train_rbf, lambda n: n + 2, RbfModel)
register_surrogate("kriging", train_kriging, lambda n: (n + 1) * (n + 2) // 2 + 1, KrigingModel)


def available_kinds():
    return sorted(_REGISTRY)


def _lookup(kind: str) -> SurrogateKind:
    if kind not in _REGISTRY:
        raise InvalidConfig(f"Unbekannter Surrogattyp '{kind}' (verfügbar: {', '.join(available_kinds())})")
    return _REGISTRY[kind]


def required_points(kind: str, dimension: int) -> int:
    """Mindestzahl Punkte, ab der ``kind`` identifizierbar ist."""
    return _lookup(kind).required_points(dimension)


def train(spec: SurrogateSpec, dataset: Dataset, rng: RngStream) -> SurrogateModel:
    return _lookup(spec.kind).trainer(dataset, rng, **spec.options)


def load_model(text: str) -> SurrogateModel:
    """Liest ein mit ``to_json`` geschriebenes Modell."""
    data = json.loads(text)
    if data.get("format") != MODEL_FORMAT:
        raise InvalidConfig(f"Kein SBOC-Modell (format={data.get('format')!r})")
    if data.get("version") != MODEL_FORMAT_VERSION:
        raise InvalidConfig(f"Nicht unterstützte Modellversion {data.get('version')!r}")
    model_type = _lookup(data["kind"]).model_type
    if model_type is None:
        raise InvalidConfig(f"Modelltyp '{data['kind']}' ist nicht serialisierbar")
    return model_type.from_dict(data)
