"""
k-means mit Elbow-Auswahl der Clusterzahl, Inter-Cluster-Abstände und der
Explorationspunkt zwischen den am weitesten entfernten Nachbar-Clustern.
"""

import logging
from dataclasses import dataclass
from typing import Dict, Optional, Tuple

import numpy as np
from scipy.spatial.distance import cdist
from sklearn.cluster import KMeans, kmeans_plusplus

from .core import DegenerateSpread, InvalidConfig, RngStream, TooFewPoints

logger = logging.getLogger(__name__)

DEFAULT_RESTARTS = 10
DEFAULT_MAX_ITER = 100
DEFAULT_MAX_CLUSTERS = 12


@dataclass(frozen=True, eq=False)
class Clustering:
    labels: np.ndarray
    centroids: np.ndarray
    icsd: np.ndarray
    ticsd: float
    restart_ticsd: Tuple[float, ...] = ()

    @property
    def n_clusters(self) -> int:
        return int(self.centroids.shape[0])

    def members(self, cluster: int) -> np.ndarray:
        return np.flatnonzero(self.labels == cluster)

    @classmethod
    def from_labels(cls, points, labels, centroids: Optional[np.ndarray] = None) -> "Clustering":
        """
        Baut eine Clustering-Instanz aus vorgegebenen Labels.

        Ohne ``centroids`` werden die Mittelwerte der Mitglieder verwendet.
        """
        points = np.asarray(points, dtype=float)
        labels = np.asarray(labels, dtype=int)
        n_clusters = int(labels.max()) + 1 if centroids is None else len(centroids)
        if centroids is None:
            centroids = _means(points, labels, n_clusters)
        distances = np.linalg.norm(points - centroids[labels], axis=1)
        icsd = np.bincount(labels, weights=distances, minlength=n_clusters)
        return cls(labels=labels, centroids=np.asarray(centroids, dtype=float), icsd=icsd, ticsd=float(icsd.sum()))


def total_dispersion(points) -> float:
    """Summe der Abstände aller Punkte zum globalen Schwerpunkt (C = 1)."""
    points = np.asarray(points, dtype=float)
    return float(np.linalg.norm(points - points.mean(axis=0), axis=1).sum())


def _means(points: np.ndarray, labels: np.ndarray, n_clusters: int) -> np.ndarray:
    counts = np.bincount(labels, minlength=n_clusters).astype(float)
    sums = np.zeros((n_clusters, points.shape[1]))
    np.add.at(sums, labels, points)
    return sums / np.maximum(counts, 1.0)[:, None]


def _repair_empty(points: np.ndarray, labels: np.ndarray, centroids: np.ndarray):
    """Leere Cluster bekommen den Punkt, der am weitesten von seinem Schwerpunkt liegt."""
    n_clusters = len(centroids)
    counts = np.bincount(labels, minlength=n_clusters)
    if np.all(counts > 0):
        return labels, centroids

    labels, centroids = labels.copy(), centroids.copy()
    for cluster in np.flatnonzero(counts == 0):
        distances = np.linalg.norm(points - centroids[labels], axis=1)
        distances[counts[labels] <= 1] = -1.0
        far = int(np.argmax(distances))
        counts[labels[far]] -= 1
        counts[cluster] = 1
        labels[far] = cluster
        centroids[cluster] = points[far]
    return labels, centroids


def _lloyd(points: np.ndarray, seeds: np.ndarray, max_iter: int):
    """Lloyd-Iterationen ab festen Startzentren bis zum Label-Fixpunkt."""
    fitted = KMeans(n_clusters=len(seeds), init=seeds, n_init=1, max_iter=max_iter, tol=0.0,
                    algorithm="lloyd").fit(points)
    labels = fitted.labels_.astype(int)
    return _repair_empty(points, labels, _means(points, labels, len(seeds)))


def kmeans(points, n_clusters: int, rng: RngStream, restarts: int = DEFAULT_RESTARTS,
           max_iter: int = DEFAULT_MAX_ITER) -> Clustering:
    """
    k-means mit k-means++-Seeding, bestes Ergebnis aus ``restarts`` Läufen.

    Args:
        points: (K, N)-Matrix paarweise verschiedener Punkte
        n_clusters: Clusterzahl C (1 <= C <= K)
        rng: Zufallsstrom; jeder Restart zieht aus einem eigenen Unterstrom
        restarts: Anzahl Neustarts
        max_iter: Maximale Lloyd-Iterationen je Neustart

    Returns:
        Clustering mit minimaler TICSD (Gleichstand: früherer Restart)
    """
    points = np.asarray(points, dtype=float)
    if n_clusters < 1:
        raise InvalidConfig(f"Clusterzahl muss >= 1 sein, nicht {n_clusters}")
    if n_clusters > len(points):
        raise TooFewPoints(f"{n_clusters} Cluster bei nur {len(points)} Punkten")

    best = None
    history = []
    for restart in range(restarts):
        seed = rng.child(f"restart-{restart}").seed_int()
        seeds, _ = kmeans_plusplus(points, n_clusters=n_clusters, random_state=seed)
        labels, centroids = _lloyd(points, seeds.copy(), max_iter)
        candidate = Clustering.from_labels(points, labels, centroids)
        history.append(candidate.ticsd)
        if best is None or candidate.ticsd < best.ticsd:
            best = candidate

    return Clustering(best.labels, best.centroids, best.icsd, best.ticsd, tuple(history))


def elbow_select(points, rng: RngStream, threshold: float = 0.10,
                 max_clusters: int = DEFAULT_MAX_CLUSTERS) -> Tuple[int, Clustering]:
    """
    Wählt C* nach dem Elbow-Kriterium.

    C* ist das kleinste C, für das (TICSD_C - TICSD_{C+1}) / (TICSD_1 - TICSD_2)
    unter ``threshold`` fällt. Die TICSD-Kurve wird monoton fallend geklemmt,
    gesucht wird bis C = min(K-1, max_clusters).
    """
    points = np.asarray(points, dtype=float)
    K = len(points)
    if K < 4:
        raise TooFewPoints(f"Elbow-Auswahl braucht mindestens 4 Punkte, vorhanden: {K}")

    c_max = min(K - 1, max_clusters)
    clusterings: Dict[int, Clustering] = {}
    curve = {1: total_dispersion(points)}

    def ticsd(C: int) -> float:
        for c in range(2, C + 1):
            if c not in curve:
                clusterings[c] = kmeans(points, c, rng.child(f"C-{c}"))
                curve[c] = min(clusterings[c].ticsd, curve[c - 1])
        return curve[C]

    first_drop = curve[1] - ticsd(2)
    if first_drop <= 1e-12 * curve[1]:
        raise DegenerateSpread(f"TICSD fällt von C=1 nach C=2 nicht ({curve[1]:.6g} -> {curve[2]:.6g})")

    chosen = c_max
    for C in range(2, c_max + 1):
        if (ticsd(C) - ticsd(C + 1)) / first_drop < threshold:
            chosen = C
            break

    logger.debug(f"Elbow: C*={chosen}, TICSD={[round(curve[c], 4) for c in sorted(curve)]}")
    return chosen, clusterings[chosen]


def inter_cluster_distance(clustering: Clustering, points, u: int, v: int) -> Tuple[float, int, int]:
    """Kleinster Punktabstand zwischen Cluster u und v samt erreichendem Paar (p in u, q in v)."""
    if u == v:
        raise InvalidConfig("Inter-Cluster-Abstand braucht zwei verschiedene Cluster")
    points = np.asarray(points, dtype=float)
    members_u, members_v = clustering.members(u), clustering.members(v)
    distances = cdist(points[members_u], points[members_v])
    i, j = np.unravel_index(np.argmin(distances), distances.shape)
    return float(distances[i, j]), int(members_u[i]), int(members_v[j])


def farthest_neighbor_pair(clustering: Clustering, points) -> Tuple[int, int, float, int, int]:
    """
    Paar (u, v) benachbarter Cluster mit dem größten Inter-Cluster-Abstand.

    Returns:
        (u, v, Abstand, Punktindex in u, Punktindex in v)
    """
    C = clustering.n_clusters
    icd = {}
    for u in range(C):
        for v in range(u + 1, C):
            icd[(u, v)] = inter_cluster_distance(clustering, points, u, v)

    pairs = []
    for c in range(C):
        neighbors = [(icd[(min(c, v), max(c, v))][0], v) for v in range(C) if v != c]
        nearest = min(neighbors)[1]
        key = (min(c, nearest), max(c, nearest))
        if key not in pairs:
            pairs.append(key)

    best = pairs[0]
    for key in pairs[1:]:
        if icd[key][0] > icd[best][0]:
            best = key
    d, p, q = icd[best]
    return best[0], best[1], d, p, q


def exploration_point(clustering: Clustering, points) -> np.ndarray:
    """Mittelpunkt des Punktpaars zwischen den am weitesten entfernten Nachbar-Clustern."""
    if clustering.n_clusters < 2:
        raise InvalidConfig("Explorationspunkt braucht mindestens zwei Cluster")
    points = np.asarray(points, dtype=float)
    _, _, _, p, q = farthest_neighbor_pair(clustering, points)
    return 0.5 * (points[p] + points[q])
