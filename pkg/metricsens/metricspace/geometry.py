"""
Stichproben-Geometrie
Indexbasierter Zugriff auf Punkte und gecachte Distanzmatrizen für eine gepaarte Stichprobe
"""

import threading
from typing import Literal

import numpy as np
from loguru import logger
from scipy.spatial.distance import cdist
from sklearn.metrics.pairwise import euclidean_distances

from metricsens.metricspace.spaces import MetricSpace, PointKind

Side = Literal["z", "zu"]

# Ab dieser Einbettungsdimension werden Distanzen per Gram-Matrix (BLAS) berechnet
_GRAM_MIN_DIM = 64
_ROUNDOFF = 64 * np.finfo(float).eps


def pairwise_distances(space: MetricSpace, x: np.ndarray, y: np.ndarray | None = None) -> np.ndarray:
    """Distanzmatrix d(x_i, y_j); y=None bedeutet y=x (Diagonale exakt 0)"""
    if space.kind is PointKind.SCALAR:
        xs = space.check_points(x)
        ys = xs if y is None else space.check_points(y)
        return np.abs(xs[:, None] - ys[None, :])

    ex = space.embed(x)
    ey = ex if y is None else space.embed(y)
    if ex.shape[1] < _GRAM_MIN_DIM:
        return cdist(ex, ey)

    # Gram-Trick: Auslöschung bei (fast) gleichen Punkten auf 0 setzen
    sq = euclidean_distances(ex, None if y is None else ey, squared=True)
    scale = np.add.outer(np.einsum("ij,ij->i", ex, ex), np.einsum("ij,ij->i", ey, ey))
    sq[sq <= _ROUNDOFF * scale] = 0.0
    return np.sqrt(sq)


class SampleGeometry:
    """
    Sicht auf eine gepaarte Stichprobe (Z_i, Z_i^u).

    Testfunktions-Parameter stammen immer aus der Z-Spalte, Auswertungspunkte
    aus Z oder Z^u. Distanzmatrizen werden erst bei Bedarf berechnet.
    """

    def __init__(self, z: np.ndarray, zu: np.ndarray, space: MetricSpace):
        self.space = space
        self.z = space.check_points(z)
        self.zu = space.check_points(zu)
        self._dist: dict[str, np.ndarray] = {}
        self._lock = threading.Lock()

    @property
    def n(self) -> int:
        return int(self.z.shape[0])

    def values(self, side: Side, idx: np.ndarray) -> np.ndarray:
        return (self.z if side == "z" else self.zu)[idx]

    def distances(self, side: Side) -> np.ndarray:
        """
        N x N Matrix d(side_k, z_i), Zeile = Auswertungspunkt.

        Wird genau einmal berechnet, auch wenn mehrere Threads gleichzeitig fragen.
        """
        cached = self._dist.get(side)
        if cached is not None:
            return cached
        with self._lock:
            if side not in self._dist:
                logger.debug(f"Computing {self.n}x{self.n} distance matrix ({side} vs z) on {self.space!r}")
                other = None if side == "z" else self.z
                self._dist[side] = pairwise_distances(self.space, self.values(side, slice(None)), other)
            return self._dist[side]

    def prefetch(self) -> None:
        """Beide Distanzmatrizen vor einer parallelen Auswertung berechnen"""
        self.distances("z")
        self.distances("zu")

    def dist(self, side: Side, x_idx: np.ndarray, a_idx: np.ndarray) -> np.ndarray:
        return self.distances(side)[x_idx, a_idx]

    def subset(self, rows: np.ndarray) -> "SampleGeometry":
        """Geometrie einer Zeilenauswahl (mit Wiederholung), Distanz-Cache wird mitgenommen"""
        sub = SampleGeometry.__new__(SampleGeometry)
        sub.space = self.space
        sub.z = self.z[rows]
        sub.zu = self.zu[rows]
        sub._dist = {side: matrix[np.ix_(rows, rows)] for side, matrix in self._dist.items()}
        sub._lock = threading.Lock()
        return sub
