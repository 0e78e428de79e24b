"""
Testfunktions-Familien T_a
Sobol (Identität, auch vektorwertig), Halbraum-Indikatoren (Cramér-von-Mises) und drei Ball-Konventionen
"""

from dataclasses import dataclass
from enum import Enum

import numpy as np

from metricsens.errors import ArityError, ConfigurationError, UnsupportedOperationError
from metricsens.metricspace.geometry import SampleGeometry, Side
from metricsens.metricspace.spaces import MetricSpace, PointKind


class FamilyKind(str, Enum):
    SOBOL_VALUE = "sobol_value"
    SOBOL_VECTOR = "sobol_vector"
    HALF_SPACE_CVM = "halfspace_cvm"
    METRIC_BALL = "metric_ball"
    MIDPOINT_BALL = "midpoint_ball"
    INTERSECTION_BALL = "intersection_ball"


FAMILY_ORDER = {
    FamilyKind.SOBOL_VALUE: 0,
    FamilyKind.SOBOL_VECTOR: 0,
    FamilyKind.HALF_SPACE_CVM: 1,
    FamilyKind.METRIC_BALL: 2,
    FamilyKind.MIDPOINT_BALL: 2,
    FamilyKind.INTERSECTION_BALL: 2,
}

BALL_KINDS = frozenset(
    {FamilyKind.METRIC_BALL, FamilyKind.MIDPOINT_BALL, FamilyKind.INTERSECTION_BALL}
)
SOBOL_KINDS = frozenset({FamilyKind.SOBOL_VALUE, FamilyKind.SOBOL_VECTOR})


@dataclass(frozen=True)
class TestFamily:
    """Familie (T_a) mit m Parameterpunkten auf einem metrischen Raum"""

    __test__ = False  # kein pytest-Testfall

    kind: FamilyKind
    space: MetricSpace

    def __post_init__(self) -> None:
        point_kind = self.space.kind
        if self.kind is FamilyKind.SOBOL_VALUE and point_kind is not PointKind.SCALAR:
            raise ConfigurationError("sobol_value needs scalar outputs")
        if self.kind is FamilyKind.SOBOL_VECTOR and point_kind not in (
            PointKind.SCALAR,
            PointKind.VECTOR,
        ):
            raise ConfigurationError("sobol_vector needs scalar or vector outputs")
        if self.kind is FamilyKind.HALF_SPACE_CVM and point_kind not in (
            PointKind.SCALAR,
            PointKind.VECTOR,
        ):
            raise ConfigurationError("halfspace_cvm needs scalar or vector outputs")
        if self.kind is FamilyKind.MIDPOINT_BALL and not self.space.supports_midpoint:
            raise UnsupportedOperationError(
                f"midpoint_ball needs a space with midpoints, {point_kind.value} has none"
            )

    @property
    def m(self) -> int:
        return FAMILY_ORDER[self.kind]

    @property
    def is_indicator(self) -> bool:
        return self.kind not in SOBOL_KINDS

    def product(self, t: np.ndarray | float, s: np.ndarray | float) -> np.ndarray | float:
        """Produkt zweier T-Werte; für sobol_vector das Skalarprodukt über die letzte Achse"""
        if self.kind is FamilyKind.SOBOL_VECTOR and self.space.kind is PointKind.VECTOR:
            return np.sum(np.asarray(t) * np.asarray(s), axis=-1)
        return t * s

    # ==================== Punkte ====================

    def evaluate(self, a: tuple, x: np.ndarray | float) -> np.ndarray | float:
        """T_a(x) auf einzelnen Punkten, Vektor nur für sobol_vector"""
        if len(a) != self.m:
            raise ArityError(f"{self.kind.value} takes {self.m} parameter points, got {len(a)}")
        x = self.space.check_point(x)

        if self.kind is FamilyKind.SOBOL_VALUE:
            return float(x)
        if self.kind is FamilyKind.SOBOL_VECTOR:
            return np.asarray(x, dtype=float) if self.space.kind is PointKind.VECTOR else float(x)
        if self.kind is FamilyKind.HALF_SPACE_CVM:
            return float(np.all(x <= self.space.check_point(a[0])))

        a1, a2 = (self.space.check_point(p) for p in a)
        radius = self.space.distance(a1, a2)
        if self.kind is FamilyKind.METRIC_BALL:
            return float(self.space.distance(x, a1) <= radius)
        if self.kind is FamilyKind.MIDPOINT_BALL:
            center = self.space.midpoint(a1, a2)
            return float(self.space.distance(x, center) <= radius / 2.0)
        return float(max(self.space.distance(x, a1), self.space.distance(x, a2)) <= radius)

    # ==================== Indizes ====================

    def evaluate_indexed(
        self,
        geom: SampleGeometry,
        a_idx: tuple[np.ndarray, ...],
        x_idx: np.ndarray,
        side: Side,
    ) -> np.ndarray:
        """
        Vektorisiert: T_{z[a_idx]}(side[x_idx]).

        Index-Arrays werden gebroadcastet, (c, 1) gegen (1, N) liefert eine
        c x N Matrix.
        """
        if len(a_idx) != self.m:
            raise ArityError(f"{self.kind.value} takes {self.m} parameter points, got {len(a_idx)}")

        if self.kind in SOBOL_KINDS:
            return geom.values(side, x_idx)
        if self.kind is FamilyKind.HALF_SPACE_CVM:
            x = geom.values(side, x_idx)
            a = geom.values("z", a_idx[0])
            below = x <= a
            if below.ndim > np.broadcast(x_idx, a_idx[0]).ndim:
                below = np.all(below, axis=-1)
            return below.astype(float)

        a1, a2 = a_idx
        radius = geom.dist("z", a1, a2)
        d1 = geom.dist(side, x_idx, a1)
        if self.kind is FamilyKind.METRIC_BALL:
            return (d1 <= radius).astype(float)
        d2 = geom.dist(side, x_idx, a2)
        if self.kind is FamilyKind.MIDPOINT_BALL:
            # |x - (a1+a2)/2|^2 = (d1^2 + d2^2)/2 - r^2/4 (Parallelogramm-Identität)
            center_sq = np.maximum((d1 * d1 + d2 * d2) / 2.0 - radius * radius / 4.0, 0.0)
            return (center_sq <= radius * radius / 4.0).astype(float)
        return (np.maximum(d1, d2) <= radius).astype(float)


def eval_family(family: TestFamily, a: tuple, x: np.ndarray | float) -> np.ndarray | float:
    return family.evaluate(a, x)


def distance(space: MetricSpace, x: np.ndarray | float, y: np.ndarray | float) -> float:
    return space.distance(x, y)
