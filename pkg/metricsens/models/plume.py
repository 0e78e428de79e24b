"""
Gauß-Fahne am Boden
C(x, y, 0) = Q / (2 pi K x) * exp(-u (y^2 + H^2) / (4 K x)) auf einem Gitter über [x_min, 10] x [-10, 10]
"""

from dataclasses import dataclass
from pathlib import Path

import numpy as np

from metricsens.config import settings
from metricsens.errors import DomainError, ShapeError
from metricsens.metricspace.spaces import Grid, GridFieldSpace, write_field_csv
from metricsens.models.analytic import AnalyticModel
from metricsens.sampling.design import InputModel
from metricsens.sampling.distributions import Uniform

X_MAX = 10.0
Y_RANGE = (-10.0, 10.0)
INPUT_RANGE = (0.0, 10.0)

FloatArray = np.ndarray | float


def default_grid(nx: int | None = None, ny: int | None = None) -> Grid:
    return Grid(
        x_range=(settings.plume_x_min, X_MAX),
        y_range=Y_RANGE,
        nx=nx or settings.plume_nx,
        ny=ny or settings.plume_ny,
    )


def plume_concentration(
    Q: FloatArray, K: FloatArray, u_wind: FloatArray, H: FloatArray, x: FloatArray, y: FloatArray,  # noqa: N803
) -> FloatArray:
    """Bodenkonzentration, alle Argumente broadcastbar"""
    x = np.asarray(x, dtype=float)
    K = np.asarray(K, dtype=float)  # noqa: N806
    if np.any(x <= 0):
        raise DomainError(f"Plume concentration needs x > 0, got min x = {np.min(x)}")
    if np.any(K <= 0):
        raise DomainError(f"Plume concentration needs K > 0, got min K = {np.min(K)}")
    value = Q / (2.0 * np.pi * K * x) * np.exp(-u_wind * (y * y + H * H) / (4.0 * K * x))
    return float(value) if np.ndim(value) == 0 else value


@dataclass(frozen=True)
class FieldOutput:
    grid: Grid
    values: np.ndarray

    def __post_init__(self) -> None:
        if self.values.shape != (self.grid.nx, self.grid.ny):
            raise ShapeError(f"Field shape {self.values.shape} does not match grid {self.grid.nx}x{self.grid.ny}")
        if not np.isfinite(self.values).all():
            raise DomainError("Field contains non-finite values")

    def to_csv(self, path: str | Path) -> Path:
        return write_field_csv(path, self.grid, self.values)


def _check_grid(grid: Grid) -> None:
    if grid.x_range[0] <= 0:
        raise DomainError(f"Plume grid must stay in x > 0, got x_min = {grid.x_range[0]}")
    if grid.x_range[1] > X_MAX:
        raise DomainError(f"Plume grid must stay in x <= {X_MAX}, got x_max = {grid.x_range[1]}")


def plume_field(Q: float, K: float, u_wind: float, H: float, grid: Grid | None = None) -> FieldOutput:  # noqa: N803
    grid = grid or default_grid()
    _check_grid(grid)
    x, y = grid.mesh()
    return FieldOutput(grid, np.asarray(plume_concentration(Q, K, u_wind, H, x, y)))


def _field_batch(
    grid: Grid, Q: FloatArray, K: FloatArray, u_wind: FloatArray, H: FloatArray,  # noqa: N803
) -> np.ndarray:
    """(rows,) Parameter -> (rows, nx, ny) Felder"""
    x, y = grid.mesh()

    def column(v: FloatArray) -> np.ndarray:
        v = np.asarray(v, dtype=float)
        return v[:, None, None] if v.ndim else v

    return np.asarray(plume_concentration(column(Q), column(K), column(u_wind), column(H), x[None], y[None]))


def plume_model(H: float = 1.0, grid: Grid | None = None) -> AnalyticModel:  # noqa: N803
    """Eingänge (Q, K, u) ~ U[0, 10], Quellhöhe H fest"""
    grid = grid or default_grid()
    _check_grid(grid)

    def evaluate(x: np.ndarray) -> np.ndarray:
        return _field_batch(grid, x[:, 0], x[:, 1], x[:, 2], H)

    model = InputModel(
        name=f"plume_H{H:g}",
        dists=[Uniform(*INPUT_RANGE) for _ in range(3)],
        func=evaluate,
        names=["Q", "K", "u"],
        vectorized=True,
        space=GridFieldSpace(grid),
    )
    return AnalyticModel(model)


def plume_map_model(grid: Grid | None = None) -> AnalyticModel:
    """Vier Eingänge (Q, u, K, H) ~ U[0, 10] für die Sensitivitätskarten"""
    grid = grid or default_grid()
    _check_grid(grid)

    def evaluate(x: np.ndarray) -> np.ndarray:
        return _field_batch(grid, x[:, 0], x[:, 2], x[:, 1], x[:, 3])

    model = InputModel(
        name="plume_map",
        dists=[Uniform(*INPUT_RANGE) for _ in range(4)],
        func=evaluate,
        names=["Q", "u", "K", "H"],
        vectorized=True,
        space=GridFieldSpace(grid),
    )
    return AnalyticModel(model)
