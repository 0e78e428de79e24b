"""
Metrische Räume
Skalare, Vektoren im R^k, Gitterfelder (L2 per Mittelpunktsregel), Matrizen (Frobenius)
"""

from abc import ABC, abstractmethod
from dataclasses import dataclass
from enum import Enum
from functools import cached_property
from pathlib import Path

import numpy as np
import pandas as pd

from metricsens.errors import ShapeError, UnsupportedOperationError


class PointKind(str, Enum):
    SCALAR = "scalar"
    VECTOR = "vector"
    GRID_FIELD = "grid_field"
    MATRIX = "matrix"


@dataclass(frozen=True)
class Grid:
    """Rechteckgitter, Knoten in den Zellmittelpunkten"""

    x_range: tuple[float, float]
    y_range: tuple[float, float]
    nx: int
    ny: int

    def __post_init__(self) -> None:
        if self.nx < 1 or self.ny < 1:
            raise ShapeError(f"Grid needs at least one node per axis, got {self.nx}x{self.ny}")
        if not (self.x_range[0] < self.x_range[1] and self.y_range[0] < self.y_range[1]):
            raise ShapeError(f"Degenerate grid ranges {self.x_range} x {self.y_range}")

    @property
    def dx(self) -> float:
        return (self.x_range[1] - self.x_range[0]) / self.nx

    @property
    def dy(self) -> float:
        return (self.y_range[1] - self.y_range[0]) / self.ny

    @property
    def cell_area(self) -> float:
        return self.dx * self.dy

    @cached_property
    def x(self) -> np.ndarray:
        return self.x_range[0] + (np.arange(self.nx) + 0.5) * self.dx

    @cached_property
    def y(self) -> np.ndarray:
        return self.y_range[0] + (np.arange(self.ny) + 0.5) * self.dy

    def mesh(self) -> tuple[np.ndarray, np.ndarray]:
        """(nx, ny)-Koordinatenfelder, Index [i, j] = (x_i, y_j)"""
        return np.meshgrid(self.x, self.y, indexing="ij")

    def header(self) -> str:
        return (
            f"# grid x_min={self.x_range[0]!r} x_max={self.x_range[1]!r} "
            f"y_min={self.y_range[0]!r} y_max={self.y_range[1]!r} nx={self.nx} ny={self.ny}"
        )

    @classmethod
    def from_header(cls, line: str) -> "Grid":
        fields = dict(item.split("=", 1) for item in line.lstrip("#").split()[1:])
        try:
            return cls(
                x_range=(float(fields["x_min"]), float(fields["x_max"])),
                y_range=(float(fields["y_min"]), float(fields["y_max"])),
                nx=int(fields["nx"]),
                ny=int(fields["ny"]),
            )
        except KeyError as e:
            raise ShapeError(f"Grid header misses field {e}: {line!r}") from e


class MetricSpace(ABC):
    """Separabler metrischer Raum mit einer isometrischen Einbettung in R^K"""

    kind: PointKind
    supports_midpoint: bool = False

    @property
    @abstractmethod
    def point_shape(self) -> tuple[int, ...]:
        """Form eines einzelnen Punktes"""

    def check_point(self, x: np.ndarray | float) -> np.ndarray:
        arr = np.asarray(x, dtype=float)
        if arr.shape != self.point_shape:
            raise ShapeError(f"{self.kind.value} point must have shape {self.point_shape}, got {arr.shape}")
        return arr

    def check_points(self, points: np.ndarray) -> np.ndarray:
        arr = np.asarray(points, dtype=float)
        if arr.shape[1:] != self.point_shape:
            raise ShapeError(
                f"{self.kind.value} sample must have shape (N, {self.point_shape}), got {arr.shape}"
            )
        return arr

    def embed(self, points: np.ndarray) -> np.ndarray:
        """(N, *point_shape) -> (N, K), euklidische Distanz der Zeilen = d"""
        arr = self.check_points(points)
        return arr.reshape(arr.shape[0], -1)

    def distance(self, x: np.ndarray | float, y: np.ndarray | float) -> float:
        diff = self.check_point(x) - self.check_point(y)
        return float(np.sqrt(np.sum(diff * diff)))

    def midpoint(self, x: np.ndarray | float, y: np.ndarray | float) -> np.ndarray:
        raise UnsupportedOperationError(f"No midpoint defined on {self.kind.value} space")


class ScalarSpace(MetricSpace):
    kind = PointKind.SCALAR

    @property
    def point_shape(self) -> tuple[int, ...]:
        return ()

    def distance(self, x: np.ndarray | float, y: np.ndarray | float) -> float:
        return float(abs(self.check_point(x) - self.check_point(y)))

    def __repr__(self) -> str:
        return "ScalarSpace()"


class VectorSpace(MetricSpace):
    kind = PointKind.VECTOR
    supports_midpoint = True

    def __init__(self, dim: int):
        if dim < 1:
            raise ShapeError(f"Vector dimension must be >= 1, got {dim}")
        self.dim = dim

    @property
    def point_shape(self) -> tuple[int, ...]:
        return (self.dim,)

    def midpoint(self, x: np.ndarray | float, y: np.ndarray | float) -> np.ndarray:
        return (self.check_point(x) + self.check_point(y)) / 2.0

    def __repr__(self) -> str:
        return f"VectorSpace(dim={self.dim})"


class GridFieldSpace(MetricSpace):
    """Skalarfelder auf einem Gitter, L2-Distanz per Mittelpunktsregel"""

    kind = PointKind.GRID_FIELD
    supports_midpoint = True

    def __init__(self, grid: Grid):
        self.grid = grid

    @property
    def point_shape(self) -> tuple[int, ...]:
        return (self.grid.nx, self.grid.ny)

    def distance(self, x: np.ndarray | float, y: np.ndarray | float) -> float:
        diff = self.check_point(x) - self.check_point(y)
        return float(np.sqrt(self.grid.cell_area * np.sum(diff * diff)))

    def embed(self, points: np.ndarray) -> np.ndarray:
        return super().embed(points) * np.sqrt(self.grid.cell_area)

    def midpoint(self, x: np.ndarray | float, y: np.ndarray | float) -> np.ndarray:
        return (self.check_point(x) + self.check_point(y)) / 2.0

    def __repr__(self) -> str:
        return f"GridFieldSpace({self.grid.nx}x{self.grid.ny})"


class MatrixSpace(MetricSpace):
    """n x k Matrizen mit Frobenius-Distanz (z.B. eingebettete Stiefel-Punkte)"""

    kind = PointKind.MATRIX

    def __init__(self, rows: int, cols: int):
        if rows < 1 or cols < 1:
            raise ShapeError(f"Matrix shape must be positive, got {rows}x{cols}")
        self.rows = rows
        self.cols = cols

    @property
    def point_shape(self) -> tuple[int, ...]:
        return (self.rows, self.cols)

    def distance(self, x: np.ndarray | float, y: np.ndarray | float) -> float:
        diff = self.check_point(x) - self.check_point(y)
        return float(np.sqrt(np.trace(diff.T @ diff)))

    def __repr__(self) -> str:
        return f"MatrixSpace({self.rows}x{self.cols})"


def space_for_points(points: np.ndarray, grid: Grid | None = None) -> MetricSpace:
    """Leitet den Raum aus der Form eines Stichproben-Arrays ab"""
    arr = np.asarray(points)
    if arr.ndim == 1:
        return ScalarSpace()
    if arr.ndim == 2:
        return VectorSpace(arr.shape[1])
    if arr.ndim == 3:
        if grid is not None:
            return GridFieldSpace(grid)
        return MatrixSpace(arr.shape[1], arr.shape[2])
    raise ShapeError(f"Cannot infer a metric space for sample shape {arr.shape}")


def write_field_csv(path: str | Path, grid: Grid, values: np.ndarray) -> Path:
    """Feld zeilenweise (x-Index = Zeile) mit Gitter-Header schreiben"""
    values = np.asarray(values, dtype=float)
    if values.shape != (grid.nx, grid.ny):
        raise ShapeError(f"Field shape {values.shape} does not match grid {grid.nx}x{grid.ny}")
    path = Path(path)
    with path.open("w", encoding="utf-8", newline="") as handle:
        handle.write(grid.header() + "\n")
        pd.DataFrame(values).to_csv(handle, header=False, index=False, float_format="%.17g")
    return path


def read_field_csv(path: str | Path) -> tuple[Grid, np.ndarray]:
    path = Path(path)
    with path.open(encoding="utf-8") as handle:
        grid = Grid.from_header(handle.readline())
        values = pd.read_csv(handle, header=None, float_precision="round_trip").to_numpy(dtype=float)
    if values.shape != (grid.nx, grid.ny):
        raise ShapeError(f"{path}: body shape {values.shape} does not match header")
    return grid, values
