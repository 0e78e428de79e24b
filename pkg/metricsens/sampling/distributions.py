"""
Eingangsverteilungen
Skalare Verteilungen, gezogen per Inversionsmethode aus gleichverteilten Zahlen
"""

from collections.abc import Callable
from dataclasses import dataclass, field
from typing import Protocol

import numpy as np
from scipy import stats

from metricsens.errors import ConfigurationError


class Distribution(Protocol):
    name: str

    def quantile(self, u: np.ndarray) -> np.ndarray: ...


@dataclass(frozen=True)
class Uniform:
    low: float = 0.0
    high: float = 1.0
    name: str = field(default="uniform", init=False)

    def __post_init__(self) -> None:
        if not (np.isfinite(self.low) and np.isfinite(self.high)) or self.low >= self.high:
            raise ConfigurationError(f"uniform({self.low}, {self.high}): need finite low < high")

    def quantile(self, u: np.ndarray) -> np.ndarray:
        return stats.uniform(loc=self.low, scale=self.high - self.low).ppf(u)


@dataclass(frozen=True)
class StandardNormal:
    name: str = field(default="normal", init=False)

    def quantile(self, u: np.ndarray) -> np.ndarray:
        return stats.norm.ppf(u)


@dataclass(frozen=True)
class ScaledUniform:
    """factor * U[low, high]"""

    factor: float
    low: float = 0.0
    high: float = 1.0
    name: str = field(default="scaled_uniform", init=False)

    def __post_init__(self) -> None:
        if self.low >= self.high:
            raise ConfigurationError(f"scaled_uniform: need low < high, got {self.low} >= {self.high}")
        if not np.isfinite(self.factor) or self.factor == 0:
            raise ConfigurationError(f"scaled_uniform: factor must be finite and non-zero, got {self.factor}")

    def quantile(self, u: np.ndarray) -> np.ndarray:
        return self.factor * stats.uniform(loc=self.low, scale=self.high - self.low).ppf(u)


@dataclass(frozen=True)
class QuantileDistribution:
    """Beliebige Verteilung über ihre Quantilfunktion"""

    func: Callable[[np.ndarray], np.ndarray]
    name: str = "custom"

    def quantile(self, u: np.ndarray) -> np.ndarray:
        return np.asarray(self.func(u), dtype=float)


def draw_uniforms(rng: np.random.Generator, shape: tuple[int, ...]) -> np.ndarray:
    """Gleichverteilte Zahlen im offenen Intervall (0, 1)"""
    u = rng.random(shape)
    u[u == 0.0] = np.nextafter(0.0, 1.0)
    return u
