"""
Konfidenzintervalle
Delta-Methode (sigma^2 = g^T Gamma g) und Perzentil-Bootstrap als Fallback
"""

import math
from dataclasses import dataclass, replace
from enum import Enum

import numpy as np
from loguru import logger
from scipy import stats

from metricsens.config import settings
from metricsens.errors import BootstrapError, ConfigurationError, DegenerateVarianceError, IntervalError
from metricsens.inference.gamma import GammaEstimate, estimate_gamma_geometry
from metricsens.metricspace.families import BALL_KINDS, SOBOL_KINDS, TestFamily
from metricsens.metricspace.geometry import SampleGeometry
from metricsens.parallel import make_rng, map_chunks
from metricsens.sampling.design import PairedSample
from metricsens.ustat_engine.estimator import (
    IndexEstimate,
    centered_geometry,
    denominator_tolerance,
    estimate_from_geometry,
)
from metricsens.ustat_engine.ustatistics import UStatConfig

_BOOTSTRAP_STREAM = 20
_MIN_REPLICATES = 50


class CIMethod(str, Enum):
    AUTO = "auto"
    DELTA = "delta"
    BOOTSTRAP = "bootstrap"


@dataclass(frozen=True)
class BootstrapResult:
    lo: float
    hi: float
    replicates: np.ndarray
    dropped: int

    @property
    def std(self) -> float:
        return float(np.std(self.replicates, ddof=1)) if len(self.replicates) > 1 else 0.0


def _check_level(level: float) -> None:
    if not 0.0 < level < 1.0:
        raise ConfigurationError(f"Confidence level must lie in (0, 1), got {level}")


def psi_gradient(components: tuple[float, float, float, float]) -> np.ndarray:
    x, y, z, t = components
    if abs(z - t) <= denominator_tolerance(z, t):
        raise DegenerateVarianceError(f"Gradient of Psi undefined: U3-U4 = {z - t:.3e}")
    return np.array([z - t, -(z - t), -(x - y), x - y]) / (z - t) ** 2


def delta_variance(
    gamma: GammaEstimate | np.ndarray, components: tuple[float, float, float, float]
) -> float:
    """sigma^2 = g^T Gamma g mit g = grad Psi an den geschätzten Komponenten"""
    matrix = gamma.gamma if isinstance(gamma, GammaEstimate) else np.asarray(gamma, dtype=float)
    g = psi_gradient(components)
    variance = float(g @ matrix @ g)
    if variance < 0.0:
        logger.warning(f"Negative delta-method variance {variance:.3e} floored at 0")
        return 0.0
    return variance


def confidence_interval(estimate: IndexEstimate, sigma: float, level: float = 0.95) -> tuple[float, float]:
    _check_level(level)
    if not math.isfinite(sigma):
        raise IntervalError(f"sigma is not finite ({sigma}) for estimate {estimate.value:.6g}")
    if sigma < 0.0:
        raise ConfigurationError(f"sigma must be >= 0, got {sigma}")
    half = float(stats.norm.ppf((1.0 + level) / 2.0)) * sigma / math.sqrt(estimate.n)
    return estimate.value - half, estimate.value + half


def _replicate_seed(seed: int, replicate: int) -> int:
    return int(np.random.SeedSequence(seed, spawn_key=(_BOOTSTRAP_STREAM, replicate)).generate_state(1)[0])


def bootstrap_geometry(
    geom: SampleGeometry,
    family: TestFamily,
    replicates: int,
    level: float,
    config: UStatConfig,
    seed: int,
) -> BootstrapResult:
    if replicates < _MIN_REPLICATES:
        raise ConfigurationError(f"Bootstrap needs B >= {_MIN_REPLICATES}, got {replicates}")
    _check_level(level)
    if family.kind in BALL_KINDS:
        # einmal berechnen, Replikate schneiden nur noch aus
        geom.prefetch()

    def run_replicate(r: int) -> float | None:
        rows = make_rng(seed, _BOOTSTRAP_STREAM, r).integers(0, geom.n, size=geom.n)
        sub_config = replace(config, seed=_replicate_seed(seed, r), workers=1)
        try:
            return estimate_from_geometry(geom.subset(rows), family, sub_config).value
        except DegenerateVarianceError:
            return None

    results = map_chunks(run_replicate, range(replicates), config.workers)
    values = np.array([v for v in results if v is not None])
    dropped = replicates - len(values)
    if dropped > settings.bootstrap_max_drop * replicates:
        logger.error(f"{dropped}/{replicates} bootstrap replicates are degenerate")
        raise BootstrapError(
            f"{dropped} of {replicates} bootstrap replicates had a degenerate denominator "
            f"(limit {settings.bootstrap_max_drop:.0%})"
        )
    if dropped:
        logger.warning(f"Dropped {dropped}/{replicates} degenerate bootstrap replicates")

    alpha = (1.0 - level) / 2.0
    lo, hi = np.quantile(values, [alpha, 1.0 - alpha], method="inverted_cdf")
    return BootstrapResult(float(lo), float(hi), values, dropped)


def bootstrap_ci(
    sample: PairedSample,
    family: TestFamily,
    replicates: int | None = None,
    level: float = 0.95,
    config: UStatConfig | None = None,
    seed: int = 0,
) -> tuple[float, float]:
    """Perzentil-Intervall aus B Zeilen-Resamples (mit Zurücklegen)"""
    config = config or UStatConfig()
    geom, _ = centered_geometry(sample, family, config.center)
    result = bootstrap_geometry(
        geom, family, replicates or settings.bootstrap_replicates, level, config, seed
    )
    return result.lo, result.hi


def delta_cost(family: TestFamily, n: int, tuples: int) -> int:
    """Kernel-Tupel für die Projektionen; die Sobol-Familien werden in O(N) exakt gemittelt"""
    if family.kind in SOBOL_KINDS:
        return 4 * n
    return 4 * n * tuples


def resolve_method(method: CIMethod, family: TestFamily, n: int, tuples: int) -> CIMethod:
    if method is not CIMethod.AUTO:
        return method
    if delta_cost(family, n, tuples) <= settings.projection_budget:
        return CIMethod.DELTA
    return CIMethod.BOOTSTRAP


def attach_interval(
    estimate: IndexEstimate,
    sample: PairedSample,
    family: TestFamily,
    config: UStatConfig | None = None,
    method: CIMethod = CIMethod.AUTO,
    level: float = 0.95,
    tuples: int | None = None,
    replicates: int | None = None,
    seed: int = 0,
) -> IndexEstimate:
    """
    Hängt sigma und ein Intervall an eine Schätzung.

    sigma ist immer die asymptotische Standardabweichung, das Intervall hat
    die Breite ~ sigma / sqrt(N). Beim Bootstrap wird sigma aus der Streuung
    der Replikate zurückgerechnet.
    """
    config = config or UStatConfig()
    tuples = tuples or settings.projection_tuples
    _check_level(level)
    chosen = resolve_method(method, family, estimate.n, tuples)
    geom, _ = centered_geometry(sample, family, config.center)

    if chosen is CIMethod.DELTA:
        gamma = estimate_gamma_geometry(geom, family, tuples, seed, config.workers)
        sigma = math.sqrt(delta_variance(gamma, estimate.components))
        ci = confidence_interval(estimate, sigma, level)
    else:
        result = bootstrap_geometry(
            geom, family, replicates or settings.bootstrap_replicates, level, config, seed
        )
        sigma = result.std * math.sqrt(estimate.n)
        # Perzentil-Intervall kann bei Bias den Punktschätzer verfehlen
        ci = (min(result.lo, estimate.value), max(result.hi, estimate.value))

    logger.info(
        f"{level:.0%} {chosen.value} interval for u={estimate.subset}: "
        f"[{ci[0]:.6f}, {ci[1]:.6f}] (sigma={sigma:.4g})"
    )
    return estimate.with_interval(sigma, ci, chosen.value, level)
