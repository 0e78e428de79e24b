"""
GMS-Indexschätzer
Psi(U_1, U_2, U_3, U_4) = (U_1 - U_2) / (U_3 - U_4) auf einer Pick-Freeze-Stichprobe
"""

import math
from dataclasses import dataclass, field, replace
from typing import Any

import numpy as np
from loguru import logger

from metricsens.config import settings
from metricsens.errors import ArityError, DegenerateVarianceError, IntervalError
from metricsens.metricspace.families import SOBOL_KINDS, TestFamily
from metricsens.metricspace.geometry import SampleGeometry
from metricsens.sampling.design import PairedSample
from metricsens.ustat_engine.ustatistics import UStatConfig, ustat_components

# Verschiebung der zentrierten Sobol-Geometrie, je Koordinate bei Vektoren
Shift = float | tuple[float, ...]


def denominator_tolerance(z: float, t: float) -> float:
    return settings.denominator_rtol * max(abs(z), abs(t), 1.0)


def psi(x: float, y: float, z: float, t: float) -> float:
    if abs(z - t) <= denominator_tolerance(z, t):
        raise DegenerateVarianceError(
            f"Denominator U3-U4 = {z - t:.3e} is (nearly) zero: output is (nearly) T-constant"
        )
    return (x - y) / (z - t)


@dataclass(frozen=True)
class IndexEstimate:
    value: float
    components: tuple[float, float, float, float]
    n: int
    estimator: str = "gms"
    family: str = ""
    subset: str = ""
    mode: str = ""
    sigma: float | None = None
    ci: tuple[float, float] | None = None
    ci_method: str | None = None
    level: float | None = None
    std_errors: tuple[float, ...] | None = None
    shift: Shift = 0.0
    meta: dict[str, Any] = field(default_factory=dict)

    def __post_init__(self) -> None:
        if self.ci is not None and not (self.ci[0] <= self.value <= self.ci[1]):
            raise IntervalError(f"Interval {self.ci} does not contain the estimate {self.value}")

    @property
    def out_of_range(self) -> bool:
        return not 0.0 <= self.value <= 1.0

    def with_interval(
        self, sigma: float | None, ci: tuple[float, float], method: str, level: float
    ) -> "IndexEstimate":
        return replace(self, sigma=sigma, ci=ci, ci_method=method, level=level)


def centered_geometry(
    sample: PairedSample, family: TestFamily, center: bool
) -> tuple[SampleGeometry, Shift]:
    """
    Für die Sobol-Familien werden Z und Z^u um ihren gemeinsamen Mittelwert verschoben
    (koordinatenweise bei Vektoren).
    U_1-U_2 und U_3-U_4 sind verschiebungsinvariant, die Rundungsfehler nicht.
    """
    if family.kind not in SOBOL_KINDS or not center:
        return SampleGeometry(sample.z, sample.zu, family.space), 0.0
    if sample.z.ndim == 1:
        shift = math.fsum(sample.z.tolist() + sample.zu.tolist()) / (2 * sample.n)
        return SampleGeometry(sample.z - shift, sample.zu - shift, family.space), shift
    both = np.concatenate([sample.z, sample.zu])
    offset = np.array([math.fsum(col) for col in both.T]) / (2 * sample.n)
    return (
        SampleGeometry(sample.z - offset, sample.zu - offset, family.space),
        tuple(float(v) for v in offset),
    )


def estimate_from_geometry(
    geom: SampleGeometry,
    family: TestFamily,
    config: UStatConfig,
    subset: str = "",
    shift: Shift = 0.0,
) -> IndexEstimate:
    if geom.n < family.m + 2:
        raise ArityError(f"Need N >= m+2 = {family.m + 2} rows, got {geom.n}")
    comps = ustat_components(geom, family, config)
    return IndexEstimate(
        value=psi(*comps.values),
        components=comps.values,
        n=geom.n,
        family=family.kind.value,
        subset=subset,
        mode=comps.mode.value,
        std_errors=comps.std_errors,
        shift=shift,
        meta={"budgets": comps.budgets, "seed": config.seed},
    )


def estimate_gms_index(
    sample: PairedSample, family: TestFamily, config: UStatConfig | None = None
) -> IndexEstimate:
    config = config or UStatConfig()
    geom, shift = centered_geometry(sample, family, config.center)
    estimate = estimate_from_geometry(geom, family, config, sample.u.label(), shift)
    value = estimate.value
    if estimate.out_of_range:
        logger.warning(f"Estimate {value:.4f} for u={estimate.subset} lies outside [0, 1] (not clamped)")
    logger.info(f"GMS index u={estimate.subset} family={family.kind.value} N={sample.n}: {value:.6f}")
    return estimate
