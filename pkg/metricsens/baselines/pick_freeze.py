"""
Klassische Pick-Freeze Sobol-Schätzer
Referenz für den Vergleich mit der U-Statistik-Pipeline
"""

import math
from enum import Enum

import numpy as np
from loguru import logger

from metricsens.errors import ConfigurationError, DegenerateVarianceError, ShapeError
from metricsens.sampling.design import PairedSample
from metricsens.ustat_engine.estimator import IndexEstimate, psi


class EstimatorKind(str, Enum):
    GMS = "gms"
    PF = "pf"
    PF_EFFICIENT = "pf_efficient"

    @classmethod
    def _missing_(cls, value: object) -> "EstimatorKind | None":
        if value == "gms_sobol":
            return cls.GMS
        return None


def _mean(values: np.ndarray) -> float:
    return math.fsum(values) / len(values)


def _scalar_columns(sample: PairedSample) -> tuple[np.ndarray, np.ndarray]:
    if sample.z.ndim != 1:
        raise ShapeError(f"Pick-Freeze Sobol estimators need scalar outputs, got shape {sample.z.shape[1:]}")
    if sample.n < 2:
        raise ShapeError(f"Need N >= 2 rows, got {sample.n}")
    return sample.z, sample.zu


def pf_components(sample: PairedSample) -> tuple[float, float, float, float]:
    """(U_1, (1-1/N^2) U~_2, U_3, (1-1/N^2) U~_4), Diagonale in den Produkten enthalten"""
    z, zu = _scalar_columns(sample)
    n = sample.n
    sum_z = math.fsum(z)
    shrink = 1.0 - 1.0 / (n * n)
    return (
        _mean(z * zu),
        shrink * sum_z * math.fsum(zu) / (n * (n - 1)),
        _mean(z * z),
        shrink * sum_z * sum_z / (n * (n - 1)),
    )


def pf_efficient_components(sample: PairedSample) -> tuple[float, float, float, float]:
    """Z und Z^u gepoolt in Mittelwert und zweitem Moment"""
    z, zu = _scalar_columns(sample)
    pooled = _mean((z + zu) / 2.0)
    return (_mean(z * zu), pooled * pooled, _mean((z * z + zu * zu) / 2.0), pooled * pooled)


def sobol_pf(sample: PairedSample) -> float:
    return psi(*pf_components(sample))


def sobol_pf_efficient(sample: PairedSample) -> float:
    return psi(*pf_efficient_components(sample))


def _influence_sigma(influence: np.ndarray) -> float:
    sigma = float(np.std(influence, ddof=1))
    if not math.isfinite(sigma):
        raise DegenerateVarianceError("Influence function of the Pick-Freeze estimator is not finite")
    return sigma


def pf_sigma(sample: PairedSample, value: float) -> float:
    """
    sigma aus der empirischen Einflussfunktion.

    Konstantes Z: der Schätzer ist per Konvention 1 und hat keine Streuung.
    """
    z, zu = _scalar_columns(sample)
    if np.ptp(z) == 0.0:
        logger.warning(f"Z is constant for u={sample.u.label()}, sigma set to 0")
        return 0.0
    dz = z - _mean(z)
    dzu = zu - _mean(zu)
    variance = _mean(dz * dz)
    influence = (dz * dzu - value * dz * dz) / variance
    return _influence_sigma(influence)


def pf_efficient_sigma(sample: PairedSample, value: float) -> float:
    z, zu = _scalar_columns(sample)
    pooled = _mean((z + zu) / 2.0)
    dz, dzu = z - pooled, zu - pooled
    variance = _mean((dz * dz + dzu * dzu) / 2.0)
    influence = (dz * dzu - value / 2.0 * (dz * dz + dzu * dzu)) / variance
    return _influence_sigma(influence)


_BASELINES = {
    EstimatorKind.PF: (pf_components, pf_sigma),
    EstimatorKind.PF_EFFICIENT: (pf_efficient_components, pf_efficient_sigma),
}


def estimate_baseline(sample: PairedSample, estimator: EstimatorKind | str) -> IndexEstimate:
    kind = EstimatorKind(estimator)
    if kind not in _BASELINES:
        raise ConfigurationError(f"{kind.value} is not a Pick-Freeze baseline")
    components_fn, sigma_fn = _BASELINES[kind]
    components = components_fn(sample)
    value = psi(*components)
    logger.debug(f"Baseline {kind.value} u={sample.u.label()} N={sample.n}: {value:.6f}")
    return IndexEstimate(
        value=value,
        components=components,
        n=sample.n,
        estimator=kind.value,
        family="sobol_value",
        subset=sample.u.label(),
        mode="closed_form",
        sigma=sigma_fn(sample, value),
    )
