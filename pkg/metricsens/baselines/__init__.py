# Baselines Package
from metricsens.baselines.pick_freeze import (
    EstimatorKind,
    estimate_baseline,
    pf_components,
    pf_efficient_components,
    pf_efficient_sigma,
    pf_sigma,
    sobol_pf,
    sobol_pf_efficient,
)
