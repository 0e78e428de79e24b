# Inference Package
from metricsens.inference.gamma import (
    GammaEstimate,
    estimate_gamma,
    estimate_gamma_geometry,
    gamma_from_projections,
    hajek_projection,
)
from metricsens.inference.intervals import (
    BootstrapResult,
    CIMethod,
    attach_interval,
    bootstrap_ci,
    bootstrap_geometry,
    confidence_interval,
    delta_variance,
    psi_gradient,
    resolve_method,
)
