# Sampling Package
from metricsens.sampling.design import (
    InputModel,
    PairedSample,
    SubsetU,
    export_sample_csv,
    freeze,
    pick_freeze,
    pick_freeze_shared,
    sample_inputs,
)
from metricsens.sampling.distributions import (
    Distribution,
    QuantileDistribution,
    ScaledUniform,
    StandardNormal,
    Uniform,
)
from metricsens.sampling.evaluator import ModelEvaluator
