# U-Statistics Engine Package
from metricsens.ustat_engine.estimator import (
    IndexEstimate,
    centered_geometry,
    estimate_from_geometry,
    estimate_gms_index,
    psi,
)
from metricsens.ustat_engine.kernels import (
    KernelSet,
    kernel_phi,
    phi_indexed,
    symmetrize,
    symmetrize_indexed,
)
from metricsens.ustat_engine.ustatistics import (
    UStatComponents,
    UStatConfig,
    UStatMode,
    complete_ustat,
    draw_distinct_tuples,
    incomplete_ustat,
    ustat_components,
)
