# Metric Spaces Package
from metricsens.metricspace.families import (
    BALL_KINDS,
    SOBOL_KINDS,
    FamilyKind,
    TestFamily,
    distance,
    eval_family,
)
from metricsens.metricspace.geometry import SampleGeometry, pairwise_distances
from metricsens.metricspace.spaces import (
    Grid,
    GridFieldSpace,
    MatrixSpace,
    MetricSpace,
    PointKind,
    ScalarSpace,
    VectorSpace,
    read_field_csv,
    space_for_points,
    write_field_csv,
)
