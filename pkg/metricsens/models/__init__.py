# Models Package
from metricsens.models.analytic import AnalyticModel
from metricsens.models.external import ExternalCommandModel
from metricsens.models.lognormal import lognormal_model, lognormal_references, lognormal_toy
from metricsens.models.maps import SensitivityMap, node_index, ubiquitous_map, ubiquitous_maps
from metricsens.models.plume import (
    FieldOutput,
    default_grid,
    plume_concentration,
    plume_field,
    plume_map_model,
    plume_model,
)
from metricsens.models.studies import plume_table_study
