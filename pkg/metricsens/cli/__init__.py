# CLI Package
from metricsens.cli.run_config import RunConfig, load_run_config, parse_run_config
from metricsens.cli.runner import RunReport, convergence_study, estimate_rows, run, run_maps
