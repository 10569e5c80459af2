from .config import BenchConfig, ConfigError, dump_config, load_config
from .export import export, fit_exponent, table1_rows, write_figures, write_table1
from .fitting import FitError, FitResult, bootstrap_ci, fit_with_ci, loglog_fit
from .harness import expected_counts, run_benchmark, run_pipeline, run_unit, work_units
from .records import ExperimentRecord, derive_seed, read_records, write_records
