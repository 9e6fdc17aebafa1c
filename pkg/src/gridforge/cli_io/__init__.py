"""File formats, synthetic instances, sweeps and the command line."""
from .serialization import (
    SCHEMA_PATH, SCHEMA_VERSION, ParseError, SchemaVersionMismatch, design_from_dict,
    design_to_dict, dumps_instance, dumps_scenarios, instance_from_dict, instance_to_dict,
    load_design, load_instance, load_scenarios, loads_instance, loads_scenarios, report_to_dict,
    results_csv, save_design, save_instance, save_results, save_scenarios,
)
from .sweep import SweepRow, SweepSpec, run_sweep, sweep_csv
from .synthetic import generate_synthetic

__all__ = [
    "ParseError", "SCHEMA_PATH", "SCHEMA_VERSION", "SchemaVersionMismatch", "SweepRow", "SweepSpec",
    "design_from_dict", "design_to_dict", "dumps_instance", "dumps_scenarios", "generate_synthetic",
    "instance_from_dict", "instance_to_dict", "load_design", "load_instance", "load_scenarios",
    "loads_instance", "loads_scenarios", "report_to_dict", "results_csv", "run_sweep",
    "save_design", "save_instance", "save_results", "save_scenarios", "sweep_csv",
]
