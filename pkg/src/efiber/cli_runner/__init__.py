"""Configuration, scenario orchestration, sweeps and the command-line interface."""
from .config import (PRESETS, SCHEMA, ConfigError, config_hash, load_config, load_preset, normalize,
                     save_config, set_field)
from .main import EXIT_CONFIG, EXIT_NUMERIC, EXIT_OK, EXIT_PARTIAL, build_parser, main, sweep
from .pipeline import (RunContext, StageError, clear_cache, interaction_length, run_scenario,
                       summarize)

__all__ = [
    "PRESETS", "SCHEMA", "ConfigError", "config_hash", "load_config", "load_preset", "normalize",
    "save_config", "set_field", "EXIT_CONFIG", "EXIT_NUMERIC", "EXIT_OK", "EXIT_PARTIAL",
    "build_parser", "main", "sweep", "RunContext", "StageError", "clear_cache",
    "interaction_length", "run_scenario", "summarize",
]
