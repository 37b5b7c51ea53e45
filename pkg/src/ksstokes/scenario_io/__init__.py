"""Configuration, presets, CSV and snapshot I/O, and the scenario runner."""

from .config import (PRESET_NAMES, PRESETS, ScenarioConfig, config_from_dict, parse_config,
                     parse_override, preset_config, validate)
from .csvio import ALL_COLUMNS, REQUIRED_COLUMNS, CsvWriter, expected_rows, read_csv
from .runner import EXIT_ERROR, EXIT_INVARIANT, EXIT_PASS, NO_RATE, RunSummary, run
from .snapshot import decode_snapshot, encode_snapshot, read_snapshot, write_snapshot

__all__ = [
    "PRESET_NAMES", "PRESETS", "ScenarioConfig", "config_from_dict", "parse_config",
    "parse_override", "preset_config", "validate",
    "ALL_COLUMNS", "REQUIRED_COLUMNS", "CsvWriter", "expected_rows", "read_csv",
    "EXIT_ERROR", "EXIT_INVARIANT", "EXIT_PASS", "NO_RATE", "RunSummary", "run",
    "decode_snapshot", "encode_snapshot", "read_snapshot", "write_snapshot",
]
