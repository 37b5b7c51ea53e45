"""Diagnostics time series as CSV: one header row, one row per sample."""

from __future__ import annotations

import csv
import math
from pathlib import Path
from typing import Optional

from ..diagnostics import DiagnosticsRecord
from ..exceptions import ConfigError

REQUIRED_COLUMNS = DiagnosticsRecord.field_names()[:17]
ALL_COLUMNS = DiagnosticsRecord.field_names()


def _fmt(value: Optional[float]) -> str:
    return "" if value is None else repr(float(value))


class CsvWriter:
    """Append-only writer, flushed after every row.

    ``append=True`` continues an existing file (its header must match);
    otherwise the file is truncated and a header is written.
    """

    def __init__(self, path, append: bool = False):
        self.path = Path(path)
        self.path.parent.mkdir(parents=True, exist_ok=True)
        if append and self.path.exists() and self.path.stat().st_size > 0:
            with open(self.path, newline="") as fh:
                header = next(csv.reader(fh), None)
            if header != ALL_COLUMNS:
                raise ConfigError(f"cannot append to {self.path}: header does not match")
            self._fh = open(self.path, "a", newline="")
        else:
            self._fh = open(self.path, "w", newline="")
            self._fh.write(",".join(ALL_COLUMNS) + "\n")
            self._fh.flush()

    def write(self, rec: DiagnosticsRecord) -> None:
        self._fh.write(",".join(_fmt(getattr(rec, name)) for name in ALL_COLUMNS) + "\n")
        self._fh.flush()

    def close(self) -> None:
        if not self._fh.closed:
            self._fh.close()

    def __enter__(self):
        return self

    def __exit__(self, *exc):
        self.close()


def _parse(value: str, column: str, line: int) -> Optional[float]:
    if value == "":
        if column in REQUIRED_COLUMNS:
            raise ConfigError(f"line {line}: empty value in required column {column}")
        return None
    try:
        return float(value)
    except ValueError as exc:
        raise ConfigError(f"line {line}: column {column} holds {value!r}") from exc


def read_csv(path) -> list[DiagnosticsRecord]:
    """Records from a diagnostics CSV; the two extension columns are optional."""
    with open(path, newline="") as fh:
        reader = csv.reader(fh)
        header = next(reader, None)
        if header is None:
            raise ConfigError(f"{path}: empty file, header row missing")
        missing = [c for c in REQUIRED_COLUMNS if c not in header]
        if missing:
            raise ConfigError(f"{path}: header lacks columns {', '.join(missing)}")
        unknown = [c for c in header if c not in ALL_COLUMNS]
        if unknown:
            raise ConfigError(f"{path}: unknown columns {', '.join(unknown)}")
        out = []
        for lineno, row in enumerate(reader, start=2):
            if not row:
                continue
            if len(row) != len(header):
                raise ConfigError(f"line {lineno}: expected {len(header)} fields, got {len(row)}")
            values = {col: _parse(v, col, lineno) for col, v in zip(header, row)}
            out.append(DiagnosticsRecord(**values))
    return out


def expected_rows(t_end: float, sample_interval: float) -> int:
    return math.floor(t_end / sample_interval + 1e-9) + 1
