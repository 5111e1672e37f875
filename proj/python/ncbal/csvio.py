"""Readers for the diagnostics and snapshot CSV files written by the core."""

from __future__ import annotations

import re
from dataclasses import dataclass, field
from pathlib import Path

DIAGNOSTICS_HEAD = ("step", "time", "dt")
DIAGNOSTICS_TAIL = (
    "total_entropy",
    "lyapunov_V",
    "worst_residual",
    "total_dissipation",
    "max_stationarity_residual",
)
SNAPSHOT_HEAD = ("cell_id", "x", "y", "area", "alpha")

_INT_COLUMNS = {"step", "cell_id"}


class CsvSchemaError(ValueError):
    pass


@dataclass
class Table:
    columns: list[str]
    rows: list[list[float]] = field(default_factory=list)

    def column(self, name: str) -> list[float]:
        try:
            i = self.columns.index(name)
        except ValueError:
            raise CsvSchemaError(f"missing column '{name}'") from None
        return [r[i] for r in self.rows]

    def to_csv(self) -> str:
        lines = [",".join(self.columns)]
        for r in self.rows:
            lines.append(",".join(_format_cell(c, v) for c, v in zip(self.columns, r)))
        return "\n".join(lines) + "\n"


def format_value(x: float) -> str:
    """17 significant digits, the way the core prints them."""
    return format(x, ".17g")


def _format_cell(column: str, value) -> str:
    return str(value) if column in _INT_COLUMNS else format_value(value)


def _parse(text: str, check_header) -> Table:
    lines = text.splitlines()
    if not lines:
        raise CsvSchemaError("empty file")
    columns = lines[0].split(",")
    check_header(columns)
    table = Table(columns)
    for lineno, line in enumerate(lines[1:], start=2):
        if not line:
            continue
        cells = line.split(",")
        if len(cells) != len(columns):
            raise CsvSchemaError(f"line {lineno}: {len(cells)} fields, expected {len(columns)}")
        table.rows.append([int(c) if name in _INT_COLUMNS else float(c) for name, c in zip(columns, cells)])
    if not table.rows:
        raise CsvSchemaError("no data rows")
    return table


def _require(columns: list[str], names) -> None:
    for name in names:
        if name not in columns:
            raise CsvSchemaError(f"missing column '{name}'")


def _check_diagnostics(columns: list[str]) -> None:
    _require(columns, DIAGNOSTICS_HEAD + DIAGNOSTICS_TAIL)
    masses = columns[3 : len(columns) - len(DIAGNOSTICS_TAIL)]
    if not masses or any(not re.fullmatch(rf"mass{i}", m) for i, m in enumerate(masses)):
        raise CsvSchemaError("missing column 'mass0'")


def _check_snapshot(columns: list[str]) -> None:
    _require(columns, SNAPSHOT_HEAD)
    comps = columns[len(SNAPSHOT_HEAD) :]
    if not comps or any(c != f"u{i}" for i, c in enumerate(comps)):
        raise CsvSchemaError("missing column 'u0'")


def parse_diagnostics(text: str) -> Table:
    return _parse(text, _check_diagnostics)


def parse_snapshot(text: str) -> Table:
    return _parse(text, _check_snapshot)


def read_diagnostics(path: str | Path) -> Table:
    return parse_diagnostics(Path(path).read_text())


def read_snapshot(path: str | Path) -> Table:
    return parse_snapshot(Path(path).read_text())
