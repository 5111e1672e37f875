"""Python access to the ncbal core and readers for its CSV outputs."""

from ._ncbal import (
    ConfigError,
    DomainError,
    NumericalAbort,
    check_flux,
    diagnostics_header,
    run_config,
    suites,
    verify,
)
from .csvio import (
    CsvSchemaError,
    DIAGNOSTICS_TAIL,
    SNAPSHOT_HEAD,
    Table,
    format_value,
    parse_diagnostics,
    parse_snapshot,
    read_diagnostics,
    read_snapshot,
)

__all__ = [
    "ConfigError",
    "CsvSchemaError",
    "DIAGNOSTICS_TAIL",
    "DomainError",
    "NumericalAbort",
    "SNAPSHOT_HEAD",
    "Table",
    "check_flux",
    "diagnostics_header",
    "format_value",
    "parse_diagnostics",
    "parse_snapshot",
    "read_diagnostics",
    "read_snapshot",
    "run_config",
    "suites",
    "verify",
]
