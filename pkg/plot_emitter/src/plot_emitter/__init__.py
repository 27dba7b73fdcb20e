"""Batch plot emitter for network-sampling simulation CSVs.

Reads the report, parabola, and coverage files a simulation run leaves
behind and renders them as grouped MSE bar charts, fitted-parabola
scatter plots, and aligned markdown coverage tables. Strictly a
presentation layer: every number shown is read from the CSV, and a
checksum of the numeric inputs is echoed into each output.
"""

from .emitter import (
    COVERAGE_COLUMNS,
    ChartKind,
    EmitterError,
    PARABOLA_COLUMNS,
    PlotRequest,
    REPORT_COLUMNS,
    read_table,
    render,
)

__all__ = [
    "COVERAGE_COLUMNS",
    "ChartKind",
    "EmitterError",
    "PARABOLA_COLUMNS",
    "PlotRequest",
    "REPORT_COLUMNS",
    "read_table",
    "render",
]

__version__ = "0.1.0"
