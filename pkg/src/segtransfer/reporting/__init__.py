"""Result export and charts."""

from segtransfer.reporting.chart_generator import ChartGenerator, success_rate_ranges
from segtransfer.reporting.export_service import (
    ExportService,
    format_value,
    load_results,
    persist_results,
)

__all__ = [
    "ChartGenerator",
    "success_rate_ranges",
    "ExportService",
    "format_value",
    "load_results",
    "persist_results",
]
