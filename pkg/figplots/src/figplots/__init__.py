"""Figure rendering for goodarms experiment summaries."""

from .render import (FIGURES, SUMMARY_COLUMNS, EmptySummaryError, SchemaError,
                     load_summary, render)

__version__ = "0.1.0"

__all__ = ["FIGURES", "SUMMARY_COLUMNS", "EmptySummaryError", "SchemaError",
           "load_summary", "render"]
