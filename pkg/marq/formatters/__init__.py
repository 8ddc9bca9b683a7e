"""Formatting utilities for marq.

- numbers: human-readable flops and scalars for console tables
- json_output: versioned JSON payloads (report.json, summary.json, schema)
- trace_csv: CSV traces and run tables
"""

from .numbers import format_flops, format_mean, format_save, format_scalar

__all__ = ["format_flops", "format_mean", "format_save", "format_scalar"]
