"""Tests for console rendering."""

import io

from rich.console import Console

from marq.models.report import RunStatus
from marq.services.audit import AuditCheck
from marq.services.display_service import DisplayService
from marq.services.metrics import compare_methods
from tests.test_metrics import make_report


def _display():
    buffer = io.StringIO()
    console = Console(file=buffer, width=200, force_terminal=False, color_system=None)
    return DisplayService(console=console), buffer


def test_report_line_and_per_level_flops():
    display, buffer = _display()
    display.display_report(make_report(method="marq", flops=(1500, 2_000_000)), show_trace=True)

    out = buffer.getvalue()
    assert "MARQ trace" in out
    assert "converged marq q=2 levels=2" in out
    assert "L2: 2.00 M, L1: 1.50 k" in out


def test_summary_shows_fail_when_nothing_compares():
    display, buffer = _display()
    arc = [make_report(status=RunStatus.MAX_ITERATIONS)]
    display.display_summary(compare_methods(arc, [make_report(method="marq")]))

    out = buffer.getvalue()
    assert "FAIL" in out
    assert "over 0 pairs" in out


def test_audit_lists_failures():
    display, buffer = _display()
    display.display_audit([AuditCheck.at_most("ok", 0.0, 1.0), AuditCheck.at_most("bad", 2.0, 1.0)])

    assert "1 check(s) failed: bad" in buffer.getvalue()
