"""Screen modules for occulstm."""

from occulstm.screens.report import ReportScreen, ReportSource

__all__ = ["ReportScreen", "ReportSource"]
