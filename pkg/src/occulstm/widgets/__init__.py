"""Widget modules for occulstm."""

from occulstm.widgets.summary import MetricsSummary
from occulstm.widgets.timeline import Timeline

__all__ = ["MetricsSummary", "Timeline"]
