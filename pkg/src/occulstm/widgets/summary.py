"""Headline card for a metrics report."""

from textual.app import ComposeResult
from textual.containers import Horizontal, Vertical
from textual.widget import Widget
from textual.widgets import Label, Static

from occulstm.evaluation import MetricsReport

# Micro-F1 the one-hot classifier is expected to reach on held-out days
GOOD_F1 = 0.8


class MetricsSummary(Widget):
    """Widget displaying micro precision, recall, F1 and the sample count."""

    DEFAULT_CSS = """
    MetricsSummary {
        width: 100%;
        height: auto;
        border: solid $primary;
        padding: 0 1;
    }

    MetricsSummary .header {
        width: 100%;
        height: 1;
        text-align: center;
        text-style: bold;
    }

    MetricsSummary .metrics-row {
        width: 100%;
        height: auto;
        align: center middle;
    }

    MetricsSummary .metric-block {
        width: auto;
        min-width: 14;
        height: auto;
        padding: 0 1;
    }

    MetricsSummary .metric-name {
        text-align: center;
        width: 100%;
        color: $text-muted;
    }

    MetricsSummary .metric-value {
        text-align: center;
        width: 100%;
        text-style: bold;
    }

    MetricsSummary.-good .metric-value {
        color: $success;
    }

    MetricsSummary .status-line {
        width: 100%;
        height: 1;
        text-align: center;
    }
    """

    def __init__(self, report: MetricsReport, heading: str = "", **kwargs) -> None:
        super().__init__(**kwargs)
        self.report = report
        self.heading = heading

    def compose(self) -> ComposeResult:
        values = (
            ("Precision", f"{self.report.micro_precision:.4f}"),
            ("Recall", f"{self.report.micro_recall:.4f}"),
            ("Micro-F1", f"{self.report.micro_f1:.4f}"),
            ("Windows", str(self.report.samples)),
        )
        with Vertical():
            yield Static(self.heading or "Micro-averaged metrics", classes="header")
            with Horizontal(classes="metrics-row"):
                for name, value in values:
                    with Vertical(classes="metric-block"):
                        yield Label(name, classes="metric-name")
                        yield Label(value, classes="metric-value", id=f"metric-{name.lower()}")
            yield Static(self._get_status_text(), classes="status-line")

    def _get_status_text(self) -> str:
        hits = int(self.report.counts.tp.sum())
        return f"{hits} of {self.report.samples} windows counted exactly"

    def on_mount(self) -> None:
        """Highlight reports that clear the F1 floor."""
        if self.report.micro_f1 >= GOOD_F1:
            self.add_class("-good")

    def update_report(self, report: MetricsReport) -> None:
        self.report = report
        self.set_class(report.micro_f1 >= GOOD_F1, "-good")
        self.refresh(recompose=True)
