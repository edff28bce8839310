"""Report screen for browsing an evaluation run."""

from __future__ import annotations

from dataclasses import dataclass
from pathlib import Path
from typing import ClassVar

from textual.app import ComposeResult
from textual.binding import Binding, BindingType
from textual.containers import Horizontal, Vertical, VerticalScroll
from textual.screen import Screen
from textual.widgets import Footer, Header, Label, Static, TabbedContent, TabPane

from occulstm.errors import DataError, OcculstmError
from occulstm.evaluation import MetricsReport, PredictionSeries, read_metrics_csv, read_series_csv
from occulstm.nn.encoding import NUM_CLASSES
from occulstm.widgets import MetricsSummary, Timeline


@dataclass(frozen=True)
class ReportSource:
    """Files written by ``occulstm evaluate``."""

    metrics: Path
    series: Path | None = None

    def load(self) -> tuple[MetricsReport, PredictionSeries | None]:
        try:
            report = read_metrics_csv(self.metrics.read_text(encoding="utf-8-sig"))
            series = read_series_csv(self.series.read_text(encoding="utf-8-sig")) if self.series else None
        except (OSError, UnicodeDecodeError) as e:
            raise DataError(f"cannot read report files: {e}") from e
        return report, series


class ReportScreen(Screen):
    """Screen for viewing per-class metrics and the prediction timeline."""

    BINDINGS: ClassVar[list[BindingType]] = [
        Binding("r", "reload", "Reload"),
        Binding("escape,q", "quit", "Quit"),
        Binding("up,k", "scroll_up", "Scroll Up", show=False),
        Binding("down,j", "scroll_down", "Scroll Down", show=False),
    ]

    DEFAULT_CSS = """
    ReportScreen {
        background: $surface;
    }

    ReportScreen .report-header {
        width: 100%;
        height: 3;
        align: center middle;
        text-style: bold;
        border-bottom: solid $primary;
    }

    ReportScreen .report-tabs {
        width: 100%;
        height: 1fr;
    }

    ReportScreen .classes-container {
        width: 100%;
        height: 1fr;
        padding: 1;
    }

    ReportScreen .class-row {
        width: 100%;
        height: 1;
        padding: 0 1;
    }

    ReportScreen .class-row:hover {
        background: $surface-lighten-2;
    }

    ReportScreen .class-row.-unseen {
        color: $text-muted;
    }

    ReportScreen .col-class {
        width: 7;
        text-align: right;
    }

    ReportScreen .col-value {
        width: 11;
        text-align: right;
    }

    ReportScreen .col-count {
        width: 7;
        text-align: right;
    }

    ReportScreen .header-row {
        width: 100%;
        height: 1;
        padding: 0 1;
        text-style: bold;
        color: $text-muted;
    }
    """

    def __init__(self, source: ReportSource, report: MetricsReport, series: PredictionSeries | None, **kwargs) -> None:
        super().__init__(**kwargs)
        self.source = source
        self.report = report
        self.series = series

    def compose(self) -> ComposeResult:
        yield Header()
        yield Static(f"Evaluation report: {self.source.metrics.name}", classes="report-header")
        yield MetricsSummary(self.report, id="summary")
        with TabbedContent(classes="report-tabs"):
            with TabPane("Per class", id="tab-classes"), VerticalScroll(id="classes-container", classes="classes-container"):
                yield self._build_class_table()
            with TabPane("Timeline", id="tab-timeline"):
                yield Timeline(self.series, id="timeline")
        yield Footer()

    def _build_class_table(self) -> Vertical:
        """One row per occupancy class with its scores and counts."""
        table = Vertical(id="class-table")
        header = Horizontal(classes="header-row")
        for text, css in (
            ("Class", "col-class"),
            ("Precision", "col-value"),
            ("Recall", "col-value"),
            ("F1", "col-value"),
            ("TP", "col-count"),
            ("FP", "col-count"),
            ("FN", "col-count"),
        ):
            header.compose_add_child(Label(text, classes=css))
        table.compose_add_child(header)

        counts = self.report.counts
        for k in range(NUM_CLASSES):
            seen = bool(counts.tp[k] + counts.fp[k] + counts.fn[k])
            row = Horizontal(classes="class-row" if seen else "class-row -unseen")
            row.compose_add_child(Label(str(k), classes="col-class"))
            for value in (self.report.precision[k], self.report.recall[k], self.report.f1[k]):
                row.compose_add_child(Label(f"{value:.4f}", classes="col-value"))
            for count in (counts.tp[k], counts.fp[k], counts.fn[k]):
                row.compose_add_child(Label(str(int(count)), classes="col-count"))
            table.compose_add_child(row)
        return table

    async def action_reload(self) -> None:
        """Re-read the report files from disk."""
        try:
            self.report, self.series = self.source.load()
        except OcculstmError as e:
            self.notify(f"Error reloading report: {e}", severity="error")
            return
        self.query_one(MetricsSummary).update_report(self.report)
        self.query_one(Timeline).update_series(self.series)
        container = self.query_one("#classes-container", VerticalScroll)
        await container.remove_children()
        await container.mount(self._build_class_table())
        self.notify("Reloaded")

    def action_quit(self) -> None:
        self.app.exit()

    def _get_active_scroll_container(self) -> VerticalScroll | None:
        """Get the scroll container of the selected tab."""
        try:
            active_tab = self.query_one(TabbedContent).active
            if active_tab == "tab-classes":
                return self.query_one("#classes-container", VerticalScroll)
            if active_tab == "tab-timeline":
                return self.query_one(Timeline).query_one(VerticalScroll)
        except Exception:
            return None
        return None

    def action_scroll_up(self) -> None:
        container = self._get_active_scroll_container()
        if container:
            container.scroll_up(animate=False)

    def action_scroll_down(self) -> None:
        container = self._get_active_scroll_container()
        if container:
            container.scroll_down(animate=False)
