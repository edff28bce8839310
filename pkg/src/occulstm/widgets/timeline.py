"""Scrollable truth-versus-prediction timeline."""

from datetime import datetime, timezone

from textual.app import ComposeResult
from textual.containers import VerticalScroll
from textual.widget import Widget
from textual.widgets import Label, Static

from occulstm.evaluation import PredictionSeries


class Timeline(Widget):
    """Widget listing each evaluated window, grouped by UTC day, mismatches highlighted."""

    DEFAULT_CSS = """
    Timeline {
        width: 100%;
        height: 1fr;
        border: solid $primary;
    }

    Timeline .header {
        width: 100%;
        height: 1;
        background: $primary;
        color: $text;
        text-align: center;
        text-style: bold;
        padding: 0 1;
    }

    Timeline .rows-container {
        width: 100%;
        height: 1fr;
        padding: 0 1;
    }

    Timeline .row {
        width: 100%;
        height: 1;
    }

    Timeline .row-miss {
        color: $warning;
        text-style: bold;
    }

    Timeline .day-header {
        width: 100%;
        height: 1;
        background: $surface;
        text-align: center;
        text-style: bold;
        margin: 1 0;
    }

    Timeline .no-rows {
        width: 100%;
        height: 100%;
        align: center middle;
        color: $text-muted;
    }
    """

    def __init__(self, series: PredictionSeries | None = None, **kwargs) -> None:
        super().__init__(**kwargs)
        self.series = series

    def compose(self) -> ComposeResult:
        yield Static("Truth vs prediction", classes="header")

        with VerticalScroll(classes="rows-container"):
            if self.series is None or len(self.series) == 0:
                yield Label("No series loaded", classes="no-rows")
                return
            current_day = None
            for ts, truth, pred in zip(
                self.series.timestamps.tolist(), self.series.truths.tolist(), self.series.predictions.tolist()
            ):
                moment = datetime.fromtimestamp(ts, tz=timezone.utc)
                day = moment.strftime("%Y-%m-%d")
                if day != current_day:
                    current_day = day
                    yield Static(day, classes="day-header")
                yield self._render_row(moment.strftime("%H:%M"), truth, pred)

    def _render_row(self, clock: str, truth: int, pred: int) -> Widget:
        """Render one window's counted and predicted occupancy."""
        css_class = "row" if truth == pred else "row row-miss"
        marker = "" if truth == pred else f"  ({pred - truth:+d})"
        return Label(f"{clock:>6}  truth {truth:>2}  predicted {pred:>2}{marker}", classes=css_class)

    def update_series(self, series: PredictionSeries) -> None:
        self.series = series
        self.refresh(recompose=True)
