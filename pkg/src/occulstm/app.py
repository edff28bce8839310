"""Textual application for browsing evaluation reports."""

from textual.app import App

from occulstm.screens import ReportScreen, ReportSource


class ReportApp(App):
    """Terminal viewer for the metrics and series files of one evaluation."""

    TITLE = "Occulstm"
    SUB_TITLE = "Occupancy Report"

    CSS = """
    Screen {
        background: $surface;
    }
    """

    def __init__(self, source: ReportSource) -> None:
        super().__init__()
        self.source = source
        # Load eagerly so missing or malformed files fail before the UI starts
        self.report, self.series = source.load()

    def on_mount(self) -> None:
        """Set up the application when mounted."""
        self.push_screen(ReportScreen(self.source, self.report, self.series))
