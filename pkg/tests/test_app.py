from __future__ import annotations

import asyncio
from pathlib import Path

import numpy as np
from textual.widgets import Label

from occulstm.app import ReportApp
from occulstm.evaluation import MetricsReport, PredictionSeries, confusion
from occulstm.screens import ReportScreen, ReportSource
from occulstm.widgets import MetricsSummary

DAY0 = 1_614_556_800


def write_report(root: Path, preds: list[int], truths: list[int]) -> ReportSource:
    report = MetricsReport.from_counts(confusion(preds, truths))
    stamps = DAY0 + 300 * np.arange(len(preds))
    series = PredictionSeries(stamps, np.array(truths), np.array(preds))
    (root / "metrics.csv").write_text(report.to_csv())
    (root / "series.csv").write_text(series.to_csv())
    return ReportSource(metrics=root / "metrics.csv", series=root / "series.csv")


def metric(screen: ReportScreen, name: str) -> str:
    return str(screen.query_one(f"#metric-{name}", Label).render())


def test_viewer_shows_report(tmp_path):
    source = write_report(tmp_path, [0, 0, 5, 3], [0, 5, 5, 3])

    async def run() -> None:
        app = ReportApp(source)
        async with app.run_test() as pilot:
            await pilot.pause()
            screen = app.screen
            assert isinstance(screen, ReportScreen)
            assert metric(screen, "micro-f1") == "0.7500"
            assert metric(screen, "windows") == "4"
            assert len(screen.query(".class-row")) == 16
            assert len(screen.query(".row-miss")) == 1
            assert not screen.query_one(MetricsSummary).has_class("-good")

            await pilot.press("j", "k")
            await pilot.press("q")

    asyncio.run(run())


def test_reload_picks_up_new_files(tmp_path):
    source = write_report(tmp_path, [0, 1], [1, 1])

    async def run() -> None:
        app = ReportApp(source)
        async with app.run_test() as pilot:
            await pilot.pause()
            assert metric(app.screen, "micro-f1") == "0.5000"

            write_report(tmp_path, [1, 1, 2], [1, 1, 2])
            await pilot.press("r")
            await pilot.pause()
            assert metric(app.screen, "micro-f1") == "1.0000"
            assert app.screen.query_one(MetricsSummary).has_class("-good")
            assert len(app.screen.query(".row-miss")) == 0

    asyncio.run(run())


def test_reload_failure_keeps_report(tmp_path):
    source = write_report(tmp_path, [2, 2], [2, 3])

    async def run() -> None:
        app = ReportApp(source)
        async with app.run_test() as pilot:
            await pilot.pause()
            source.metrics.unlink()
            await pilot.press("r")
            await pilot.pause()
            assert metric(app.screen, "micro-f1") == "0.5000"

    asyncio.run(run())


def test_metrics_without_series(tmp_path):
    source = write_report(tmp_path, [4], [4])
    source = ReportSource(metrics=source.metrics)

    async def run() -> None:
        app = ReportApp(source)
        async with app.run_test() as pilot:
            await pilot.pause()
            assert len(app.screen.query(".no-rows")) == 1

    asyncio.run(run())
