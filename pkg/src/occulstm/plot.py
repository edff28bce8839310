"""Truth-versus-prediction timeline rendered as a standalone SVG."""

from __future__ import annotations

import io

import matplotlib as mpl
from matplotlib.figure import Figure

from occulstm.evaluation import PredictionSeries
from occulstm.nn.encoding import MAX_COUNT

SVG_SALT = "occulstm"

TRUTH_COLOR = "#ff7f0e"
PREDICTION_COLOR = "#1f77b4"


def render_series_svg(series: PredictionSeries, title: str = "Room occupancy") -> str:
    """Step lines for the counted and the predicted occupancy over time.

    The series are drawn inside SVG groups with ids ``truth`` and ``prediction``.
    Output is byte-identical for identical input.
    """
    hours = (series.timestamps - series.timestamps[0]) / 3600.0

    fig = Figure(figsize=(10, 4))
    ax = fig.add_subplot()
    ax.step(hours, series.truths, where="post", color=TRUTH_COLOR, label="truth", gid="truth")
    ax.step(hours, series.predictions, where="post", color=PREDICTION_COLOR, label="prediction", gid="prediction")
    ax.set_xlabel("time (hours since first window)")
    ax.set_ylabel("people count")
    ax.set_ylim(-0.5, MAX_COUNT + 0.5)
    ax.set_title(title)
    ax.legend(loc="upper right")
    fig.tight_layout()

    buf = io.StringIO()
    with mpl.rc_context({"svg.hashsalt": SVG_SALT, "svg.fonttype": "none"}):
        fig.savefig(buf, format="svg", metadata={"Date": None})
    return buf.getvalue()
