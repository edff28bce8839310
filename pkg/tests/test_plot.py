from __future__ import annotations

import re
import xml.etree.ElementTree as ET

import numpy as np

from occulstm.evaluation import PredictionSeries
from occulstm.plot import render_series_svg

SVG_NS = "{http://www.w3.org/2000/svg}"


def path_data(svg: str, gid: str) -> str:
    match = re.search(rf'<g id="{gid}">\s*<path[^>]*\sd="([^"]+)"', svg)
    assert match, f"no path in group {gid}"
    return match.group(1)


def series(truth: list[int], prediction: list[int]) -> PredictionSeries:
    return PredictionSeries(np.arange(len(truth)) * 300, np.array(truth), np.array(prediction))


def test_two_point_series_is_valid_svg():
    svg = render_series_svg(series([0, 3], [1, 3]))
    root = ET.fromstring(svg)  # noqa: S314
    assert root.tag == f"{SVG_NS}svg"
    groups = {g.get("id") for g in root.iter(f"{SVG_NS}g")}
    assert {"truth", "prediction"} <= groups
    assert path_data(svg, "truth") != path_data(svg, "prediction")


def test_axis_labels_and_legend():
    root = ET.fromstring(render_series_svg(series([0, 3, 5], [0, 2, 5])))  # noqa: S314
    texts = {"".join(node.itertext()).strip() for node in root.iter(f"{SVG_NS}text")}
    assert {"truth", "prediction", "people count", "time (hours since first window)"} <= texts


def test_identical_series_draw_identical_lines():
    svg = render_series_svg(series([0, 4, 4, 9], [0, 4, 4, 9]))
    assert path_data(svg, "truth") == path_data(svg, "prediction")


def test_output_is_byte_identical():
    data = series([0, 1, 2, 12, 15], [0, 2, 2, 11, 15])
    assert render_series_svg(data) == render_series_svg(data)
