import xml.etree.ElementTree as ET

import numpy as np

from hameig.svg import PLOT_BOX, Series, line_plot

NS = "{http://www.w3.org/2000/svg}"


def _points(svg):
    root = ET.fromstring(svg)
    line = root.find(f"{NS}polyline")
    return np.array([[float(c) for c in p.split(",")] for p in line.get("points").split()])


def test_well_formed_with_labels():
    svg = line_plot([Series(np.array([0.0, 1.0]), np.array([0.0, 1.0]), label="a<b")], title="t", xlabel="x", ylabel="y")
    root = ET.fromstring(svg)
    assert root.get("viewBox") == "0 0 800 600"
    assert any(el.text == "a<b" for el in root.iter(f"{NS}text"))


def test_axis_mapping_inside_box_and_orientation():
    x = np.linspace(0.0, 2.0, 11)
    pts = _points(line_plot([Series(x, x**2)]))
    left, top, right, bottom = PLOT_BOX
    assert np.all((pts[:, 0] > left) & (pts[:, 0] < right))
    assert np.all((pts[:, 1] > top) & (pts[:, 1] < bottom))
    # x increases to the right, larger y sits higher
    assert np.all(np.diff(pts[:, 0]) > 0) and np.all(np.diff(pts[:, 1]) < 0)
    # linear in x
    assert np.allclose(np.diff(pts[:, 0]), np.diff(pts[:, 0])[0], atol=0.02)


def test_constant_and_nonfinite_series():
    svg = line_plot([Series(np.arange(3.0), np.array([1.0, np.nan, 1.0]))], hlines=[1.0])
    assert len(_points(svg)) == 2
