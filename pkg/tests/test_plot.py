import xml.etree.ElementTree as ET

import pytest

from svcgrid.data import DataMatrix
from svcgrid.pipeline import PRESETS, SvcParams, find_svc_model
from svcgrid.plot import save_svg, to_svg

NS = "{http://www.w3.org/2000/svg}"


@pytest.fixture(scope="module")
def result(iris):
    return find_svc_model(iris, SvcParams(**PRESETS["iris-fig2"]))


def classes(svg, tag, cls):
    root = ET.fromstring(svg)
    return [e for e in root.iter(NS + tag) if e.get("class") == cls]


def test_markers(result):
    svg = to_svg(result)
    points = classes(svg, "circle", "point")
    assert len(points) == 150
    assert sorted({int(p.get("data-cluster")) for p in points}) == [0, 1, 2, 3]
    assert len(classes(svg, "circle", "sv")) == len(result.model.sv_indices)
    assert len(classes(svg, "rect", "cell")) == int(result.grid_labeling.inball.sum())


def test_grid_toggle(result):
    assert classes(to_svg(result, grid=False), "rect", "cell") == []


def test_points_inside_canvas(result):
    for p in classes(to_svg(result), "circle", "point"):
        assert 40 <= float(p.get("cx")) <= 560 and 40 <= float(p.get("cy")) <= 560


def test_single_point():
    r = find_svc_model(DataMatrix.from_rows([[1.0, 2.0]], ["only"]), cx=1, cy=2, g=5, nu=1.0)
    svg = to_svg(r, title="one <point>")
    assert len(classes(svg, "circle", "point")) == 1
    assert ET.fromstring(svg).find(NS + "title").text == "one <point>"


def test_save_deterministic(result, tmp_path):
    save_svg(result, tmp_path / "a.svg")
    save_svg(result, tmp_path / "b.svg")
    assert (tmp_path / "a.svg").read_bytes() == (tmp_path / "b.svg").read_bytes()
