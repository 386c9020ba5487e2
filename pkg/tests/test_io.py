import json
import xml.etree.ElementTree as ET

import numpy as np
import pytest

from ncvpath import Dataset, PenaltySpec, ProblemConfig, fit_path
from ncvpath import io as nio
from ncvpath.datagen import SimSpec, generate
from ncvpath.path import LambdaGrid, PathResult

NS = {"s": nio.SVG_NS}


def curve_values(svg, attr):
    """Recover data coordinates of every polyline from its pixel points."""
    root = ET.fromstring(svg)
    g = root.find(f".//s:g[@{attr}]", NS)
    out = {}
    for pl in g.findall("s:polyline", NS):
        pts = np.array([[float(v) for v in p.split(",")] for p in pl.get("points").split()])
        out[pl.get("data-kind") or pl.get("data-variable")] = pts
    return root, g, out


def to_data(g, pts):
    x0, x1 = map(float, g.get("data-xlim").split())
    y0, y1 = map(float, g.get("data-ylim").split())
    left, right = nio.MARGIN["left"], nio.WIDTH - nio.MARGIN["right"]
    top, bottom = nio.MARGIN["top"], nio.HEIGHT - nio.MARGIN["bottom"]
    t = x0 + (pts[:, 0] - left) / (right - left) * (x1 - x0)
    v = y0 + (bottom - pts[:, 1]) / (bottom - top) * (y1 - y0)
    return t, v


def test_read_small_file(tmp_path):
    f = tmp_path / "d.csv"
    f.write_text("y,x1,x2\n1,2,3\n4,5,6\n7,8,9\n")
    d = nio.read_dataset(f)
    assert (d.n, d.p) == (3, 2)
    assert d.names == ("x1", "x2")
    assert np.array_equal(d.y, [1.0, 4.0, 7.0])


def test_na_cell_names_row_and_column(tmp_path):
    f = tmp_path / "d.csv"
    f.write_text("y,x1,x2\n1,NA,3\n4,5,6\n")
    with pytest.raises(nio.ParseError, match="row 2, column x1"):
        nio.read_dataset(f)


@pytest.mark.parametrize("text, msg", [
    ("x1,x2\n1,2\n", "response column 'y' not found"),
    ("y,x1\n1,2\n3\n", "row 3 has 1 fields"),
    ("y,x1\n1,inf\n", "non-finite"),
    ("y,x1\n", "no data rows"),
    ("", "empty file"),
])
def test_parse_errors(text, msg):
    with pytest.raises(nio.ParseError, match=msg):
        nio.parse_dataset(text)


def test_weight_column_is_optional_and_read():
    d = nio.parse_dataset("y,x1,obs_weight\n1,2,0.5\n0,1,2\n", family="binomial")
    assert d.p == 1 and np.allclose(d.obs_weights, [0.4, 1.6], rtol=1e-15)  # rescaled to sum to n


def test_dataset_round_trip(tmp_path):
    d = generate(SimSpec(20, 4, seed=1)).replace(obs_weights=np.linspace(0.5, 2, 20))
    f = tmp_path / "d.csv"
    nio.write_dataset(d, f, weights=True)
    assert nio.read_dataset(f) == d


def test_read_vector(tmp_path):
    f = tmp_path / "v.txt"
    f.write_text("1, 2.5\n-3 4e-2\n")
    assert np.array_equal(nio.read_vector(f), [1.0, 2.5, -3.0, 0.04])


@pytest.fixture(scope="module")
def path_result():
    d = generate(SimSpec(40, 6, seed=2))
    return fit_path(PenaltySpec("scad", 1.0), d, ProblemConfig(n_lambda=12))


def test_json_round_trip_is_exact(path_result):
    text = nio.write_path(path_result)
    back = nio.read_path(text)
    assert np.array_equal(back.lambdas, path_result.lambdas)
    assert np.array_equal(back.coefficients, path_result.coefficients)
    assert np.array_equal(back.intercepts, path_result.intercepts)
    assert np.array_equal(back.objective, path_result.objective)
    assert np.array_equal(back.df, path_result.df)
    assert np.array_equal(back.converged, path_result.converged)
    assert back.config == path_result.config
    assert nio.write_path(back) == text
    doc = json.loads(text)
    assert doc["schema"] == nio.SCHEMA and doc["penalty"]["kind"] == "scad"


def test_csv_shape(path_result):
    rows = nio.write_path(path_result, "csv").splitlines()
    assert rows[0] == "lambda,variable,coefficient"
    assert len(rows) - 1 == 6 * 12
    with pytest.raises(ValueError, match="unknown format"):
        nio.write_path(path_result, "xml")


def test_read_path_rejects_other_schema():
    with pytest.raises(nio.ParseError, match="schema"):
        nio.read_path('{"schema": "other/2"}')


def empty_path():
    lam = np.array([1.0, 0.5, 0.25])
    return PathResult(grid=LambdaGrid(lam, 0.25), coefficients=np.zeros((0, 3)), intercepts=np.ones(3),
                      df=np.zeros(3, dtype=np.int64), objective=np.ones(3), converged=np.ones(3, bool),
                      kkt_max_violation=np.zeros(3), penalty=PenaltySpec("scad", 1.0),
                      config=ProblemConfig(), family="gaussian", names=())


def test_empty_feature_path():
    r = empty_path()
    text = nio.write_path(r)
    back = nio.read_path(text)
    assert back.coefficients.shape == (0, 3)
    assert json.loads(text)["coefficients"] == []
    assert nio.write_path(r, "csv") == "lambda,variable,coefficient\n"
    ET.fromstring(nio.plot_path(r))


def test_penalty_figure_defaults():
    svg = nio.plot_penalties()
    root, g, curves = curve_values(svg, "data-xlim")
    assert root.tag == f"{{{nio.SVG_NS}}}svg"
    assert len(curves) == 8
    for kind, pts in curves.items():
        t, v = to_data(g, pts)
        assert t[0] == pytest.approx(0.0, abs=1e-6) and v[0] == pytest.approx(0.0, abs=1e-2), kind
    t, v = to_data(g, curves["lasso"])
    # lasso is the line lam * t, so any two samples are colinear with the origin
    np.testing.assert_allclose(v[1:] / t[1:], 1.0, atol=1e-2)
    t, v = to_data(g, curves["mcp"])
    np.testing.assert_allclose(v[t >= 3], 1.5, atol=1e-2)
    t, v = to_data(g, curves["tlp"])
    np.testing.assert_allclose(v[t >= 3], 3.0, atol=1e-2)


def test_penalty_figure_errors():
    with pytest.raises(ValueError, match="at least one"):
        nio.plot_penalties([])
    with pytest.raises(ValueError, match="t_range"):
        nio.plot_penalties(t_range=(2.0, 1.0))


def test_path_figure(path_result):
    svg = nio.plot_path(path_result)
    root = ET.fromstring(svg)
    g = root.find(".//s:g[@class='paths']", NS)
    assert len(g.findall("s:polyline", NS)) == path_result.coefficients.shape[0]
    assert float(g.get("data-lambda-max")) == path_result.lambdas[0]
    assert float(g.get("data-lambda-min")) == path_result.lambdas[-1]
    # the largest lambda is drawn on the left
    first = g.find("s:polyline", NS).get("points").split()
    assert float(first[0].split(",")[0]) < float(first[-1].split(",")[0])


def test_all_zero_path_lies_on_the_axis():
    d = generate(SimSpec(30, 3, seed=3))
    r = fit_path(PenaltySpec("lasso", 1.0), d, ProblemConfig(n_lambda=5))
    r = PathResult(**{**r.__dict__, "coefficients": np.zeros_like(r.coefficients)})
    root = ET.fromstring(nio.plot_path(r))
    g = root.find(".//s:g[@class='paths']", NS)
    zero_y = g.find("s:line", NS).get("y1")
    for pl in g.findall("s:polyline", NS):
        assert {p.split(",")[1] for p in pl.get("points").split()} == {zero_y}
