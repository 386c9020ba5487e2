"""CSV data files, path documents (JSON/CSV) and SVG figures."""

from __future__ import annotations

import csv
import io as _io
import json
import math
import xml.etree.ElementTree as ET

import numpy as np

from .loss import DataError, Dataset
from .path import LambdaGrid, PathResult, ProblemConfig
from .penalty import KINDS, PenaltySpec, penalty_value
from .solver import SolverConfig

SCHEMA = "ncvpath.path/1"
OBS_WEIGHT_COLUMN = "obs_weight"


class ParseError(DataError):
    """A data file could not be parsed; the message names the location."""


def _version():
    from . import __version__
    return __version__


def read_dataset(path, response: str = "y", family: str = "gaussian",
                 obs_weight: str | None = OBS_WEIGHT_COLUMN, pen_weights=None) -> Dataset:
    """Read a headed CSV file.

    Every column other than ``response`` and ``obs_weight`` is a covariate.
    The weight column is optional.  Row numbers in errors are file line
    numbers, the header being line 1.
    """
    with open(path, newline="") as fh:
        return parse_dataset(fh.read(), response=response, family=family,
                             obs_weight=obs_weight, pen_weights=pen_weights, source=str(path))


def parse_dataset(text: str, response: str = "y", family: str = "gaussian",
                  obs_weight: str | None = OBS_WEIGHT_COLUMN, pen_weights=None,
                  source: str = "<string>") -> Dataset:
    rows = list(csv.reader(_io.StringIO(text)))
    if not rows:
        raise ParseError(f"{source}: empty file")
    header = [h.strip() for h in rows[0]]
    if response not in header:
        raise ParseError(f"{source}: response column {response!r} not found in header")
    if len(set(header)) != len(header):
        raise ParseError(f"{source}: duplicate column names in header")
    body = []
    for line, row in enumerate(rows[1:], start=2):
        if not row or all(not c.strip() for c in row):
            continue
        if len(row) != len(header):
            raise ParseError(f"{source}: row {line} has {len(row)} fields, header has {len(header)}")
        vals = []
        for col, cell in zip(header, row):
            try:
                v = float(cell)
            except ValueError:
                raise ParseError(f"{source}: row {line}, column {col}: non-numeric value {cell.strip()!r}") from None
            if not math.isfinite(v):
                raise ParseError(f"{source}: row {line}, column {col}: non-finite value {cell.strip()!r}")
            vals.append(v)
        body.append(vals)
    if not body:
        raise ParseError(f"{source}: no data rows")
    arr = np.array(body, dtype=float)
    yi = header.index(response)
    wi = header.index(obs_weight) if obs_weight and obs_weight in header else None
    xcols = [j for j in range(len(header)) if j not in (yi, wi)]
    return Dataset(arr[:, xcols], arr[:, yi], family=family,
                   obs_weights=None if wi is None else arr[:, wi],
                   pen_weights=pen_weights, names=tuple(header[j] for j in xcols))


def format_dataset(data: Dataset, response: str = "y", weights: bool = False) -> str:
    out = _io.StringIO()
    w = csv.writer(out, lineterminator="\n")
    head = [response, *data.names] + ([OBS_WEIGHT_COLUMN] if weights else [])
    w.writerow(head)
    for i in range(data.n):
        row = [data.y[i], *data.x[i]] + ([data.obs_weights[i]] if weights else [])
        w.writerow([repr(float(v)) for v in row])
    return out.getvalue()


def write_dataset(data: Dataset, path, response: str = "y", weights: bool = False):
    with open(path, "w", newline="") as fh:
        fh.write(format_dataset(data, response, weights))


def read_vector(path) -> np.ndarray:
    """Numbers separated by commas, whitespace or newlines."""
    with open(path) as fh:
        toks = fh.read().replace(",", " ").split()
    try:
        return np.array([float(t) for t in toks])
    except ValueError as exc:
        raise ParseError(f"{path}: {exc}") from None


def _config_doc(cfg: ProblemConfig) -> dict:
    s = cfg.solver
    return {
        "standardize": cfg.standardize,
        "intercept": cfg.intercept,
        "initial_policy": cfg.initial_policy,
        "global_initial": None if cfg.global_initial is None else [float(v) for v in np.ravel(cfg.global_initial)],
        "n_lambda": cfg.n_lambda,
        "ratio": cfg.ratio,
        "violator_batch": cfg.violator_batch,
        "kkt_tol": cfg.kkt_tol,
        "max_expansions": cfg.max_expansions,
        "solver": {k: getattr(s, k) for k in ("alpha", "inner_tol", "outer_tol", "cd_tol",
                                              "max_inner_iter", "max_outer_iter", "max_cd_iter")},
    }


def path_document(result: PathResult) -> dict:
    pen = result.penalty
    return {
        "schema": SCHEMA,
        "tool_version": _version(),
        "penalty": {"kind": pen.kind, "tau": pen.tau, "gamma": pen.gamma},
        "family": result.family,
        "config": _config_doc(result.config),
        "variables": list(result.names),
        "lambda": [float(v) for v in result.lambdas],
        "lambda_ratio": float(result.grid.ratio),
        "coefficients": [[float(v) for v in row] for row in result.coefficients],
        "intercept": None if result.intercepts is None else [float(v) for v in result.intercepts],
        "df": [int(v) for v in result.df],
        "objective": [float(v) for v in result.objective],
        "converged": [bool(v) for v in result.converged],
        "kkt_max_violation": [float(v) for v in result.kkt_max_violation],
    }


def write_path(result: PathResult, format: str = "json") -> str:
    """Serialize a path.

    ``json`` gives the versioned path document; floats use the shortest
    representation that reads back exactly.  ``csv`` gives long rows
    ``lambda,variable,coefficient``, one per variable and grid point.
    """
    if format == "json":
        return json.dumps(path_document(result), indent=1, sort_keys=True) + "\n"
    if format == "csv":
        out = _io.StringIO()
        w = csv.writer(out, lineterminator="\n")
        w.writerow(["lambda", "variable", "coefficient"])
        for k, lam in enumerate(result.lambdas):
            for j, name in enumerate(result.names):
                w.writerow([repr(float(lam)), name, repr(float(result.coefficients[j, k]))])
        return out.getvalue()
    raise ValueError(f"unknown format {format!r}; expected 'json' or 'csv'")


def read_path(text: str) -> PathResult:
    doc = json.loads(text)
    if doc.get("schema") != SCHEMA:
        raise ParseError(f"unsupported path document schema {doc.get('schema')!r}")
    c = doc["config"]
    cfg = ProblemConfig(standardize=c["standardize"], intercept=c["intercept"],
                        initial_policy=c["initial_policy"],
                        global_initial=None if c["global_initial"] is None else np.array(c["global_initial"]),
                        n_lambda=c["n_lambda"], ratio=c["ratio"], violator_batch=c["violator_batch"],
                        kkt_tol=c["kkt_tol"], max_expansions=c["max_expansions"],
                        solver=SolverConfig(**c["solver"]))
    lam = np.array(doc["lambda"], dtype=float)
    p = len(doc["variables"])
    pen = doc["penalty"]
    return PathResult(
        grid=LambdaGrid(lam, doc["lambda_ratio"]),
        coefficients=np.array(doc["coefficients"], dtype=float).reshape(p, lam.size),
        intercepts=None if doc["intercept"] is None else np.array(doc["intercept"], dtype=float),
        df=np.array(doc["df"], dtype=np.int64),
        objective=np.array(doc["objective"], dtype=float),
        converged=np.array(doc["converged"], dtype=bool),
        kkt_max_violation=np.array(doc["kkt_max_violation"], dtype=float),
        penalty=PenaltySpec(pen["kind"], float(lam[0]) if lam.size else 1.0, pen["tau"], pen["gamma"]),
        config=cfg, family=doc["family"], names=tuple(doc["variables"]),
    )


# ---- SVG -----------------------------------------------------------------

SVG_NS = "http://www.w3.org/2000/svg"
PALETTE = ("#1f77b4", "#d62728", "#2ca02c", "#ff7f0e", "#9467bd", "#8c564b", "#e377c2",
           "#7f7f7f", "#bcbd22", "#17becf")
WIDTH, HEIGHT = 640, 420
MARGIN = dict(left=64, right=120, top=36, bottom=48)


def _fmt(v: float) -> str:
    return f"{v:.3f}".rstrip("0").rstrip(".") if v == v else "nan"


class _Frame:
    """Linear map from data coordinates to the plotting rectangle."""

    def __init__(self, xlim, ylim):
        self.x0, self.x1 = xlim
        self.y0, self.y1 = ylim
        if self.x1 == self.x0:
            self.x1 = self.x0 + 1.0
        if self.y1 == self.y0:
            self.y0, self.y1 = self.y0 - 1.0, self.y1 + 1.0
        self.left = MARGIN["left"]
        self.right = WIDTH - MARGIN["right"]
        self.top = MARGIN["top"]
        self.bottom = HEIGHT - MARGIN["bottom"]

    def px(self, x):
        return self.left + (x - self.x0) / (self.x1 - self.x0) * (self.right - self.left)

    def py(self, y):
        return self.bottom - (y - self.y0) / (self.y1 - self.y0) * (self.bottom - self.top)


def _svg_root(title):
    ET.register_namespace("", SVG_NS)
    root = ET.Element("svg", {"xmlns": SVG_NS, "version": "1.1", "width": str(WIDTH),
                              "height": str(HEIGHT), "viewBox": f"0 0 {WIDTH} {HEIGHT}"})
    ET.SubElement(root, "title").text = title
    ET.SubElement(root, "rect", {"width": str(WIDTH), "height": str(HEIGHT), "fill": "white"})
    return root


def _axes(root, fr: _Frame, xlabel, ylabel, xticks, yticks):
    g = ET.SubElement(root, "g", {"class": "axes", "stroke": "black", "font-size": "11",
                                  "font-family": "sans-serif"})
    ET.SubElement(g, "rect", {"x": _fmt(fr.left), "y": _fmt(fr.top), "width": _fmt(fr.right - fr.left),
                              "height": _fmt(fr.bottom - fr.top), "fill": "none"})
    for val, label in xticks:
        x = _fmt(fr.px(val))
        ET.SubElement(g, "line", {"x1": x, "x2": x, "y1": _fmt(fr.bottom), "y2": _fmt(fr.bottom + 4)})
        t = ET.SubElement(g, "text", {"x": x, "y": _fmt(fr.bottom + 16), "text-anchor": "middle",
                                      "stroke": "none"})
        t.text = label
    for val, label in yticks:
        y = _fmt(fr.py(val))
        ET.SubElement(g, "line", {"x1": _fmt(fr.left - 4), "x2": _fmt(fr.left), "y1": y, "y2": y})
        t = ET.SubElement(g, "text", {"x": _fmt(fr.left - 6), "y": y, "text-anchor": "end",
                                      "dominant-baseline": "middle", "stroke": "none"})
        t.text = label
    t = ET.SubElement(g, "text", {"x": _fmt((fr.left + fr.right) / 2), "y": _fmt(HEIGHT - 10),
                                  "text-anchor": "middle", "stroke": "none"})
    t.text = xlabel
    t = ET.SubElement(g, "text", {"x": "14", "y": _fmt((fr.top + fr.bottom) / 2), "stroke": "none",
                                  "text-anchor": "middle",
                                  "transform": f"rotate(-90 14 {_fmt((fr.top + fr.bottom) / 2)})"})
    t.text = ylabel


def _ticks(lo, hi, k=5):
    vals = np.linspace(lo, hi, k)
    return [(float(v), f"{v:.3g}") for v in vals]


def _polyline(parent, fr, xs, ys, color, **attrs):
    pts = " ".join(f"{_fmt(fr.px(x))},{_fmt(fr.py(y))}" for x, y in zip(xs, ys))
    a = {"points": pts, "fill": "none", "stroke": color, "stroke-width": "1.5"}
    a.update({k.replace("_", "-"): str(v) for k, v in attrs.items()})
    return ET.SubElement(parent, "polyline", a)


def _legend(root, fr, labels):
    g = ET.SubElement(root, "g", {"class": "legend", "font-size": "11", "font-family": "sans-serif"})
    for i, (label, color) in enumerate(labels):
        y = fr.top + 8 + 16 * i
        ET.SubElement(g, "line", {"x1": _fmt(fr.right + 10), "x2": _fmt(fr.right + 30), "y1": _fmt(y),
                                  "y2": _fmt(y), "stroke": color, "stroke-width": "2"})
        t = ET.SubElement(g, "text", {"x": _fmt(fr.right + 34), "y": _fmt(y), "dominant-baseline": "middle"})
        t.text = label


def _serialize(root) -> str:
    return '<?xml version="1.0" encoding="UTF-8"?>\n' + ET.tostring(root, encoding="unicode") + "\n"


def default_penalty_specs(lam: float = 1.0, tau: float = 3.0, gamma: float = 0.5) -> list:
    """One spec per kind at the given shared parameters."""
    return [PenaltySpec(k, lam, tau, gamma if k in ("classo", "sridge") else 0.0) for k in KINDS]


def plot_penalties(specs=None, t_range=(0.0, 5.0), n_points: int = 401) -> str:
    """SVG of ``J(t)`` for each spec over ``t_range``.

    Defaults to all kinds at ``lam=1, tau=3, gamma=0.5``.  Each curve is a
    ``polyline`` carrying ``data-kind``; the plot group records its data
    limits in ``data-xlim``/``data-ylim``.
    """
    specs = default_penalty_specs() if specs is None else list(specs)
    if not specs:
        raise ValueError("need at least one penalty")
    lo, hi = map(float, t_range)
    if not (0.0 <= lo < hi and math.isfinite(hi)):
        raise ValueError("t_range must satisfy 0 <= low < high < inf")
    t = np.linspace(lo, hi, n_points)
    curves = [np.asarray(penalty_value(s, t)) for s in specs]
    ymax = max(float(c.max()) for c in curves)
    fr = _Frame((lo, hi), (0.0, ymax * 1.05 if ymax > 0 else 1.0))
    root = _svg_root("Penalty functions")
    _axes(root, fr, "t", "J(t)", _ticks(lo, hi, 6), _ticks(0.0, fr.y1, 5))
    g = ET.SubElement(root, "g", {"class": "curves", "data-xlim": f"{lo!r} {hi!r}",
                                  "data-ylim": f"{fr.y0!r} {fr.y1!r}"})
    labels = []
    for i, (s, c) in enumerate(zip(specs, curves)):
        color = PALETTE[i % len(PALETTE)]
        _polyline(g, fr, t, c, color, data_kind=s.kind)
        labels.append((s.kind, color))
    _legend(root, fr, labels)
    return _serialize(root)


def plot_path(result: PathResult) -> str:
    """SVG of coefficient trajectories against ``log(lambda)``.

    Largest ``lambda`` sits on the left.  One polyline per variable; the
    number of nonzero coefficients is printed along the top edge.
    """
    lam = np.asarray(result.lambdas, dtype=float)
    coefs = np.asarray(result.coefficients, dtype=float)
    loglam = np.log(lam)
    lo, hi = (loglam[-1], loglam[0]) if lam.size else (0.0, 1.0)
    ymin = min(0.0, float(coefs.min())) if coefs.size else 0.0
    ymax = max(0.0, float(coefs.max())) if coefs.size else 0.0
    pad = 0.05 * (ymax - ymin) if ymax > ymin else 1.0
    # reversed x axis: large lambda on the left
    fr = _Frame((hi, lo), (ymin - pad, ymax + pad))
    root = _svg_root(f"Solution path ({result.penalty.kind})")
    xt = [(float(v), f"{math.exp(v):.3g}") for v in np.linspace(hi, lo, 5)] if lam.size else []
    _axes(root, fr, "lambda (log scale)", "coefficient", xt, _ticks(fr.y0, fr.y1, 5))
    g = ET.SubElement(root, "g", {"class": "paths",
                                  "data-lambda-max": repr(float(lam[0])) if lam.size else "",
                                  "data-lambda-min": repr(float(lam[-1])) if lam.size else ""})
    zero = ET.SubElement(g, "line", {"x1": _fmt(fr.left), "x2": _fmt(fr.right), "y1": _fmt(fr.py(0.0)),
                                     "y2": _fmt(fr.py(0.0)), "stroke": "#999", "stroke-dasharray": "3,3"})
    zero.set("class", "zero")
    for j in range(coefs.shape[0]):
        name = result.names[j] if j < len(result.names) else f"x{j + 1}"
        _polyline(g, fr, loglam, coefs[j], PALETTE[j % len(PALETTE)], data_variable=name)
    dfg = ET.SubElement(root, "g", {"class": "df", "font-size": "10", "font-family": "sans-serif"})
    if lam.size:
        for k in np.unique(np.linspace(0, lam.size - 1, min(lam.size, 8)).round().astype(int)):
            t = ET.SubElement(dfg, "text", {"x": _fmt(fr.px(loglam[k])), "y": _fmt(fr.top - 6),
                                            "text-anchor": "middle"})
            t.text = str(int(result.df[k]))
    return _serialize(root)
