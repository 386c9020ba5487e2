import json

import pytest

from ncvpath import ProblemConfig, SolverConfig, cli
from ncvpath import io as nio
from ncvpath.datagen import SimSpec
from ncvpath.penalty import PenaltySpec
from ncvpath.select import cv_select, gic_select


@pytest.fixture(scope="module")
def data_file(tmp_path_factory):
    f = tmp_path_factory.mktemp("cli") / "d.csv"
    assert cli.main(["simulate", "--n", "80", "--p", "6", "--seed", "3", "-o", str(f)]) == 0
    return f


def run(argv, capsys):
    code = cli.main([str(a) for a in argv])
    out, err = capsys.readouterr()
    return code, out, err


def test_simulate_is_deterministic(capsys):
    argv = ["simulate", "--n", "200", "--p", "10", "--family", "gaussian", "--seed", "7"]
    a = run(argv, capsys)
    b = run(argv, capsys)
    assert a[0] == 0 and a[1] == b[1]
    assert len(a[1].splitlines()) == 201


def test_scad_tau_domain_is_a_usage_error(data_file, capsys):
    code, out, err = run(["path", "--data", data_file, "--penalty", "scad", "--tau", "1.5"], capsys)
    assert code == 2 and out == ""
    assert "scad requires tau > 2" in err


@pytest.mark.parametrize("argv, msg", [
    (["path", "--alpha", "2"], "alpha must lie in"),
    (["path", "--lambda-ratio", "1.5"], "lambda ratio"),
    (["path", "--initial", "global"], "needs --global-initial-from"),
    (["cv", "--folds", "1"], "--folds must lie"),
    (["gic", "--gic-policy", "nope"], "--gic-policy"),
])
def test_flag_domain_errors(data_file, capsys, argv, msg):
    code, _, err = run([*argv, "--data", data_file], capsys)
    assert code == 2 and msg in err


def test_unknown_flag_exits_2(capsys):
    assert run(["path", "--bogus"], capsys)[0] == 2


def test_data_error_exits_1(tmp_path, capsys):
    f = tmp_path / "bad.csv"
    f.write_text("y,x1\n1,NA\n")
    code, _, err = run(["path", "--data", f], capsys)
    assert code == 1 and "row 2, column x1" in err


def test_cv_lambda_lies_on_path_grid(data_file, capsys):
    _, path_out, _ = run(["path", "--data", data_file, "--penalty", "lasso", "--n-lambda", "20"], capsys)
    code, cv_out, _ = run(["cv", "--data", data_file, "--penalty", "lasso", "--n-lambda", "20"], capsys)
    assert code == 0
    grid = json.loads(path_out)["lambda"]
    sel = json.loads(cv_out)
    assert sel["selected_lambda"] in grid
    assert sel["lambda"] == grid


def test_outputs_are_byte_identical(data_file, tmp_path, capsys):
    for argv in (["path", "--data", data_file, "--penalty", "mcp"],
                 ["path", "--data", data_file, "--format", "csv"],
                 ["gic", "--data", data_file],
                 ["cv", "--data", data_file, "--jobs", "2", "--n-lambda", "15"],
                 ["fit", "--data", data_file, "--lambda", "0.1"],
                 ["plot-penalties"]):
        a, b = run(argv, capsys), run(argv, capsys)
        assert a[0] == 0 and a[1] == b[1] and a[1]


def test_path_writes_svg_and_plot_path_reads_json(data_file, tmp_path, capsys):
    doc, svg = tmp_path / "p.json", tmp_path / "p.svg"
    assert cli.main(["path", "--data", str(data_file), "-o", str(doc), "--svg", str(svg)]) == 0
    code, out, _ = run(["plot-path", "--input", doc], capsys)
    assert code == 0 and out == svg.read_text()


def test_global_initial_from_lasso(data_file, capsys):
    code, out, _ = run(["path", "--data", data_file, "--initial", "global",
                        "--global-initial-from", "lasso", "--n-lambda", "10"], capsys)
    assert code == 0
    assert json.loads(out)["config"]["initial_policy"] == "global_initial"


def test_global_initial_from_file(data_file, tmp_path, capsys):
    v = tmp_path / "b0.txt"
    v.write_text("1 0.5 0 0 0 0\n")
    code, out, _ = run(["fit", "--data", data_file, "--lambda", "0.05", "--initial", "global",
                        "--global-initial-from", v], capsys)
    assert code == 0 and json.loads(out)["converged"]


def test_flag_defaults_match_library():
    parser = cli.build_parser()
    sub = {a.dest: a for a in parser._subparsers._group_actions}["command"].choices
    defaults = {a.dest: a.default for a in sub["path"]._actions}
    cfg, solver, pen = ProblemConfig(), SolverConfig(), PenaltySpec("scad", 1.0)
    assert defaults["n_lambda"] == cfg.n_lambda
    assert defaults["lambda_ratio"] == cfg.ratio
    assert defaults["standardize"] == cfg.standardize
    assert defaults["intercept"] == cfg.intercept
    assert defaults["violator_batch"] == cfg.violator_batch
    assert defaults["kkt_tol"] == cfg.kkt_tol
    assert defaults["alpha"] == solver.alpha
    assert defaults["max_outer_iter"] == solver.max_outer_iter
    assert defaults["accelerate"] == solver.accelerate
    assert defaults["tau"] == pen.tau and defaults["gamma"] == pen.gamma
    cv = {a.dest: a.default for a in sub["cv"]._actions}
    import inspect
    sig = inspect.signature(cv_select).parameters
    assert (cv["folds"], cv["seed"], cv["jobs"]) == (sig["n_folds"].default, sig["seed"].default, sig["jobs"].default)
    gic = {a.dest: a.default for a in sub["gic"]._actions}
    assert gic["gic_policy"] == inspect.signature(gic_select).parameters["policy"].default
    sim = {a.dest: a.default for a in sub["simulate"]._actions}
    spec = SimSpec(1, 1)
    assert (sim["rho"], sim["family"], sim["seed"]) == (spec.rho, spec.family, spec.seed)
    fig = {a.dest: a.default for a in sub["plot-penalties"]._actions}
    specs = nio.default_penalty_specs()
    assert fig["lam"] == specs[0].lam and fig["tau"] == specs[0].tau
    assert fig["gamma"] == next(s.gamma for s in specs if s.kind == "classo")


def test_help_documents_every_flag():
    parser = cli.build_parser()
    sub = {a.dest: a for a in parser._subparsers._group_actions}["command"].choices
    for name, p in sub.items():
        for a in p._actions:
            if a.dest != "help":
                assert a.help, f"{name} {a.dest}"
