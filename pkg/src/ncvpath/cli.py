"""Command-line interface.

Subcommands: ``fit``, ``path``, ``cv``, ``gic``, ``simulate``,
``plot-penalties`` and ``plot-path``.  Exit status is 0 on success, 2 on
usage errors and 1 on data or computation errors.  Diagnostics go to
standard error.
"""

from __future__ import annotations

import argparse
import inspect
import json
import sys
import warnings
from dataclasses import fields, replace

import numpy as np

from . import io as nio
from .datagen import SimSpec, generate
from .loss import FAMILIES, DataError
from .path import ProblemConfig, _global_start, _null_fit, _working, fit_fixed_lambda, fit_path
from .penalty import KINDS, PenaltyDomainError, PenaltySpec, validate
from .select import GIC_POLICIES, cv_select, gic_select
from .solver import SolverConfig

SELECTION_SCHEMA = "ncvpath.selection/1"
FIT_SCHEMA = "ncvpath.fit/1"


def _defaults(cls):
    return {f.name: f.default for f in fields(cls) if not callable(f.default_factory)}


PROBLEM_DEFAULTS = _defaults(ProblemConfig)
SOLVER_DEFAULTS = _defaults(SolverConfig)
PENALTY_DEFAULTS = _defaults(PenaltySpec)
def _kwdefaults(func):
    return {k: v.default for k, v in inspect.signature(func).parameters.items()
            if v.default is not inspect.Parameter.empty}


SIM_DEFAULTS = _defaults(SimSpec)
_CV = _kwdefaults(cv_select)
CV_DEFAULTS = {"folds": _CV["n_folds"], "seed": _CV["seed"], "jobs": _CV["jobs"]}
GIC_DEFAULT = _kwdefaults(gic_select)["policy"]
FIGURE_DEFAULTS = _kwdefaults(nio.default_penalty_specs)
T_RANGE_DEFAULT = _kwdefaults(nio.plot_penalties)["t_range"]


class UsageError(Exception):
    pass


def _add_model_flags(p: argparse.ArgumentParser, single_lambda=False):
    g = p.add_argument_group("data")
    g.add_argument("--data", required=True, help="CSV file with a header row")
    g.add_argument("--response", default="y", help="name of the response column (default: %(default)s)")
    g.add_argument("--family", choices=FAMILIES, default="gaussian", help="loss family (default: %(default)s)")
    g.add_argument("--obs-weights", default=nio.OBS_WEIGHT_COLUMN, metavar="COLUMN",
                   help="column holding observation weights, used when present (default: %(default)s)")
    g.add_argument("--pen-weights", metavar="FILE", help="file with one penalty weight per covariate")

    g = p.add_argument_group("penalty")
    g.add_argument("--penalty", choices=KINDS, default="scad", help="penalty kind (default: %(default)s)")
    if single_lambda:
        g.add_argument("--lambda", dest="lam", type=float, required=True, help="regularization level")
    g.add_argument("--tau", type=float, default=PENALTY_DEFAULTS["tau"],
                   help="concave scale (default: %(default)s)")
    g.add_argument("--gamma", type=float, default=PENALTY_DEFAULTS["gamma"],
                   help="secondary scale for classo and sridge (default: %(default)s)")
    g.add_argument("--alpha", type=float, default=SOLVER_DEFAULTS["alpha"],
                   help="mix between the penalty (1) and ridge (0) (default: %(default)s)")

    g = p.add_argument_group("path")
    g.add_argument("--n-lambda", type=int, default=PROBLEM_DEFAULTS["n_lambda"],
                   help="grid size (default: %(default)s)")
    g.add_argument("--lambda-ratio", type=float, default=PROBLEM_DEFAULTS["ratio"],
                   help="lambda_min / lambda_max; 0.01, or 0.05 for binomial with p > n, when omitted")
    g.add_argument("--standardize", action=argparse.BooleanOptionalAction,
                   default=PROBLEM_DEFAULTS["standardize"],
                   help="scale covariates to unit mean square before fitting")
    g.add_argument("--intercept", action=argparse.BooleanOptionalAction, default=PROBLEM_DEFAULTS["intercept"],
                   help="fit an unpenalized intercept")
    g.add_argument("--initial", choices=("warm", "global"), default="warm",
                   help="warm starts along the grid, or one global initial for every lambda (default: %(default)s)")
    g.add_argument("--global-initial-from", metavar="FILE|lasso",
                   help="file of initial coefficients, or 'lasso' for the cross-validated LASSO fit")
    g.add_argument("--violator-batch", type=int, default=PROBLEM_DEFAULTS["violator_batch"],
                   help="KKT violators added to the active set per round (default: %(default)s)")
    g.add_argument("--kkt-tol", type=float, default=PROBLEM_DEFAULTS["kkt_tol"],
                   help="KKT residual tolerance (default: %(default)s)")
    g.add_argument("--max-outer-iter", type=int, default=SOLVER_DEFAULTS["max_outer_iter"],
                   help="outer iteration cap per fit (default: %(default)s)")
    g.add_argument("--accelerate", action=argparse.BooleanOptionalAction, default=SOLVER_DEFAULTS["accelerate"],
                   help="try an over-relaxed step between outer iterations")

    g = p.add_argument_group("output")
    g.add_argument("--output", "-o", default="-", help="output file, '-' for standard output (default: %(default)s)")


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="ncvpath", description="Non-convex penalized regression paths.")
    sub = parser.add_subparsers(dest="command", required=True, metavar="COMMAND")

    p = sub.add_parser("fit", help="fit at a single lambda")
    _add_model_flags(p, single_lambda=True)

    p = sub.add_parser("path", help="fit the full solution path")
    _add_model_flags(p)
    p.add_argument("--format", choices=("json", "csv"), default="json", help="path document format (default: %(default)s)")
    p.add_argument("--svg", metavar="FILE", help="also write a solution-path figure")

    p = sub.add_parser("cv", help="choose lambda by K-fold cross-validation")
    _add_model_flags(p)
    p.add_argument("--folds", type=int, default=CV_DEFAULTS["folds"], help="number of folds (default: %(default)s)")
    p.add_argument("--seed", type=int, default=CV_DEFAULTS["seed"], help="fold assignment seed (default: %(default)s)")
    p.add_argument("--jobs", type=int, default=CV_DEFAULTS["jobs"], help="folds fitted concurrently (default: %(default)s)")
    p.add_argument("--one-se", action="store_true", help="pick the largest lambda within one SE of the minimum")

    p = sub.add_parser("gic", help="choose lambda by a generalized information criterion")
    _add_model_flags(p)
    p.add_argument("--gic-policy", default=GIC_DEFAULT,
                   help=f"complexity weight: one of {', '.join(GIC_POLICIES)} or a number (default: %(default)s)")

    p = sub.add_parser("simulate", help="write a synthetic dataset with AR(1) covariates")
    p.add_argument("--n", type=int, required=True, help="rows")
    p.add_argument("--p", type=int, required=True, help="covariates")
    p.add_argument("--rho", type=float, default=SIM_DEFAULTS["rho"], help="AR(1) correlation (default: %(default)s)")
    p.add_argument("--family", choices=FAMILIES, default=SIM_DEFAULTS["family"],
                   help="response family (default: %(default)s)")
    p.add_argument("--seed", type=int, default=SIM_DEFAULTS["seed"], help="generator seed (default: %(default)s)")
    p.add_argument("--output", "-o", default="-", help="output CSV, '-' for standard output (default: %(default)s)")

    p = sub.add_parser("plot-penalties", help="SVG of the penalty functions")
    p.add_argument("--penalty", action="append", choices=KINDS, help="kind to draw; repeat for several (default: all)")
    p.add_argument("--lambda", dest="lam", type=float, default=FIGURE_DEFAULTS["lam"],
                   help="regularization level (default: %(default)s)")
    p.add_argument("--tau", type=float, default=FIGURE_DEFAULTS["tau"], help="concave scale (default: %(default)s)")
    p.add_argument("--gamma", type=float, default=FIGURE_DEFAULTS["gamma"], help="secondary scale (default: %(default)s)")
    p.add_argument("--t-max", type=float, default=T_RANGE_DEFAULT[1], help="right end of the t axis (default: %(default)s)")
    p.add_argument("--output", "-o", default="-", help="output SVG, '-' for standard output (default: %(default)s)")

    p = sub.add_parser("plot-path", help="SVG of a saved JSON path document")
    p.add_argument("--input", required=True, help="JSON path document")
    p.add_argument("--output", "-o", default="-", help="output SVG, '-' for standard output (default: %(default)s)")
    return parser


def _emit(text: str, dest: str):
    if dest == "-":
        sys.stdout.write(text)
        sys.stdout.flush()
    else:
        with open(dest, "w", newline="") as fh:
            fh.write(text)


def _check_penalty(args):
    lam = getattr(args, "lam", None)
    try:
        if lam is None:
            # classo's gamma cap is applied per lambda along the path
            validate(args.penalty, max(1.0, args.gamma), args.tau, args.gamma)
        else:
            validate(args.penalty, lam, args.tau, args.gamma)
    except PenaltyDomainError as exc:
        raise UsageError(str(exc)) from None


def _config(args, data) -> ProblemConfig:
    if not 0.0 <= args.alpha <= 1.0:
        raise UsageError("alpha must lie in [0, 1]")
    if args.lambda_ratio is not None and not 0.0 < args.lambda_ratio < 1.0:
        raise UsageError("lambda ratio must lie in (0, 1)")
    if args.n_lambda < 1:
        raise UsageError("n-lambda must be >= 1")
    if args.violator_batch < 1:
        raise UsageError("violator-batch must be >= 1")
    solver = SolverConfig(alpha=args.alpha, max_outer_iter=args.max_outer_iter, accelerate=args.accelerate)
    cfg = ProblemConfig(standardize=args.standardize, intercept=args.intercept, n_lambda=args.n_lambda,
                        ratio=args.lambda_ratio, violator_batch=args.violator_batch, kkt_tol=args.kkt_tol,
                        solver=solver)
    if args.initial == "global":
        src = args.global_initial_from
        if src is None:
            raise UsageError("--initial global needs --global-initial-from")
        if src != "lasso":
            init = nio.read_vector(src)
            cfg = replace(cfg, initial_policy="global_initial", global_initial=init)
    elif args.global_initial_from is not None:
        raise UsageError("--global-initial-from only applies with --initial global")
    return cfg


def _lasso_initial(data, cfg, args):
    sel = cv_select(PenaltySpec("lasso", 1.0), data, cfg, n_folds=getattr(args, "folds", CV_DEFAULTS["folds"]),
                    seed=getattr(args, "seed", CV_DEFAULTS["seed"]))
    return sel.path.beta(sel.selected_index)


def _load(args):
    pw = nio.read_vector(args.pen_weights) if args.pen_weights else None
    return nio.read_dataset(args.data, response=args.response, family=args.family,
                            obs_weight=args.obs_weights, pen_weights=pw)


def _selection_doc(sel, data) -> dict:
    return {
        "schema": SELECTION_SCHEMA,
        "criterion": sel.criterion,
        "variables": list(data.names),
        "lambda": [float(v) for v in sel.lambdas],
        "scores": [float(v) for v in sel.scores],
        "score_se": None if sel.score_se is None else [float(v) for v in sel.score_se],
        "misclassification": None if sel.misclassification is None else [float(v) for v in sel.misclassification],
        "selected_index": sel.selected_index,
        "selected_lambda": sel.selected_lambda,
        "selected_beta": [float(v) for v in sel.selected_beta],
        "selected_intercept": sel.selected_intercept,
    }


def _dump(doc) -> str:
    return json.dumps(doc, indent=1, sort_keys=True) + "\n"


def _run(args) -> int:
    if args.command == "simulate":
        if args.n < 1 or args.p < 1:
            raise UsageError("--n and --p must be >= 1")
        if not -1.0 < args.rho < 1.0:
            raise UsageError("--rho must lie in (-1, 1)")
        _emit(nio.format_dataset(generate(SimSpec(args.n, args.p, args.rho, args.family, seed=args.seed))),
              args.output)
        return 0

    if args.command == "plot-penalties":
        kinds = args.penalty or list(KINDS)
        try:
            specs = [PenaltySpec(k, args.lam, args.tau, args.gamma if k in ("classo", "sridge") else 0.0)
                     for k in kinds]
        except PenaltyDomainError as exc:
            raise UsageError(str(exc)) from None
        if not args.t_max > 0:
            raise UsageError("--t-max must be > 0")
        _emit(nio.plot_penalties(specs, (0.0, args.t_max)), args.output)
        return 0

    if args.command == "plot-path":
        with open(args.input) as fh:
            _emit(nio.plot_path(nio.read_path(fh.read())), args.output)
        return 0

    _check_penalty(args)
    data = _load(args)
    cfg = _config(args, data)
    lasso_seed = args.initial == "global" and args.global_initial_from == "lasso"
    if lasso_seed and args.command != "cv":
        cfg = replace(cfg, initial_policy="global_initial", global_initial=_lasso_initial(data, cfg, args))

    if args.command == "fit":
        pen = PenaltySpec(args.penalty, args.lam, args.tau, args.gamma)
        work, scale = _working(data, cfg)
        init = None
        if cfg.initial_policy == "global_initial":
            init = _global_start(cfg.global_initial, data, cfg, _null_fit(pen, work, cfg.solver)) * np.sqrt(scale)
        st = fit_fixed_lambda(pen, work, cfg, args.lam, init)
        beta = st.beta / np.sqrt(scale)
        icpt = None
        if cfg.intercept:
            icpt, beta = float(beta[0]), beta[1:]
        if not st.converged:
            print(f"warning: fit did not converge (KKT residual {st.kkt_max_violation:.3g})", file=sys.stderr)
        _emit(_dump({"schema": FIT_SCHEMA, "penalty": args.penalty, "lambda": args.lam, "tau": args.tau,
                     "gamma": args.gamma, "alpha": args.alpha, "variables": list(data.names),
                     "beta": [float(v) for v in beta], "intercept": icpt, "objective": st.objective,
                     "converged": bool(st.converged), "kkt_max_violation": float(st.kkt_max_violation)}),
              args.output)
        return 0

    pen = PenaltySpec(args.penalty, max(1.0, args.gamma), args.tau, args.gamma)
    if args.command == "path":
        with warnings.catch_warnings(record=True) as caught:
            warnings.simplefilter("always")
            res = fit_path(pen, data, cfg)
        for w in caught:
            print(f"warning: {w.message}", file=sys.stderr)
        _emit(nio.write_path(res, args.format), args.output)
        if args.svg:
            _emit(nio.plot_path(res), args.svg)
        return 0

    if args.command == "cv":
        if not 2 <= args.folds <= data.n:
            raise UsageError(f"--folds must lie in [2, {data.n}]")
        sel = cv_select(pen, data, cfg, n_folds=args.folds, seed=args.seed, jobs=max(1, args.jobs),
                        one_se=args.one_se, initial="lasso" if lasso_seed else None)
        _emit(_dump(_selection_doc(sel, data)), args.output)
        return 0

    if args.command == "gic":
        policy = args.gic_policy
        if policy not in GIC_POLICIES:
            try:
                policy = float(policy)
            except ValueError:
                raise UsageError(f"--gic-policy must be one of {', '.join(GIC_POLICIES)} or a number") from None
        sel = gic_select(pen, data, cfg, policy=policy)
        _emit(_dump(_selection_doc(sel, data)), args.output)
        return 0
    raise UsageError(f"unknown command {args.command}")


def main(argv=None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return int(exc.code or 0)
    try:
        return _run(args)
    except UsageError as exc:
        parser.print_usage(sys.stderr)
        print(f"ncvpath: error: {exc}", file=sys.stderr)
        return 2
    except (DataError, ValueError, OSError) as exc:
        print(f"ncvpath: error: {exc}", file=sys.stderr)
        return 1


run = main

if __name__ == "__main__":
    sys.exit(main())
