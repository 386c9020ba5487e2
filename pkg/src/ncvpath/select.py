"""Choosing lambda by K-fold cross-validation or a generalized information criterion."""

from __future__ import annotations

from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field, replace

import numpy as np

from .loss import Dataset, loss_eta, mean_eta
from .path import PathResult, ProblemConfig, fit_path
from .penalty import PenaltySpec

GIC_POLICIES = ("bic", "gic", "aic")


@dataclass
class SelectionResult:
    lambdas: np.ndarray
    scores: np.ndarray
    selected_index: int
    selected_beta: np.ndarray
    selected_intercept: float | None
    path: PathResult
    score_se: np.ndarray | None = None
    misclassification: np.ndarray | None = None
    criterion: str = "cv"
    fold_paths: list = field(default_factory=list, repr=False)

    @property
    def selected_lambda(self) -> float:
        return float(self.lambdas[self.selected_index])


def _argmin(scores) -> int:
    # first minimum along a descending grid is the largest lambda
    return int(np.flatnonzero(scores == np.min(scores))[0])


def fold_ids(data: Dataset, n_folds: int, seed: int = 0) -> np.ndarray:
    """Seeded fold labels, stratified by class for the binomial family."""
    if not 2 <= n_folds <= data.n:
        raise ValueError(f"n_folds must lie in [2, {data.n}]")
    rng = np.random.Generator(np.random.PCG64(seed))
    ids = np.empty(data.n, dtype=np.int64)
    if data.family == "binomial":
        start = 0
        for cls in (0.0, 1.0):
            rows = np.flatnonzero(data.y == cls)
            ids[rows[rng.permutation(rows.size)]] = (start + np.arange(rows.size)) % n_folds
            start += rows.size
    else:
        ids[rng.permutation(data.n)] = np.arange(data.n) % n_folds
    return ids


def _holdout(family, y, d, eta):
    """Weighted mean held-out deviance and misclassification rate."""
    if family == "gaussian":
        dev = np.dot(d, (y - eta) ** 2) / d.sum()
        return dev, np.nan
    nll = np.logaddexp(0.0, eta) - y * eta
    mis = (mean_eta(family, eta) > 0.5).astype(float) != y
    return np.dot(d, nll) / d.sum(), np.dot(d, mis) / d.sum()


def cv_select(pen: PenaltySpec, data: Dataset, config: ProblemConfig = ProblemConfig(),
              n_folds: int = 10, seed: int = 0, foldid=None, jobs: int = 1,
              one_se: bool = False, initial: str | None = None) -> SelectionResult:
    """K-fold cross-validation over one master lambda grid.

    The grid comes from the full data and is reused in every fold.  Scores
    are weighted mean squared error (gaussian) or negative log-likelihood
    (binomial) on the held-out rows.  ``foldid`` overrides the seeded fold
    assignment.

    ``initial="lasso"`` seeds every fit with a LASSO solution: LASSO is
    cross-validated on the same folds, and the full-data fit and each fold
    fit start from their own LASSO path at the selected LASSO index.
    """
    ids = fold_ids(data, n_folds, seed) if foldid is None else np.asarray(foldid)
    folds = np.unique(ids)
    if folds.size < 2:
        raise ValueError("need at least two folds")
    if data.family == "binomial":
        for f in folds:
            if np.unique(data.y[ids != f]).size < 2:
                raise ValueError(f"fold {f}: training rows contain a single class")

    configs = {f: config for f in folds}
    full_config = config
    if initial == "lasso":
        warm = replace(config, initial_policy="warm_start", global_initial=None)
        seed_sel = cv_select(PenaltySpec("lasso", 1.0), data, warm, foldid=ids, jobs=jobs)
        k0 = seed_sel.selected_index
        full_config = replace(config, initial_policy="global_initial", global_initial=seed_sel.path.beta(k0))
        configs = {f: replace(config, initial_policy="global_initial", global_initial=fp.beta(k0))
                   for f, fp in zip(folds, seed_sel.fold_paths)}
    elif initial is not None:
        raise ValueError(f"unknown initial {initial!r}; expected None or 'lasso'")

    full = fit_path(pen, data, full_config)
    lambdas = full.lambdas

    def run(f):
        test = ids == f
        fit = fit_path(pen, data.subset(~test), configs[f], lambdas=lambdas)
        yt, dt, xt = data.y[test], data.obs_weights[test], data.x[test]
        out = np.array([_holdout(data.family, yt, dt, fit.predict_eta(xt, k)) for k in range(len(lambdas))])
        return out[:, 0], out[:, 1], dt.sum(), fit

    if jobs > 1:
        with ThreadPoolExecutor(max_workers=jobs) as ex:
            results = list(ex.map(run, folds))
    else:
        results = [run(f) for f in folds]

    dev = np.array([r[0] for r in results])
    mis = np.array([r[1] for r in results])
    wts = np.array([r[2] for r in results])
    scores = wts @ dev / wts.sum()
    se = np.sqrt(np.average((dev - scores) ** 2, axis=0, weights=wts) / max(folds.size - 1, 1))
    k = _argmin(scores)
    if one_se:
        k = int(np.flatnonzero(scores <= scores[k] + se[k])[0])
    return SelectionResult(lambdas=lambdas, scores=scores, score_se=se, selected_index=k,
                           selected_beta=full.coefficients[:, k].copy(),
                           selected_intercept=None if full.intercepts is None else float(full.intercepts[k]),
                           path=full,
                           misclassification=None if data.family == "gaussian" else wts @ mis / wts.sum(),
                           criterion="cv", fold_paths=[r[3] for r in results])


def complexity_weight(policy, n: int, p: int) -> float:
    """``a_n`` for a named policy, or the number itself."""
    if isinstance(policy, (int, float)):
        return float(policy)
    if policy == "bic":
        return float(np.log(n))
    if policy == "gic":
        return float(np.log(np.log(n)) * np.log(p))
    if policy == "aic":
        return 2.0
    raise ValueError(f"unknown GIC policy {policy!r}; expected one of {GIC_POLICIES} or a number")


def gic_scores(path: PathResult, data: Dataset, a_n: float) -> np.ndarray:
    """``2 n L(beta) + a_n df`` at every path point."""
    out = np.empty(path.grid.n_lambda)
    for k in range(out.size):
        eta = path.predict_eta(data.x, k)
        out[k] = 2.0 * data.n * loss_eta(data.family, data.y, data.obs_weights, eta)
    return out + a_n * path.df


def gic_select(pen: PenaltySpec, data: Dataset, config: ProblemConfig = ProblemConfig(),
               policy="bic", path: PathResult | None = None) -> SelectionResult:
    path = fit_path(pen, data, config) if path is None else path
    a_n = complexity_weight(policy, data.n, data.p)
    scores = gic_scores(path, data, a_n)
    k = _argmin(scores)
    return SelectionResult(lambdas=path.lambdas, scores=scores, selected_index=k,
                           selected_beta=path.coefficients[:, k].copy(),
                           selected_intercept=None if path.intercepts is None else float(path.intercepts[k]),
                           path=path, criterion=f"gic:{policy}")

