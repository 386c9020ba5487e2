"""Solution paths over a decreasing lambda grid with KKT-driven active sets."""

from __future__ import annotations

import warnings
from dataclasses import dataclass, field, replace
from typing import NamedTuple

import numpy as np

from . import penalty as pen_mod
from .loss import Dataset, loss_grad
from .penalty import PenaltySpec
from .solver import FitState, SolverConfig, _cccp, _Reduced, objective_q

POLICIES = ("warm_start", "global_initial")

# alpha floor used only when locating lambda_max for (near) pure ridge fits
ALPHA_FLOOR = 1e-3


@dataclass(frozen=True)
class ProblemConfig:
    """Everything about a fit other than the penalty and the data.

    ``ratio=None`` picks 0.01, or 0.05 for binomial problems with more
    columns than rows.
    """

    standardize: bool = True
    intercept: bool = True
    initial_policy: str = "warm_start"
    global_initial: np.ndarray | None = None
    n_lambda: int = 100
    ratio: float | None = None
    violator_batch: int = 10
    kkt_tol: float = 1e-6
    max_expansions: int = 1000
    solver: SolverConfig = field(default_factory=SolverConfig)

    def __post_init__(self):
        if self.initial_policy not in POLICIES:
            raise ValueError(f"initial_policy must be one of {POLICIES}")
        if self.initial_policy == "global_initial" and self.global_initial is None:
            raise ValueError("global_initial policy needs a global_initial vector")
        if self.n_lambda < 1:
            raise ValueError("n_lambda must be >= 1")
        if self.ratio is not None and not 0.0 < self.ratio < 1.0:
            raise ValueError("ratio must lie in (0, 1)")
        if self.violator_batch < 1:
            raise ValueError("violator_batch must be >= 1")
        if not self.kkt_tol > 0:
            raise ValueError("kkt_tol must be > 0")

    @property
    def alpha(self) -> float:
        return self.solver.alpha

    def with_alpha(self, alpha: float) -> "ProblemConfig":
        return replace(self, solver=replace(self.solver, alpha=alpha))


@dataclass
class LambdaGrid:
    values: np.ndarray
    ratio: float

    @property
    def n_lambda(self) -> int:
        return len(self.values)

    @property
    def lambda_max(self) -> float:
        return float(self.values[0])


@dataclass
class PathResult:
    """Coefficients along the grid, on the original column scale.

    ``coefficients`` is ``p x n_lambda``; ``intercepts`` is ``None`` when
    the model has no intercept.
    """

    grid: LambdaGrid
    coefficients: np.ndarray
    intercepts: np.ndarray | None
    df: np.ndarray
    objective: np.ndarray
    converged: np.ndarray
    kkt_max_violation: np.ndarray
    penalty: PenaltySpec
    config: ProblemConfig
    family: str
    names: tuple = ()
    scale: np.ndarray | None = None

    @property
    def lambdas(self) -> np.ndarray:
        return self.grid.values

    def beta(self, k: int) -> np.ndarray:
        """Full coefficient vector at grid index ``k``, intercept first when present."""
        if self.intercepts is None:
            return self.coefficients[:, k].copy()
        return np.concatenate([[self.intercepts[k]], self.coefficients[:, k]])

    def predict_eta(self, x, k: int) -> np.ndarray:
        eta = np.asarray(x, dtype=float) @ self.coefficients[:, k]
        if self.intercepts is not None:
            eta = eta + self.intercepts[k]
        return eta


class KKTResult(NamedTuple):
    max_violation: float
    violators: np.ndarray
    violations: np.ndarray


def standardize_columns(data: Dataset, exclude=()):
    """Scale each column to unit mean square.

    Returns the scaled dataset and the mean squares ``s``; coefficients on
    the scaled columns convert back as ``beta / sqrt(s)``.  All-zero
    columns, and those in ``exclude``, keep scale 1.
    """
    s = np.mean(data.x ** 2, axis=0)
    dead = s <= 0
    if np.any(dead):
        warnings.warn(f"columns {np.flatnonzero(dead).tolist()} are identically zero; left unscaled",
                      RuntimeWarning, stacklevel=2)
        s = np.where(dead, 1.0, s)
    if len(exclude):
        s = s.copy()
        s[list(exclude)] = 1.0
    return data.replace(x=data.x / np.sqrt(s)), s


def _working(data: Dataset, config: ProblemConfig):
    """Design actually fitted: optional intercept column first, optional scaling."""
    x, w, names = data.x, data.pen_weights, data.names
    if config.intercept:
        x = np.column_stack([np.ones(data.n), x])
        w = np.concatenate([[0.0], w])
        names = ("(intercept)",) + tuple(names)
    work = data.replace(x=x, pen_weights=w, names=names)
    scale = np.ones(work.p)
    if config.standardize and data.p:
        work, scale = standardize_columns(work, exclude=[0] if config.intercept else [])
    return work, scale


def _null_fit(pen: PenaltySpec, data: Dataset, solver: SolverConfig) -> np.ndarray:
    """Fit of the unpenalized coordinates alone, the rest at zero."""
    beta = np.zeros(data.p)
    free = np.flatnonzero(data.pen_weights == 0)
    if free.size:
        red = _Reduced(pen, data, solver, beta, free)
        beta = _cccp(red, beta, free).beta
    return beta


def _lambda_max(pen: PenaltySpec, data: Dataset, solver: SolverConfig, beta_null) -> float:
    g = np.abs(loss_grad(data, beta_null))
    w = data.pen_weights
    pos = w > 0
    if not np.any(pos):
        raise ValueError("no penalized columns")
    gmax = float(np.max(g[pos] / w[pos]))
    # a null fit that explains the response leaves only roundoff in the gradient
    g0 = float(np.max(np.abs(loss_grad(data, np.zeros(data.p)))[pos] / w[pos]))
    if not gmax > 1e-12 * g0 or gmax == 0.0:
        raise ValueError("gradient at the null model vanishes; response carries no signal to fit")
    k = gmax / max(solver.alpha, ALPHA_FLOOR)
    return float(pen_mod.lambda_for_kappa(pen.kind, k, pen.tau))


def default_ratio(data: Dataset) -> float:
    return 0.05 if data.family == "binomial" and data.p > data.n else 0.01


def lambda_grid(pen: PenaltySpec, data: Dataset, config: ProblemConfig = ProblemConfig(),
                n_lambda: int | None = None, ratio: float | None = None) -> LambdaGrid:
    """Log-spaced grid from ``lambda_max`` down to ``ratio * lambda_max``.

    ``lambda_max`` is the smallest level at which zero is optimal for every
    penalized coordinate: it solves ``alpha * kappa(lambda) = max_j |g_j| / w_j``
    with ``g`` the loss gradient at the intercept-only fit.
    """
    work, _ = _working(data, config)
    return _grid_for(pen, work, config, n_lambda, ratio, data)


def _grid_for(pen, work, config, n_lambda, ratio, data, beta_null=None):
    n_lambda = config.n_lambda if n_lambda is None else n_lambda
    ratio = config.ratio if ratio is None else ratio
    if ratio is None:
        ratio = default_ratio(data)
    if not 0.0 < ratio < 1.0:
        raise ValueError("ratio must lie in (0, 1)")
    if beta_null is None:
        beta_null = _null_fit(pen, work, config.solver)
    lmax = _lambda_max(pen, work, config.solver, beta_null)
    if n_lambda == 1:
        return LambdaGrid(np.array([lmax]), ratio)
    values = lmax * np.exp(np.linspace(0.0, np.log(ratio), n_lambda))
    values[0] = lmax
    values[-1] = lmax * ratio
    return LambdaGrid(values, ratio)


def kkt_check(pen: PenaltySpec, data: Dataset, config, beta, lam: float | None = None,
              kkt_tol: float = 1e-6) -> KKTResult:
    """First-order optimality residuals of ``Q`` at ``beta``.

    Nonzero coordinates must have zero partial derivative; zero coordinates
    need ``|dL/dbeta_j| <= alpha * w_j * kappa``.  ``violators`` lists the
    coordinates whose residual exceeds ``kkt_tol``, worst first.
    """
    if lam is not None:
        pen = pen.with_lambda(lam)
    alpha = config.alpha
    beta = np.asarray(beta, dtype=float)
    g = loss_grad(data, beta)
    w = data.pen_weights
    act = beta != 0
    viol = np.empty(data.p)
    if np.any(act):
        b = beta[act]
        viol[act] = np.abs(g[act] + alpha * w[act] * np.sign(b) * pen_mod.grad_penalty(pen, np.abs(b))
                           + 2.0 * (1.0 - alpha) * pen.lam * w[act] * b)
    ina = ~act
    viol[ina] = np.maximum(0.0, np.abs(g[ina]) - alpha * w[ina] * pen_mod.kappa(pen))
    order = np.argsort(-viol, kind="stable")
    bad = order[viol[order] > kkt_tol]
    return KKTResult(float(viol.max()) if viol.size else 0.0, bad, viol)


def fit_fixed_lambda(pen: PenaltySpec, data: Dataset, config: ProblemConfig, lam: float,
                     beta_init=None) -> FitState:
    """Active-set minimization at one ``lam``.

    Starts from the support of ``beta_init`` plus unpenalized coordinates,
    then repeatedly adds up to ``violator_batch`` of the worst KKT
    violators and re-solves until none remain outside the active set.
    """
    pen = pen.with_lambda(lam)
    solver = config.solver
    beta = np.zeros(data.p) if beta_init is None else np.array(beta_init, dtype=float)
    active = np.zeros(data.p, dtype=bool)
    active[beta != 0] = True
    active[data.pen_weights == 0] = True
    counts = {"outer": 0, "inner": 0, "cd": 0, "expansions": 0}
    trace, messages = [], []
    state = None
    for _ in range(config.max_expansions + 1):
        if np.any(active):
            idx = np.flatnonzero(active)
            state = _cccp(_Reduced(pen, data, solver, beta, idx), beta, idx)
            beta = state.beta
            trace.extend(state.trace)
            messages.extend(state.messages)
            for k in ("outer", "inner", "cd"):
                counts[k] += state.iterations[k]
        kkt = kkt_check(pen, data, solver, beta, kkt_tol=config.kkt_tol)
        outside = kkt.violators[~active[kkt.violators]]
        if outside.size == 0:
            break
        active[outside[:config.violator_batch]] = True
        counts["expansions"] += 1
    else:
        messages.append("active-set expansion budget exhausted")
    solver_ok = state.converged if state is not None else True
    out = FitState(beta=beta, objective=objective_q(pen, data, solver, beta),
                   converged=bool(solver_ok and kkt.max_violation <= config.kkt_tol),
                   iterations=counts, trace=trace, messages=messages)
    out.kkt_max_violation = kkt.max_violation
    return out


def fit_path(pen: PenaltySpec, data: Dataset, config: ProblemConfig = ProblemConfig(),
             lambdas=None) -> PathResult:
    """Fit the whole path, largest ``lambda`` first.

    With ``warm_start`` each fit starts from the previous solution; with
    ``global_initial`` every fit starts from ``config.global_initial``
    (original scale, length ``p``, or ``p + 1`` with the intercept first).
    ``lambdas`` overrides the computed grid and is sorted descending.
    """
    work, scale = _working(data, config)
    solver = config.solver
    null = _null_fit(pen, work, solver)
    if lambdas is None:
        grid = _grid_for(pen, work, config, None, None, data, beta_null=null)
    else:
        vals = np.sort(np.asarray(lambdas, dtype=float).ravel())[::-1]
        if vals.size == 0 or np.any(vals <= 0):
            raise ValueError("lambdas must be positive")
        grid = LambdaGrid(vals, float(vals[-1] / vals[0]) if vals.size > 1 else 1.0)

    root = np.sqrt(scale)
    start = null
    if config.initial_policy == "global_initial":
        start = _global_start(config.global_initial, data, config, null) * root

    K = grid.n_lambda
    coefs = np.zeros((work.p, K))
    obj = np.zeros(K)
    conv = np.zeros(K, dtype=bool)
    kkt = np.zeros(K)
    beta = start
    for k, lam in enumerate(grid.values):
        init = beta if config.initial_policy == "warm_start" else start
        st = fit_fixed_lambda(pen, work, config, lam, init)
        beta = st.beta
        coefs[:, k] = beta
        obj[k] = st.objective
        conv[k] = st.converged
        kkt[k] = st.kkt_max_violation
    if not conv.all():
        warnings.warn(f"{int((~conv).sum())} of {K} path points did not converge", RuntimeWarning, stacklevel=2)

    coefs = coefs / root[:, None]
    icpt = None
    if config.intercept:
        icpt, coefs = coefs[0].copy(), coefs[1:]
    df = np.count_nonzero(coefs, axis=0)
    return PathResult(grid=grid, coefficients=coefs, intercepts=icpt, df=df, objective=obj,
                      converged=conv, kkt_max_violation=kkt, penalty=pen, config=config,
                      family=data.family, names=data.names, scale=scale[1:] if config.intercept else scale)


def _global_start(init, data, config, null):
    init = np.asarray(init, dtype=float).ravel()
    if config.intercept:
        if init.size == data.p:
            return np.concatenate([[null[0]], init])
        if init.size == data.p + 1:
            return init.copy()
    elif init.size == data.p:
        return init.copy()
    raise ValueError(f"global_initial has {init.size} entries; expected {data.p}"
                     + (f" or {data.p + 1}" if config.intercept else ""))
