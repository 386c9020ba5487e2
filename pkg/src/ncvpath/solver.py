"""Fixed-lambda minimization: convex-concave outer loop, modified LQA inner loop.

The objective is

    Q(beta) = L(beta) + alpha * sum_j w_j J(|beta_j|) + (1 - alpha) * lam * sum_j w_j beta_j**2

Each outer step linearizes the concave remainder of ``J`` at the current
iterate, giving the convex bound

    U(beta) = L(beta) + tilt @ beta + sum_j thresh_j |beta_j| + sum_j ridge_j beta_j**2

with ``tilt_j = alpha w_j D'(beta~_j)``, ``thresh_j = alpha w_j kappa`` and
``ridge_j`` collecting the ridge mix and any convex quadratic piece of the
penalty.  ``U`` is minimized by repeatedly solving its quadratic surrogate
with coordinate descent and backtracking along the segment to the
surrogate's minimizer.
"""

from __future__ import annotations

import logging
from dataclasses import dataclass, field
from typing import NamedTuple

import numpy as np

from . import penalty as pen_mod
from ._cd import cd_sweeps, cd_sweeps_gram
from .loss import Dataset, QuadModel, loss_eta, mean_eta, working_response
from .penalty import PenaltySpec

log = logging.getLogger(__name__)

# Armijo constant and number of halvings in the line search
ARMIJO_C = 1e-4
MAX_HALVINGS = 20
# accepted increase of U when the predicted gain is below roundoff
ROUNDOFF = 1e-14
# coarsest sweep tolerance used by inexact early outer steps
LOOSE_CD_TOL = 1e-3
LOOSE_INNER_STEPS = 3
STATIONARY_FRAC = 0.1
# cap on the over-relaxation factor between outer steps
MAX_OMEGA = 64.0
# largest active set for which the gaussian Gram matrix is formed
GRAM_MAX = 4000
GRAM_SWITCH_MIN = 10


@dataclass(frozen=True)
class SolverConfig:
    """Ridge mix and stopping rules for one fixed-lambda fit.

    ``outer_tol`` bounds the change of the linearization slopes between
    outer steps; ``inner_tol`` bounds the predicted decrease of the
    surrogate relative to ``1 + |U|``; ``cd_tol`` bounds the largest
    coordinate move in one sweep.  ``accelerate`` allows an over-relaxed
    step between outer iterations whenever it does not raise ``Q``.
    """

    alpha: float = 1.0
    inner_tol: float = 1e-11
    outer_tol: float = 1e-7
    cd_tol: float = 1e-8
    max_inner_iter: int = 100
    max_outer_iter: int = 1000
    max_cd_iter: int = 1000
    accelerate: bool = True

    def __post_init__(self):
        if not 0.0 <= self.alpha <= 1.0:
            raise ValueError("alpha must lie in [0, 1]")
        for name in ("inner_tol", "outer_tol", "cd_tol"):
            if not getattr(self, name) > 0:
                raise ValueError(f"{name} must be > 0")
        for name in ("max_inner_iter", "max_outer_iter", "max_cd_iter"):
            if getattr(self, name) < 1:
                raise ValueError(f"{name} must be a positive integer")


@dataclass
class FitState:
    beta: np.ndarray
    objective: float
    converged: bool
    iterations: dict = field(default_factory=lambda: {"outer": 0, "inner": 0, "cd": 0})
    trace: list = field(default_factory=list)
    u_trace: list = field(default_factory=list)
    messages: list = field(default_factory=list)

    @property
    def active(self) -> np.ndarray:
        return np.flatnonzero(self.beta)


class CDResult(NamedTuple):
    beta: np.ndarray
    sweeps: int
    converged: bool
    skipped: int


def _as_index(restrict, p):
    if restrict is None:
        return np.arange(p)
    idx = np.asarray(restrict)
    if idx.dtype == bool:
        idx = np.flatnonzero(idx)
    return np.unique(idx.astype(np.int64))


def _penalty_sum(pen, alpha, w, beta):
    mask = w > 0
    if not np.any(mask):
        return 0.0
    b = beta[mask]
    return float(alpha * np.dot(w[mask], pen_mod.penalty_value(pen, np.abs(b)))
                 + (1.0 - alpha) * pen.lam * np.dot(w[mask], b * b))


def objective_q(pen: PenaltySpec, data: Dataset, config: SolverConfig, beta) -> float:
    """Penalized objective with ridge mix and penalty weights."""
    beta = np.asarray(beta, dtype=float)
    val = loss_eta(data.family, data.y, data.obs_weights, data.x @ beta)
    return float(val + _penalty_sum(pen, config.alpha, data.pen_weights, beta))


def cd_subproblem(quad: QuadModel, tilt, kappa_weights, ridge, beta0, restrict=None,
                  tol: float = 1e-9, max_iter: int = 10000) -> CDResult:
    """Coordinate descent on the surrogate plus linear tilt, weighted L1 and ridge.

    Coordinates outside ``restrict`` stay at ``beta0``.  Each update is the
    soft-threshold ``S(rho_j, c_j) / (a_j + 2 ridge_j)``.
    """
    x = quad.x
    idx = _as_index(restrict, x.shape[1])
    beta = np.array(beta0, dtype=float)
    xs = np.asfortranarray(x[:, idx])
    r = quad.z - x @ beta
    b = beta[idx].copy()
    sweeps, ok, skipped = cd_sweeps(xs, quad.v, r, b, quad.a[idx],
                                    np.asarray(tilt, dtype=float)[idx],
                                    np.asarray(kappa_weights, dtype=float)[idx],
                                    np.asarray(ridge, dtype=float)[idx], tol, max_iter)
    beta[idx] = b
    return CDResult(beta, sweeps, ok, skipped)


class _Reduced:
    """The objective restricted to a coordinate subset, others frozen."""

    def __init__(self, pen: PenaltySpec, data: Dataset, config: SolverConfig, beta_full, idx):
        self.pen = pen
        self.config = config
        self.family = data.family
        self.y = data.y
        self.d = data.obs_weights
        self.idx = idx
        self.x = np.asfortranarray(data.x[:, idx])
        self.x2 = self.x * self.x
        frozen = np.ones(data.p, dtype=bool)
        frozen[idx] = False
        self.offset = data.x[:, frozen] @ beta_full[frozen] if frozen.any() else np.zeros(data.n)
        w = data.pen_weights[idx]
        alpha = config.alpha
        self.w = w
        self.penalized = w > 0
        self.thresh = alpha * w * pen_mod.kappa(pen)
        self.ridge = (1.0 - alpha) * pen.lam * w + alpha * w * pen_mod.convex_quadratic(pen)
        self.has_concave = pen.kind != "lasso"
        # penalty carried by the frozen coordinates
        self.q_frozen = _penalty_sum(pen, alpha, data.pen_weights[frozen], beta_full[frozen])
        self._fixed = None
        self._gram = None

    def working(self, eta):
        """``(v, z, a)`` at ``eta``; constant and cached for the gaussian loss."""
        if self.family == "gaussian":
            if self._fixed is None:
                v, z = working_response(self.family, self.y, self.d, eta)
                self._fixed = (v, z, self.x2.T @ v)
            return self._fixed
        v, z = working_response(self.family, self.y, self.d, eta)
        return v, z, self.x2.T @ v

    def gram(self):
        """``X.T diag(v) X`` for the gaussian loss when it is cheaper than residual sweeps."""
        n, k = self.x.shape
        if self.family != "gaussian" or k > min(n, GRAM_MAX):
            return None
        if self._gram is None:
            v = self.working(None)[0]
            self._gram = self.x.T @ (v[:, None] * self.x)
        return self._gram

    def eta(self, b):
        return self.offset + self.x @ b

    def tilt(self, b):
        t = self.config.alpha * self.w * pen_mod.d_subgrad(self.pen, b)
        t[~self.penalized] = 0.0
        return t

    def u_value(self, b, tilt, eta=None):
        eta = self.eta(b) if eta is None else eta
        return (loss_eta(self.family, self.y, self.d, eta) + np.dot(tilt, b)
                + np.dot(self.thresh, np.abs(b)) + np.dot(self.ridge, b * b))

    def residual(self, b, eta, tilt) -> float:
        """Largest first-order optimality residual of ``Q`` at ``b``; ``tilt`` is linearized at ``b``."""
        if b.size == 0:
            return 0.0
        g = self.x.T @ (self.d * (mean_eta(self.family, eta) - self.y)) / self.y.size
        g += tilt + 2.0 * self.ridge * b
        r = np.where(b != 0, np.abs(g + self.thresh * np.sign(b)), np.maximum(np.abs(g) - self.thresh, 0.0))
        return float(np.max(r))

    def q_value(self, b, eta=None):
        eta = self.eta(b) if eta is None else eta
        return float(loss_eta(self.family, self.y, self.d, eta) + self.q_frozen
                     + _penalty_sum(self.pen, self.config.alpha, self.w, b))


def _mlqa(red: _Reduced, tilt, b0, counts, cd_tol=None, eta0=None):
    """Minimize ``U`` over the reduced coordinates.

    Returns ``(b, eta, converged, improving, u_trace)``.

    ``cd_tol`` overrides the configured sweep tolerance; a looser value
    still decreases ``U`` but is never reported as converged.
    """
    cfg = red.config
    cd_tol = cfg.cd_tol if cd_tol is None else max(cd_tol, cfg.cd_tol)
    tight = cd_tol == cfg.cd_tol
    max_steps = cfg.max_inner_iter if tight else min(LOOSE_INNER_STEPS, cfg.max_inner_iter)
    b = b0.copy()
    eta = red.eta(b) if eta0 is None else eta0
    u_cur = red.u_value(b, tilt, eta)
    trace = [u_cur]
    exact = red.family == "gaussian"
    converged = False
    improving = True
    for _ in range(max_steps):
        counts["inner"] += 1
        v, z, a = red.working(eta)
        r0 = z - eta
        ba = b.copy()
        gram = red.gram()
        if gram is None:
            r = r0.copy()
            k = ba.size
            switch = k <= min(red.y.size, GRAM_MAX)
            first = min(cfg.max_cd_iter, max(GRAM_SWITCH_MIN, k)) if switch else cfg.max_cd_iter
            sweeps, ok, skipped = cd_sweeps(red.x, v, r, ba, a, tilt, red.thresh, red.ridge, cd_tol, first)
            quad_drop = 0.5 * (np.dot(v, r0 * r0) - np.dot(v, r * r))
            if not ok and sweeps < cfg.max_cd_iter:
                # slow sweeps: the weighted Gram matrix makes the remaining ones O(k^2)
                mid = ba.copy()
                g1 = red.x.T @ (v * r)
                g = g1.copy()
                more, ok, skipped2 = cd_sweeps_gram(red.x.T @ (v[:, None] * red.x), g, ba, a, tilt, red.thresh,
                                                    red.ridge, cd_tol, cfg.max_cd_iter - sweeps)
                sweeps += more
                skipped = max(skipped, skipped2)
                quad_drop += 0.5 * np.dot(ba - mid, g1 + g)
        else:
            g0 = red.x.T @ (v * r0)
            g = g0.copy()
            sweeps, ok, skipped = cd_sweeps_gram(gram, g, ba, a, tilt, red.thresh, red.ridge,
                                                 cd_tol, cfg.max_cd_iter)
            quad_drop = 0.5 * np.dot(ba - b, g0 + g)
        counts["cd"] += sweeps
        if not ok:
            counts["cd_nonconverged"] = counts.get("cd_nonconverged", 0) + 1
        ok = ok and tight
        if skipped:
            counts["skipped"] = skipped
        # surrogate decrease predicted at the CD solution
        pen_drop = (np.dot(tilt, b - ba) + np.dot(red.thresh, np.abs(b) - np.abs(ba))
                    + np.dot(red.ridge, b * b - ba * ba))
        pred = quad_drop + pen_drop
        small = pred <= cfg.inner_tol * (1.0 + abs(u_cur))
        if pred <= 0.0 or np.array_equal(ba, b):
            converged = ok
            break
        h = 1.0
        accepted = False
        slack = ROUNDOFF * (1.0 + abs(u_cur))
        for _ in range(MAX_HALVINGS + 1):
            bn = b + h * (ba - b) if h < 1.0 else ba
            eta_n = red.eta(bn)
            u_new = red.u_value(bn, tilt, eta_n)
            if u_new <= u_cur - ARMIJO_C * h * pred or (small and h == 1.0 and u_new <= u_cur + slack):
                accepted = True
                break
            h *= 0.5
        if not accepted:
            converged = small
            improving = small
            break
        b, eta, u_cur = bn, eta_n, u_new
        trace.append(u_cur)
        if tight and not exact and red.residual(b, eta, tilt) <= STATIONARY_FRAC * cfg.outer_tol:
            # first-order conditions of U hold even if the sweeps are still moving
            converged = True
            break
        if h == 1.0 and (exact or small):
            # a full step from a small gap (or on an exact surrogate) lands on the minimizer
            converged = ok
            break
    return b, eta, converged, improving, trace


def mlqa_minimize(pen: PenaltySpec, data: Dataset, config: SolverConfig, tilt, beta_init,
                  restrict=None) -> FitState:
    """Minimize the convex bound ``U`` for a given linearization ``tilt``.

    ``tilt`` is a full-length vector; coordinates outside ``restrict`` keep
    their ``beta_init`` values.
    """
    beta = np.array(beta_init, dtype=float)
    idx = _as_index(restrict, data.p)
    red = _Reduced(pen, data, config, beta, idx)
    counts = {"outer": 0, "inner": 0, "cd": 0}
    b, _, conv, improving, utr = _mlqa(red, np.asarray(tilt, dtype=float)[idx], beta[idx], counts)
    beta[idx] = b
    st = FitState(beta=beta, objective=red.q_value(b), converged=conv, iterations=counts, u_trace=utr)
    if not improving:
        st.messages.append("line search failed to improve; returned previous iterate")
    return st


def cccp_minimize(pen: PenaltySpec, data: Dataset, config: SolverConfig, beta_init=None,
                  restrict=None) -> FitState:
    """Convex-concave iterations from ``beta_init`` over the ``restrict`` coordinates.

    The recorded ``trace`` holds ``Q`` at the start and after every outer
    step, which is non-increasing by construction.
    """
    beta = np.zeros(data.p) if beta_init is None else np.array(beta_init, dtype=float)
    idx = _as_index(restrict, data.p)
    red = _Reduced(pen, data, config, beta, idx)
    return _cccp(red, beta, idx)


def _extrapolate(b_old, b_new, omega):
    """``b_new + omega*(b_new - b_old)`` with sign changes clipped to zero."""
    if b_new.size == 0 or np.array_equal(b_old, b_new):
        return None
    ext = b_new + omega * (b_new - b_old)
    ext[np.sign(ext) != np.sign(b_new)] = 0.0
    return ext


def _cccp(red: _Reduced, beta, idx) -> FitState:
    cfg = red.config
    b = beta[idx].copy()
    counts = {"outer": 0, "inner": 0, "cd": 0}
    eta = red.eta(b)
    q = red.q_value(b, eta)
    trace = [q]
    u_trace = []
    messages = []
    converged = False
    tilt = red.tilt(b)
    # early outer steps only need U to go down, so the sweep tolerance
    # follows the size of the last outer move and tightens as it shrinks
    cd_tol = LOOSE_CD_TOL if red.has_concave else 0.0
    omega = 1.0
    for _ in range(cfg.max_outer_iter):
        counts["outer"] += 1
        b_new, eta_new, inner_ok, improving, utr = _mlqa(red, tilt, b, counts, cd_tol, eta)
        u_trace.extend(utr)
        q_new = red.q_value(b_new, eta_new)
        if not improving and not inner_ok:
            messages.append("inner line search stalled")
        move = np.max(np.abs(b_new - b)) if b.size else 0.0
        if not red.has_concave:
            trace.append(q_new)
            b = b_new
            converged = inner_ok
            break
        tilt_new = red.tilt(b_new)
        change = np.max(np.abs(tilt_new - tilt)) if tilt.size else 0.0
        # an unbounded bound (separated binomial data) never lets the inner
        # solve converge, so a stationary point is also accepted directly
        if change <= cfg.outer_tol and (inner_ok or red.residual(b_new, eta_new, tilt_new) <= cfg.outer_tol):
            trace.append(q_new)
            b = b_new
            converged = True
            break
        # over-relaxed step along the last move, kept only if Q does not rise
        b_ext = _extrapolate(b, b_new, omega) if cfg.accelerate else None
        if b_ext is not None:
            eta_ext = red.eta(b_ext)
            q_ext = red.q_value(b_ext, eta_ext)
        else:
            q_ext = np.inf
        if q_ext <= q_new:
            b_new, eta_new, q_new, tilt_new = b_ext, eta_ext, q_ext, red.tilt(b_ext)
            omega = min(2.0 * omega, MAX_OMEGA)
            counts["extrapolated"] = counts.get("extrapolated", 0) + 1
        else:
            omega = 1.0
        trace.append(q_new)
        b, eta, tilt = b_new, eta_new, tilt_new
        cd_tol = 0.0 if change <= cfg.outer_tol else min(LOOSE_CD_TOL, 0.1 * move)
    else:
        messages.append(f"outer loop hit max_outer_iter={cfg.max_outer_iter}")
    if counts.get("skipped"):
        messages.append(f"{counts['skipped']} coordinate(s) with zero curvature left at initial value")
    out = beta.copy()
    out[idx] = b
    return FitState(beta=out, objective=trace[-1], converged=converged, iterations=counts,
                    trace=trace, u_trace=u_trace, messages=messages)
