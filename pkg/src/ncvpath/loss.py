"""Convex losses with observation weights and their quadratic surrogates."""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np
from scipy.special import expit

FAMILIES = ("gaussian", "binomial")

# lower bound on the binomial working weight pi*(1-pi)
WORKING_WEIGHT_FLOOR = 1e-6


class DataError(ValueError):
    """Invalid data passed to a model."""


@dataclass(frozen=True, eq=False)
class Dataset:
    """Design matrix, response and weights for one regression problem.

    Observation weights are rescaled to sum to ``n`` on construction.
    Missing weights default to ones.
    """

    x: np.ndarray
    y: np.ndarray
    family: str = "gaussian"
    obs_weights: np.ndarray | None = None
    pen_weights: np.ndarray | None = None
    names: tuple = field(default=())

    def __post_init__(self):
        x = np.atleast_2d(np.asarray(self.x, dtype=float))
        y = np.asarray(self.y, dtype=float).ravel()
        n, p = x.shape
        if self.family not in FAMILIES:
            raise DataError(f"unknown family {self.family!r}")
        if n < 1:
            raise DataError("need at least one observation")
        if y.shape[0] != n:
            raise DataError(f"response has {y.shape[0]} entries, design has {n} rows")
        if not (np.all(np.isfinite(x)) and np.all(np.isfinite(y))):
            raise DataError("design and response must be finite")
        if self.family == "binomial" and not np.all((y == 0) | (y == 1)):
            raise DataError("binomial responses must be 0 or 1")

        d = np.ones(n) if self.obs_weights is None else np.asarray(self.obs_weights, dtype=float).ravel()
        if d.shape[0] != n or not np.all(np.isfinite(d)) or np.any(d < 0):
            raise DataError("obs_weights must be n finite non-negative values")
        if d.sum() <= 0:
            raise DataError("obs_weights must not all be zero")
        if abs(d.sum() - n) > 1e-12 * n:  # already-scaled weights stay bit-identical
            d = d * (n / d.sum())

        w = np.ones(p) if self.pen_weights is None else np.asarray(self.pen_weights, dtype=float).ravel()
        if w.shape[0] != p or not np.all(np.isfinite(w)) or np.any(w < 0):
            raise DataError("pen_weights must be p finite non-negative values")

        names = tuple(self.names) if self.names else tuple(f"x{j + 1}" for j in range(p))
        if len(names) != p:
            raise DataError("names must have one entry per column")

        for k, v in (("x", x), ("y", y), ("obs_weights", d), ("pen_weights", w)):
            v.setflags(write=False)
            object.__setattr__(self, k, v)
        object.__setattr__(self, "names", names)

    @property
    def n(self) -> int:
        return self.x.shape[0]

    @property
    def p(self) -> int:
        return self.x.shape[1]

    def replace(self, **changes) -> "Dataset":
        kw = dict(x=self.x, y=self.y, family=self.family, obs_weights=self.obs_weights,
                  pen_weights=self.pen_weights, names=self.names)
        kw.update(changes)
        return Dataset(**kw)

    def subset(self, rows) -> "Dataset":
        rows = np.asarray(rows)
        return self.replace(x=self.x[rows], y=self.y[rows], obs_weights=self.obs_weights[rows])

    def __eq__(self, other):
        if not isinstance(other, Dataset):
            return NotImplemented
        return (self.family == other.family and self.names == other.names
                and all(np.array_equal(getattr(self, k), getattr(other, k))
                        for k in ("x", "y", "obs_weights", "pen_weights")))


@dataclass
class QuadModel:
    """Weighted least-squares form of the local quadratic approximation.

    ``L~(beta) = 0.5 * sum_i v_i (z_i - x_i'beta)**2 + const``.
    ``a`` holds the per-coordinate curvature and ``b`` the gradient of the
    loss at ``expansion_point``.
    """

    x: np.ndarray
    a: np.ndarray
    b: np.ndarray
    expansion_point: np.ndarray
    v: np.ndarray
    z: np.ndarray


def loss_eta(family, y, d, eta):
    """Loss as a function of the linear predictor ``eta``."""
    n = y.shape[0]
    if family == "gaussian":
        r = y - eta
        return 0.5 * np.dot(d, r * r) / n
    return np.dot(d, np.logaddexp(0.0, eta) - y * eta) / n


def mean_eta(family, eta):
    return eta if family == "gaussian" else expit(eta)


def loss_value(data: Dataset, beta) -> float:
    """Normalized weighted loss ``(1/n) sum d_i l_i(beta)``."""
    return float(loss_eta(data.family, data.y, data.obs_weights, data.x @ np.asarray(beta, dtype=float)))


def loss_grad(data: Dataset, beta) -> np.ndarray:
    eta = data.x @ np.asarray(beta, dtype=float)
    resid = mean_eta(data.family, eta) - data.y
    return data.x.T @ (data.obs_weights * resid) / data.n


def working_response(family, y, d, eta):
    """IRLS weights ``v`` and working response ``z`` at predictor ``eta``."""
    n = y.shape[0]
    if family == "gaussian":
        return d / n, y.copy()
    mu = expit(eta)
    h = np.maximum(mu * (1.0 - mu), WORKING_WEIGHT_FLOOR)
    return d * h / n, eta + (y - mu) / h


def quad_approx(data: Dataset, beta_tilde) -> QuadModel:
    """Second-order expansion of the loss at ``beta_tilde``.

    Exact for the gaussian family.  For the binomial family the working
    weight is floored at :data:`WORKING_WEIGHT_FLOOR`, which keeps the
    gradient exact and bounds the curvature away from zero.
    """
    beta_tilde = np.asarray(beta_tilde, dtype=float)
    eta = data.x @ beta_tilde
    v, z = working_response(data.family, data.y, data.obs_weights, eta)
    a = (data.x * data.x).T @ v
    b = -data.x.T @ (v * (z - eta))
    return QuadModel(x=data.x, a=a, b=b, expansion_point=beta_tilde.copy(), v=v, z=z)


def quad_value(quad: QuadModel, beta) -> float:
    """Evaluate the surrogate, up to the constant that makes it match at the expansion point."""
    r = quad.z - quad.x @ beta
    return 0.5 * float(np.dot(quad.v, r * r))
