"""Synthetic regression data with AR(1)-correlated gaussian covariates."""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np
from scipy.special import expit

from .loss import FAMILIES, Dataset


@dataclass(frozen=True)
class SimSpec:
    """Simulation design.

    Rows are ``N(0, Sigma)`` with ``Sigma[j, k] = rho**|j-k|``.  The true
    coefficients are ``1/j`` unless ``beta`` is given.  Randomness comes
    from numpy's PCG64 generator seeded with ``seed``.
    """

    n: int
    p: int
    rho: float = 0.5
    family: str = "gaussian"
    beta: tuple | None = None
    seed: int = 0

    def __post_init__(self):
        if self.n < 1 or self.p < 1:
            raise ValueError("n and p must be >= 1")
        if not -1.0 < self.rho < 1.0:
            raise ValueError("rho must lie in (-1, 1)")
        if self.family not in FAMILIES:
            raise ValueError(f"unknown family {self.family!r}")
        if self.beta is not None and len(self.beta) != self.p:
            raise ValueError("beta must have p entries")

    def true_beta(self) -> np.ndarray:
        if self.beta is not None:
            return np.asarray(self.beta, dtype=float)
        return 1.0 / np.arange(1, self.p + 1)


def ar1_design(n, p, rho, rng):
    z = rng.standard_normal((n, p))
    x = np.empty_like(z)
    x[:, 0] = z[:, 0]
    c = np.sqrt(1.0 - rho * rho)
    for j in range(1, p):
        x[:, j] = rho * x[:, j - 1] + c * z[:, j]
    return x


def generate(spec: SimSpec) -> Dataset:
    rng = np.random.Generator(np.random.PCG64(spec.seed))
    x = ar1_design(spec.n, spec.p, spec.rho, rng)
    eta = x @ spec.true_beta()
    if spec.family == "gaussian":
        y = eta + rng.standard_normal(spec.n)
    else:
        y = (rng.random(spec.n) < expit(eta)).astype(float)
    return Dataset(x, y, family=spec.family)
