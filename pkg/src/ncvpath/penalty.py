"""Non-convex penalties built from a non-increasing marginal cost.

Every penalty here is written as the integral of its gradient,
``J(t) = int_0^t grad(s) ds``, and split as ``J(|t|) = kappa*|t| + D(t)``
where ``kappa`` is the slope at the origin and ``D`` is concave.  The
sparse ridge penalty grows quadratically in its tail, so its convex
``gamma*t**2/2`` piece is reported separately by :func:`convex_quadratic`
and excluded from ``D``.

All functions accept scalars or numpy arrays for ``t``.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

KINDS = ("lasso", "scad", "mcp", "tlp", "classo", "sridge", "mlog", "mbridge")


class PenaltyDomainError(ValueError):
    """Raised when penalty parameters fall outside their admissible range."""


@dataclass(frozen=True)
class PenaltySpec:
    """A penalty family member.

    Parameters
    ----------
    kind : str
        One of :data:`KINDS`.
    lam : float
        Regularization level, must be positive.
    tau : float
        Concave scale.  ``scad`` needs ``tau > 2``; ``mcp``, ``classo`` and
        ``sridge`` need ``tau > 1``; the rest need ``tau > 0``.  Ignored by
        ``lasso``.
    gamma : float
        Secondary scale used by ``classo`` (``0 <= gamma <= lam``) and
        ``sridge`` (``gamma >= 0``).
    """

    kind: str
    lam: float = 1.0
    tau: float = 3.7
    gamma: float = 0.0

    def __post_init__(self):
        validate(self.kind, self.lam, self.tau, self.gamma)

    def with_lambda(self, lam: float) -> "PenaltySpec":
        """Same penalty at a different regularization level.

        For ``classo`` the secondary scale is capped at the new ``lam`` so
        the penalty stays admissible down a path.
        """
        lam = float(lam)
        gamma = min(self.gamma, lam) if self.kind == "classo" else self.gamma
        return PenaltySpec(self.kind, lam, self.tau, gamma)


def validate(kind, lam, tau, gamma=0.0):
    if kind not in KINDS:
        raise PenaltyDomainError(f"unknown penalty kind {kind!r}; expected one of {', '.join(KINDS)}")
    for name, val in (("lambda", lam), ("tau", tau), ("gamma", gamma)):
        if not np.isfinite(val):
            raise PenaltyDomainError(f"{name} must be finite")
    if lam <= 0:
        raise PenaltyDomainError("lambda must be > 0")
    if kind == "scad" and tau <= 2:
        raise PenaltyDomainError("scad requires tau > 2")
    if kind in ("mcp", "classo", "sridge") and tau <= 1:
        raise PenaltyDomainError(f"{kind} requires tau > 1")
    if kind in ("tlp", "mlog", "mbridge") and tau <= 0:
        raise PenaltyDomainError(f"{kind} requires tau > 0")
    if kind == "classo" and not (0 <= gamma <= lam):
        raise PenaltyDomainError("classo requires 0 <= gamma <= lambda")
    if kind == "sridge" and gamma < 0:
        raise PenaltyDomainError("sridge requires gamma >= 0")


def kappa(pen: PenaltySpec) -> float:
    """Right-hand slope of the penalty at the origin."""
    if pen.kind == "mlog":
        return pen.lam / pen.tau
    if pen.kind == "mbridge":
        return pen.lam / (2.0 * np.sqrt(pen.tau))
    return pen.lam


def lambda_for_kappa(kind: str, k: float, tau: float = 3.7) -> float:
    """Invert :func:`kappa`: the ``lam`` whose origin slope equals ``k``."""
    if kind == "mlog":
        return k * tau
    if kind == "mbridge":
        return k * 2.0 * np.sqrt(tau)
    return k


def breakpoints(pen: PenaltySpec) -> tuple:
    """Points where the gradient formula switches branch."""
    lam, tau, g = pen.lam, pen.tau, pen.gamma
    return {
        "lasso": (),
        "scad": (lam, tau * lam),
        "mcp": (tau * lam,),
        "tlp": (tau,),
        "classo": (tau * (lam - g),),
        "sridge": (tau * lam / (tau * g + 1.0),),
        "mlog": (tau,),
        "mbridge": (tau,),
    }[pen.kind]


def grad_penalty(pen: PenaltySpec, t):
    """Marginal penalty ``grad J(t)`` for ``t >= 0``; equals ``kappa`` at 0."""
    t = np.asarray(t, dtype=float)
    lam, tau, g = pen.lam, pen.tau, pen.gamma
    kind = pen.kind
    if kind == "lasso":
        out = np.full_like(t, lam)
    elif kind == "scad":
        out = np.where(t < lam, lam, np.where(t < tau * lam, (tau * lam - t) / (tau - 1.0), 0.0))
    elif kind == "mcp":
        out = np.where(t < tau * lam, lam - t / tau, 0.0)
    elif kind == "tlp":
        out = np.where(t < tau, lam, 0.0)
    elif kind == "classo":
        out = np.where(t < tau * (lam - g), lam - t / tau, g)
    elif kind == "sridge":
        out = np.where(t < tau * lam / (tau * g + 1.0), lam - t / tau, g * t)
    elif kind == "mlog":
        out = np.where(t < tau, lam / tau, lam / np.maximum(t, tau))
    else:  # mbridge
        out = np.where(t < tau, lam / (2.0 * np.sqrt(tau)), lam / (2.0 * np.sqrt(np.maximum(t, tau))))
    return out if out.ndim else float(out)


def penalty_value(pen: PenaltySpec, t):
    """Closed-form ``J(t)`` for ``t >= 0``."""
    t = np.asarray(t, dtype=float)
    lam, tau, g = pen.lam, pen.tau, pen.gamma
    kind = pen.kind
    if kind == "lasso":
        out = lam * t
    elif kind == "scad":
        mid = (2.0 * tau * lam * t - t * t - lam * lam) / (2.0 * (tau - 1.0))
        out = np.where(t < lam, lam * t, np.where(t < tau * lam, mid, lam * lam * (tau + 1.0) / 2.0))
    elif kind == "mcp":
        out = np.where(t < tau * lam, lam * t - t * t / (2.0 * tau), tau * lam * lam / 2.0)
    elif kind == "tlp":
        out = lam * np.minimum(t, tau)
    elif kind == "classo":
        b = tau * (lam - g)
        jb = lam * b - b * b / (2.0 * tau)
        out = np.where(t < b, lam * t - t * t / (2.0 * tau), jb + g * (t - b))
    elif kind == "sridge":
        b = tau * lam / (tau * g + 1.0)
        jb = lam * b - b * b / (2.0 * tau)
        out = np.where(t < b, lam * t - t * t / (2.0 * tau), jb + g * (t * t - b * b) / 2.0)
    elif kind == "mlog":
        out = np.where(t < tau, lam * t / tau, lam + lam * np.log(np.maximum(t, tau) / tau))
    else:  # mbridge
        rt = np.sqrt(tau)
        out = np.where(t < tau, lam * t / (2.0 * rt), lam * rt / 2.0 + lam * (np.sqrt(np.maximum(t, tau)) - rt))
    return out if out.ndim else float(out)


def convex_quadratic(pen: PenaltySpec) -> float:
    """Coefficient ``c`` of the convex ``c*t**2`` term kept out of ``D``.

    Zero for every kind except ``sridge``, whose tail ``gamma*t`` gradient
    makes ``J - kappa*|t|`` convex there.
    """
    return pen.gamma / 2.0 if pen.kind == "sridge" else 0.0


def d_subgrad(pen: PenaltySpec, t):
    """Slope of the concave remainder ``D`` at ``t`` (0 selected at the origin).

    ``D(t) = J(|t|) - kappa*|t| - c*t**2`` with ``c = convex_quadratic(pen)``,
    so the value is ``sign(t) * (grad(|t|) - kappa) - 2*c*t``.
    """
    t = np.asarray(t, dtype=float)
    a = np.abs(t)
    out = np.sign(t) * (grad_penalty(pen, a) - kappa(pen)) - 2.0 * convex_quadratic(pen) * t
    out = np.where(t == 0, 0.0, out)
    return out if out.ndim else float(out)


def concave_part(pen: PenaltySpec, t):
    """The concave remainder ``D(t)`` itself."""
    t = np.asarray(t, dtype=float)
    a = np.abs(t)
    out = penalty_value(pen, a) - kappa(pen) * a - convex_quadratic(pen) * t * t
    return out if out.ndim else float(out)
