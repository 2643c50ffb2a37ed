"""Kinetic-energy-plus (KEP) penalty family and relatives.

The KEP penalty with strength ``eta > 0`` and curvature ``alpha > 0`` is

    Psi(|b|^q; eta, alpha) = (eta / alpha) * (sqrt(2 * alpha * |b|^q + 1) - 1),

the concave conjugate of a chi-square distance in an auxiliary weight
variable.  For ``alpha -> 0`` it behaves like ``eta * |b|^q``; tying
``eta`` to a fixed ``lam`` through the nesting map

    eta = (lam / 2) * (sqrt(1 + 2 * alpha) + 1)

and letting ``alpha -> inf`` recovers an l_{q/2}-type penalty.  The
module also provides the minimax-concave companion (MCP), obtained from
the mirrored chi-square distance, and the conjugate weight map used by
the reweighted solvers.

All evaluation routines accept scalars or numpy arrays and are pure
functions; they are safe under unrestricted concurrent use.
"""

from __future__ import annotations

import enum
import math
from dataclasses import dataclass

import numpy as np

from .errors import DomainError

__all__ = [
    "PenaltyKind",
    "PenaltyParams",
    "nesting_eta",
    "kep_penalty",
    "kep_penalty_derivative",
    "kep_penalty_second_derivative",
    "normalized_phi",
    "mcp_penalty",
    "conjugate_weights",
    "penalty_value",
]


class PenaltyKind(enum.Enum):
    """Penalty families every solver and operator dispatches on."""

    KEP = "kep"
    MCP = "mcp"
    L1 = "l1"
    LHALF = "lhalf"

    @classmethod
    def parse(cls, name: str) -> "PenaltyKind":
        aliases = {"lasso": "l1", "soft": "l1", "half": "lhalf"}
        key = name.strip().lower()
        key = aliases.get(key, key)
        for kind in cls:
            if kind.value == key:
                return kind
        raise DomainError(f"unknown penalty kind: {name!r}")


def nesting_eta(lam: float, alpha: float) -> float:
    """Strength implied by the nesting parameterization, (lam/2)(sqrt(1+2*alpha)+1)."""
    return 0.5 * lam * (math.sqrt(1.0 + 2.0 * alpha) + 1.0)


@dataclass(frozen=True)
class PenaltyParams:
    """Hyperparameter bundle (eta, alpha, q) for one penalty instance.

    ``lam`` is optional; when present, ``eta`` must equal the nesting map
    ``(lam/2)(sqrt(1+2*alpha)+1)`` to within 1e-12 relative error.  For the
    L1 and LHALF families ``eta`` plays the role of the plain tuning
    parameter lambda and ``alpha`` is ignored by the operators.
    """

    eta: float
    alpha: float
    q: int = 1
    lam: float | None = None

    def __post_init__(self) -> None:
        if not (math.isfinite(self.eta) and self.eta > 0.0):
            raise DomainError(f"eta must be positive and finite, got {self.eta!r}")
        if not (math.isfinite(self.alpha) and self.alpha > 0.0):
            raise DomainError(f"alpha must be positive and finite, got {self.alpha!r}")
        if self.q not in (1, 2):
            raise DomainError(f"q must be 1 or 2, got {self.q!r}")
        if self.lam is not None:
            if not (math.isfinite(self.lam) and self.lam > 0.0):
                raise DomainError(f"lam must be positive and finite, got {self.lam!r}")
            implied = nesting_eta(self.lam, self.alpha)
            if abs(self.eta - implied) > 1e-12 * max(abs(self.eta), abs(implied)):
                raise DomainError(
                    f"eta={self.eta!r} is inconsistent with the nesting map of "
                    f"lam={self.lam!r}, alpha={self.alpha!r} (expected {implied!r})"
                )

    @classmethod
    def with_nesting(cls, lam: float, alpha: float, q: int = 1) -> "PenaltyParams":
        """Build params with eta derived from (lam, alpha) through the nesting map."""
        return cls(eta=nesting_eta(lam, alpha), alpha=alpha, q=q, lam=lam)

    @classmethod
    def from_mcp_convention(cls, lam: float, gamma: float) -> "PenaltyParams":
        """Convert the (lambda, gamma) MCP convention: eta = lambda, 1/alpha = lambda*gamma."""
        if lam <= 0.0 or gamma <= 0.0:
            raise DomainError("lam and gamma must be positive")
        return cls(eta=lam, alpha=1.0 / (lam * gamma))


def _as_finite_array(b, name: str) -> np.ndarray:
    arr = np.asarray(b, dtype=float)
    if not np.all(np.isfinite(arr)):
        raise DomainError(f"{name} must be finite")
    return arr


def _maybe_scalar(value: np.ndarray, template) -> float | np.ndarray:
    if np.ndim(template) == 0:
        return float(value)
    return value


def kep_penalty(b, params: PenaltyParams):
    """Evaluate (eta/alpha)(sqrt(2*alpha*|b|^q + 1) - 1).

    Computed as ``eta * 2|b|^q / (sqrt(2*alpha*|b|^q + 1) + 1)``, which is
    algebraically identical but free of cancellation as alpha -> 0.
    """
    arr = _as_finite_array(b, "b")
    s = np.abs(arr) ** params.q
    return _maybe_scalar(2.0 * params.eta * s / (np.sqrt(2.0 * params.alpha * s + 1.0) + 1.0), b)


def kep_penalty_derivative(b, params: PenaltyParams):
    """Derivative eta * (1 + 2*alpha*b)^(-1/2) with respect to b >= 0 (q = 1 only).

    Positive, decreasing, and bounded above by eta.
    """
    if params.q != 1:
        raise DomainError("kep_penalty_derivative is defined for q = 1")
    arr = _as_finite_array(b, "b")
    if np.any(arr < 0.0):
        raise DomainError("b must be nonnegative")
    return _maybe_scalar(params.eta / np.sqrt(1.0 + 2.0 * params.alpha * arr), b)


def kep_penalty_second_derivative(b, params: PenaltyParams):
    """Second derivative -eta * alpha * (1 + 2*alpha*b)^(-3/2); minimized at b = 0."""
    if params.q != 1:
        raise DomainError("kep_penalty_second_derivative is defined for q = 1")
    arr = _as_finite_array(b, "b")
    if np.any(arr < 0.0):
        raise DomainError("b must be nonnegative")
    return _maybe_scalar(-params.eta * params.alpha * (1.0 + 2.0 * params.alpha * arr) ** -1.5, b)


def normalized_phi(b, alpha: float, q: int = 1):
    """Normalized penalty (sqrt(2*alpha*|b|^q + 1) - 1) / (sqrt(2*alpha + 1) - 1).

    Passes through (0, 0) and (1, 1) for every alpha; evaluated through the
    equivalent product form

        |b|^q * (sqrt(2*alpha + 1) + 1) / (sqrt(2*alpha*|b|^q + 1) + 1),

    which stays exact for arbitrarily small alpha (limit |b|^q) and recovers
    |b|^(q/2) as alpha grows.
    """
    if not (math.isfinite(alpha) and alpha > 0.0):
        raise DomainError(f"alpha must be positive and finite, got {alpha!r}")
    if q not in (1, 2):
        raise DomainError(f"q must be 1 or 2, got {q!r}")
    arr = _as_finite_array(b, "b")
    s = np.abs(arr) ** q
    num = math.sqrt(2.0 * alpha + 1.0) + 1.0
    return _maybe_scalar(s * num / (np.sqrt(2.0 * alpha * s + 1.0) + 1.0), b)


def mcp_penalty(s, params: PenaltyParams):
    """Evaluate eta * M(s) with M(s) = s - alpha*s^2/2 below 1/alpha, then 1/(2*alpha)."""
    arr = _as_finite_array(s, "s")
    if np.any(arr < 0.0):
        raise DomainError("s must be nonnegative")
    alpha = params.alpha
    m = np.where(arr >= 1.0 / alpha, 1.0 / (2.0 * alpha), arr - 0.5 * alpha * arr * arr)
    return _maybe_scalar(params.eta * m, s)


def conjugate_weights(b, params: PenaltyParams) -> np.ndarray:
    """Minimizing weights of the conjugate problem, eta * (2*alpha*|b_j|^q + 1)^(-1/2).

    Entries lie in (0, eta]; at b = 0 every weight equals eta.
    """
    arr = np.atleast_1d(_as_finite_array(b, "b"))
    s = np.abs(arr) ** params.q
    return params.eta / np.sqrt(2.0 * params.alpha * s + 1.0)


def penalty_value(b, params: PenaltyParams, kind: PenaltyKind) -> float:
    """Total penalty of a coefficient vector under the given family.

    L1 and LHALF interpret ``params.eta`` as the plain tuning parameter
    lambda multiplying |b| and |b|^(1/2) respectively.
    """
    arr = np.atleast_1d(_as_finite_array(b, "b"))
    absb = np.abs(arr)
    if kind is PenaltyKind.KEP:
        return float(np.sum(kep_penalty(absb, params)))
    if kind is PenaltyKind.MCP:
        if params.q != 1:
            raise DomainError("MCP penalty is defined for q = 1")
        return float(np.sum(mcp_penalty(absb, params)))
    if kind is PenaltyKind.L1:
        return float(params.eta * np.sum(absb))
    if kind is PenaltyKind.LHALF:
        return float(params.eta * np.sum(np.sqrt(absb)))
    raise DomainError(f"unsupported penalty kind: {kind!r}")
