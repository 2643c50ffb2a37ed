"""Exact scalar thresholding operators.

Each operator returns the global minimizer of the univariate problem

    J1(b) = 0.5 * (z - b)^2 + penalty(|b|),

sending a dead zone of small |z| exactly to zero.  The KEP rule solves a
depressed cubic through its cosine formula; the phase transition at
``eta * alpha = 1`` separates a continuous rule from a discontinuous one.
In the discontinuous regime the dead zone ends where the nonzero branch
ties with zero on the objective, and the operator additionally compares
the closed-form candidate against zero so rounding near the tie can never
return the wrong side.  A brute-force grid oracle over the same objective
is provided as ground truth for tests.

All operators are pure functions and safe to call concurrently.
"""

from __future__ import annotations

import enum
import math
from dataclasses import dataclass
from typing import Callable

import numpy as np

from .errors import DomainError, NumericalError
from .penalties import PenaltyKind, PenaltyParams, kep_penalty, mcp_penalty

__all__ = [
    "Regime",
    "ThresholdDecision",
    "UnivariateProblem",
    "phi",
    "phi_sq_lipschitz_bound",
    "kep_threshold",
    "kep_threshold_point",
    "mcp_threshold",
    "soft_threshold",
    "half_threshold",
    "half_threshold_point",
    "oracle_threshold",
    "make_scalar_thresholder",
]

# arccos arguments may overshoot [-1, 1] by a few ulps; anything beyond this
# tolerance signals a caller bug rather than roundoff.
_CLAMP_TOL = 1e-12


class Regime(enum.Enum):
    """Continuity regime of a thresholding rule: continuous iff eta*alpha <= 1."""

    CONTINUOUS = "continuous"
    DISCONTINUOUS = "discontinuous"


@dataclass(frozen=True)
class ThresholdDecision:
    """Scalar threshold output: the estimate plus regime metadata.

    ``threshold_point`` is the |z| at and below which the estimate is zero,
    and the estimate never exceeds |z| in magnitude or flips its sign.
    """

    estimate: float
    threshold_point: float
    regime: Regime


@dataclass(frozen=True)
class UnivariateProblem:
    """One scalar least-squares target z together with its penalty."""

    z: float
    params: PenaltyParams
    kind: PenaltyKind


def _acos_clamped(x: float) -> float:
    if x > 1.0 + _CLAMP_TOL or x < -1.0 - _CLAMP_TOL:
        raise NumericalError(f"arccos argument {x!r} escapes [-1, 1] beyond clamp tolerance")
    return math.acos(min(1.0, max(-1.0, x)))


def phi(u, t: float):
    """Largest-root factor of the threshold cubic,

        phi(u) = 2 * sqrt((u+1)/3) * cos(arccos(-t * ((u+1)/3)^(-3/2)) / 3),

    defined for u >= 3*t^(2/3) - 1.  For t = alpha*eta and u = 2*alpha*|z|
    the nonzero KEP estimate is (phi(u)^2 - 1) / (2*alpha); phi(2t) = 1 for
    t in [0, 1], which pins the estimate to zero at |z| = eta.
    """
    if not (math.isfinite(t) and t >= 0.0):
        raise DomainError(f"t must be nonnegative and finite, got {t!r}")
    u_arr = np.asarray(u, dtype=float)
    w = (u_arr + 1.0) / 3.0
    if t == 0.0:
        arg = np.zeros_like(w)
    else:
        arg = -t * w**-1.5
    if np.any(arg < -1.0 - _CLAMP_TOL) or np.any(arg > 1.0 + _CLAMP_TOL):
        raise NumericalError("phi evaluated outside its domain u >= 3*t^(2/3) - 1")
    val = 2.0 * np.sqrt(w) * np.cos(np.arccos(np.clip(arg, -1.0, 1.0)) / 3.0)
    if np.ndim(u) == 0:
        return float(val)
    return val


def phi_sq_lipschitz_bound(t: float) -> float:
    """Upper bound on |d(phi^2)/du| over [2t, inf) for 0 < t < 1:

        4/3 + (2/3) / sqrt(t^(-2) * ((2t+1)/3)^3 - 1).
    """
    if not 0.0 < t < 1.0:
        raise DomainError(f"the bound requires 0 < t < 1, got {t!r}")
    inner = ((2.0 * t + 1.0) / 3.0) ** 3 / (t * t) - 1.0
    return 4.0 / 3.0 + (2.0 / 3.0) / math.sqrt(inner)


def _jump_root_v(t: float) -> float:
    """Positive root of v*(v+1)^2 = 4*t (strictly increasing LHS), via Newton.

    The start point max(1, (4t)^(1/3)) lies at or above the root, where the
    convex increasing cubic makes Newton monotone.
    """
    c = 4.0 * t
    v = max(1.0, c ** (1.0 / 3.0))
    for _ in range(80):
        f = ((v + 2.0) * v + 1.0) * v - c
        fp = (3.0 * v + 4.0) * v + 1.0
        step = f / fp
        v -= step
        if abs(step) <= 1e-15 * v:
            break
    return v


def kep_threshold_point(eta: float, alpha: float) -> tuple[float, Regime]:
    """Dead-zone boundary of the KEP rule and its continuity regime.

    For eta*alpha <= 1 the rule is continuous and the boundary is eta.  For
    eta*alpha > 1 the rule jumps; the boundary is where the nonzero branch
    ties with zero on the objective, obtained in closed form from the
    positive root v of v*(v+1)^2 = 4*eta*alpha as

        z* = s* + eta / v,   s* = (v^2 - 1) / (2*alpha).
    """
    t = eta * alpha
    if t <= 1.0:
        return eta, Regime.CONTINUOUS
    v = _jump_root_v(t)
    s_jump = (v * v - 1.0) / (2.0 * alpha)
    return s_jump + eta / v, Regime.DISCONTINUOUS


def _kep_scalar(z: float, eta: float, alpha: float, t: float, point: float, discont: bool) -> float:
    az = abs(z)
    if az <= point:
        return 0.0
    w = (2.0 * alpha * az + 1.0) / 3.0
    theta = _acos_clamped(-t * w**-1.5) / 3.0
    c = math.cos(theta)
    b = (4.0 * w * c * c - 1.0) / (2.0 * alpha)
    if discont:
        # Rounding near the tie can favor the wrong side; decide on the objective.
        pen = 2.0 * eta * b / (math.sqrt(2.0 * alpha * b + 1.0) + 1.0)
        if 0.5 * (az - b) ** 2 + pen >= 0.5 * az * az:
            return 0.0
    return math.copysign(b, z)


def kep_threshold(z: float, params: PenaltyParams) -> ThresholdDecision:
    """Exact KEP thresholding rule (q = 1).

    Below the threshold point the estimate is zero; beyond it the estimate
    is sgn(z) * (phi(2*alpha*|z|)^2 - 1) / (2*alpha), the largest real root
    of the stationarity cubic selected by the cosine branch.  Continuous in
    z iff eta*alpha <= 1.
    """
    if params.q != 1:
        raise DomainError("kep_threshold is defined for q = 1")
    if not math.isfinite(z):
        raise DomainError(f"z must be finite, got {z!r}")
    eta, alpha = params.eta, params.alpha
    t = eta * alpha
    point, regime = kep_threshold_point(eta, alpha)
    est = _kep_scalar(float(z), eta, alpha, t, point, regime is Regime.DISCONTINUOUS)
    return ThresholdDecision(estimate=est, threshold_point=point, regime=regime)


def mcp_threshold(z: float, params: PenaltyParams) -> ThresholdDecision:
    """Exact MCP thresholding rule.

    For eta*alpha < 1: zero up to eta, then sgn(z)(|z|-eta)/(1-alpha*eta) up
    to 1/alpha, then identity.  For eta*alpha >= 1 the rule is a hard
    threshold between zero and z; the cut sits where both tie on the
    objective, |z| = sqrt(eta/alpha), with the tie itself mapping to zero.
    """
    if not math.isfinite(z):
        raise DomainError(f"z must be finite, got {z!r}")
    eta, alpha = params.eta, params.alpha
    t = eta * alpha
    az = abs(z)
    if t < 1.0:
        point, regime = eta, Regime.CONTINUOUS
        if az <= eta:
            est = 0.0
        elif az <= 1.0 / alpha:
            est = math.copysign((az - eta) / (1.0 - t), z)
        else:
            est = float(z)
    else:
        point, regime = math.sqrt(eta / alpha), Regime.DISCONTINUOUS
        est = 0.0 if az <= point else float(z)
    return ThresholdDecision(estimate=est, threshold_point=point, regime=regime)


def soft_threshold(z, lam: float):
    """Soft thresholding sgn(z) * max(|z| - lam, 0)."""
    if not (math.isfinite(lam) and lam > 0.0):
        raise DomainError(f"lam must be positive and finite, got {lam!r}")
    arr = np.asarray(z, dtype=float)
    val = np.sign(arr) * np.maximum(np.abs(arr) - lam, 0.0)
    if np.ndim(z) == 0:
        return float(val)
    return val


def half_threshold_point(lam: float) -> float:
    """Dead-zone boundary of the half rule, (3/2) * lam^(2/3).

    This is where the nonzero stationary branch of
    0.5*(z-b)^2 + lam*|b|^(1/2) ties with zero on the objective; the branch
    itself already exists from 3*(lam/4)^(2/3) upward but loses to zero on
    the intervening band.
    """
    if not (math.isfinite(lam) and lam > 0.0):
        raise DomainError(f"lam must be positive and finite, got {lam!r}")
    return 1.5 * lam ** (2.0 / 3.0)


def _half_scalar(z: float, lam: float, point: float) -> float:
    az = abs(z)
    if az <= point:
        return 0.0
    theta = _acos_clamped(-0.25 * lam * (3.0 / az) ** 1.5) / 3.0
    c = math.cos(theta)
    return math.copysign(4.0 * az * c * c / 3.0, z)


def half_threshold(z: float, lam: float) -> float:
    """Exact half thresholding rule for the penalty lam * |b|^(1/2).

    Zero up to (3/2)*lam^(2/3); beyond it,
    sgn(z) * (4|z|/3) * cos^2(arccos(-(lam/4)(3/|z|)^(3/2)) / 3).
    """
    if not math.isfinite(z):
        raise DomainError(f"z must be finite, got {z!r}")
    return _half_scalar(float(z), lam, half_threshold_point(lam))


def _penalty_on_grid(absb: np.ndarray, params: PenaltyParams, kind: PenaltyKind) -> np.ndarray:
    """Penalty along a known-nonnegative magnitude grid, minimizing array passes."""
    if kind is PenaltyKind.KEP:
        s = absb if params.q == 1 else absb * absb
        den = 2.0 * params.alpha * s
        den += 1.0
        np.sqrt(den, out=den)
        den += 1.0
        return 2.0 * params.eta * s / den
    if kind is PenaltyKind.MCP:
        return mcp_penalty(absb, params)
    if kind is PenaltyKind.L1:
        return params.eta * absb
    if kind is PenaltyKind.LHALF:
        return params.eta * np.sqrt(absb)
    raise DomainError(f"unsupported penalty kind: {kind!r}")


def univariate_objective(b, problem: UnivariateProblem):
    """J1(b) = 0.5*(z - b)^2 + penalty(|b|) for the problem's penalty family."""
    arr = np.asarray(b, dtype=float)
    val = 0.5 * (problem.z - arr) ** 2 + _penalty_on_grid(np.abs(arr), problem.params, problem.kind)
    if np.ndim(b) == 0:
        return float(val)
    return val


def oracle_threshold(problem: UnivariateProblem, step: float) -> float:
    """Brute-force grid argmin of J1 over [-|z|, |z|] at the given resolution.

    The minimizer always satisfies |b| <= |z|, so the grid interval is
    exhaustive; b = 0 is an explicit grid point and wins exact ties.  For
    z > 0 the mirrored half is dominated pointwise (J1(-b) - J1(b) = 2zb),
    so only the half carrying the sign of z is evaluated.
    """
    z = problem.z
    if not math.isfinite(z):
        raise DomainError(f"z must be finite, got {z!r}")
    if not (math.isfinite(step) and step > 0.0):
        raise DomainError(f"step must be positive, got {step!r}")
    if z == 0.0:
        return 0.0
    az = abs(z)
    if step > az / 10.0:
        raise DomainError(f"step {step!r} is too coarse for |z| = {az!r}")
    grid = np.arange(math.floor(az / step) + 1, dtype=float)
    grid *= step
    if grid[-1] < az:
        grid = np.append(grid, az)
    j = az - grid
    j *= j
    j *= 0.5
    j += _penalty_on_grid(grid, problem.params, problem.kind)
    best = int(np.argmin(j))  # first minimum, so exact ties resolve to smaller |b|
    return math.copysign(grid[best], z)


def make_scalar_thresholder(kind: PenaltyKind, params: PenaltyParams) -> Callable[[float], float]:
    """Precompiled scalar threshold map for hot coordinate-descent loops.

    Regime constants (dead zone, cubic parameters) are resolved once per
    (kind, params) so per-coordinate calls stay branch-light.
    """
    eta, alpha = params.eta, params.alpha
    if kind is PenaltyKind.KEP:
        if params.q != 1:
            raise DomainError("coordinate updates require q = 1")
        t = eta * alpha
        point, regime = kep_threshold_point(eta, alpha)
        discont = regime is Regime.DISCONTINUOUS

        def _kep(z: float) -> float:
            return _kep_scalar(z, eta, alpha, t, point, discont)

        return _kep
    if kind is PenaltyKind.MCP:
        t = eta * alpha
        if t < 1.0:
            inv_alpha = 1.0 / alpha
            shrink = 1.0 / (1.0 - t)

            def _mcp(z: float) -> float:
                az = abs(z)
                if az <= eta:
                    return 0.0
                if az <= inv_alpha:
                    return math.copysign((az - eta) * shrink, z)
                return z

            return _mcp
        cut = math.sqrt(eta / alpha)

        def _mcp_hard(z: float) -> float:
            return 0.0 if abs(z) <= cut else z

        return _mcp_hard
    if kind is PenaltyKind.L1:

        def _soft(z: float) -> float:
            az = abs(z) - eta
            return math.copysign(az, z) if az > 0.0 else 0.0

        return _soft
    if kind is PenaltyKind.LHALF:
        point = half_threshold_point(eta)

        def _half(z: float) -> float:
            return _half_scalar(z, eta, point)

        return _half
    raise DomainError(f"unsupported penalty kind: {kind!r}")
