"""Full-vector solvers for penalized least squares.

Three routes to the same family of objectives

    J(b) = 0.5 * ||y - X b||^2 + sum_j penalty(|b_j|):

* cyclic coordinate descent with exact scalar thresholds, single fit or
  warm-started over a whole (lambda, alpha) grid;
* the reweighted-l1 route (local linear approximation), solving a
  weighted lasso per outer step;
* the epsilon-scheduled iteratively reweighted l_q solver.

Coordinate updates assume columns standardized to mean zero and unit
Euclidean length; :class:`StandardizedDesign` performs and records that
transform.  Each solve call owns its state; distinct calls may run
concurrently, but the warm-start chain inside a path fit is sequential
by contract.
"""

from __future__ import annotations

import math
import warnings
from dataclasses import dataclass, field
from typing import Callable, NamedTuple

import numpy as np

from .errors import DataError, DomainError, NumericalError, RegimeError
from .penalties import PenaltyKind, PenaltyParams, conjugate_weights, penalty_value
from .prox import make_scalar_thresholder

__all__ = [
    "StandardizedDesign",
    "PathGrid",
    "PathSolution",
    "CdResult",
    "IrlsResult",
    "cell_params",
    "objective_value",
    "cd_single",
    "cd_path",
    "lla_solve",
    "irls_lq",
]

_GUARDED_KINDS = (PenaltyKind.KEP, PenaltyKind.MCP)


@dataclass(frozen=True)
class StandardizedDesign:
    """Column-standardized design with its back-transform record.

    ``X`` holds columns of mean zero and unit Euclidean length; ``col_means``
    and ``col_scales`` store each column's original mean and centered norm.
    Degenerate (constant) columns admitted through ``on_degenerate='zero'``
    are stored as all-zero with scale zero and always map back to a zero
    coefficient.
    """

    X: np.ndarray
    y: np.ndarray
    col_means: np.ndarray
    col_scales: np.ndarray

    @property
    def n(self) -> int:
        return self.X.shape[0]

    @property
    def p(self) -> int:
        return self.X.shape[1]

    @classmethod
    def from_raw(cls, X, y, on_degenerate: str = "raise") -> "StandardizedDesign":
        X = np.asarray(X, dtype=float)
        y = np.asarray(y, dtype=float)
        if X.ndim != 2:
            raise DataError(f"X must be 2-dimensional, got shape {X.shape}")
        n, _ = X.shape
        if n < 2:
            raise DataError("standardization needs at least 2 rows")
        if y.shape != (n,):
            raise DataError(f"y must have shape ({n},), got {y.shape}")
        if not (np.all(np.isfinite(X)) and np.all(np.isfinite(y))):
            raise DataError("X and y must be finite")
        means = X.mean(axis=0)
        centered = X - means
        scales = np.sqrt(np.sum(centered * centered, axis=0))
        tol = 1e-12 * np.maximum(1.0, np.abs(means) * math.sqrt(n))
        degenerate = scales <= tol
        if np.any(degenerate):
            cols = np.flatnonzero(degenerate).tolist()
            if on_degenerate == "raise":
                raise DataError(f"degenerate (constant) design columns: {cols}")
            if on_degenerate != "zero":
                raise DomainError(f"on_degenerate must be 'raise' or 'zero', got {on_degenerate!r}")
            warnings.warn(f"degenerate design columns excluded from fitting: {cols}", stacklevel=2)
        safe = np.where(degenerate, 1.0, scales)
        Xs = centered / safe
        Xs[:, degenerate] = 0.0
        out_scales = np.where(degenerate, 0.0, scales)
        return cls(X=Xs, y=y.copy(), col_means=means, col_scales=out_scales)

    def coef_to_raw(self, b: np.ndarray) -> np.ndarray:
        """Map standardized-scale coefficients back to the original column scale."""
        b = np.asarray(b, dtype=float)
        safe = np.where(self.col_scales > 0.0, self.col_scales, 1.0)
        return np.where(self.col_scales > 0.0, b / safe, 0.0)

    def raw_X(self) -> np.ndarray:
        """Reconstruct the raw design (degenerate columns reconstruct as their mean)."""
        return self.X * self.col_scales + self.col_means

    def verify(self, tol: float = 1e-10) -> None:
        active = self.col_scales > 0.0
        means = self.X[:, active].mean(axis=0)
        norms = np.sqrt(np.sum(self.X[:, active] ** 2, axis=0))
        if np.any(np.abs(means) > tol) or np.any(np.abs(norms - 1.0) > tol):
            raise AssertionError("standardization invariants violated")


@dataclass(frozen=True)
class PathGrid:
    """Increasing lambda grid paired with a decreasing alpha grid.

    The last alpha indexes the lasso end of each warm-start chain and must
    be small enough that its cells are numerically indistinguishable from
    the soft rule.
    """

    lambdas: np.ndarray
    alphas: np.ndarray

    def __post_init__(self) -> None:
        lambdas = np.asarray(self.lambdas, dtype=float)
        alphas = np.asarray(self.alphas, dtype=float)
        if lambdas.ndim != 1 or lambdas.size == 0 or np.any(lambdas <= 0.0):
            raise DomainError("lambdas must be a nonempty 1-d array of positive values")
        if np.any(np.diff(lambdas) <= 0.0):
            raise DomainError("lambdas must be strictly increasing")
        if alphas.ndim != 1 or alphas.size == 0 or np.any(alphas <= 0.0):
            raise DomainError("alphas must be a nonempty 1-d array of positive values")
        if np.any(np.diff(alphas) >= 0.0):
            raise DomainError("alphas must be strictly decreasing")
        object.__setattr__(self, "lambdas", lambdas)
        object.__setattr__(self, "alphas", alphas)

    @property
    def shape(self) -> tuple[int, int]:
        return self.lambdas.size, self.alphas.size

    @classmethod
    def default(
        cls,
        design: StandardizedDesign,
        n_lambdas: int = 50,
        n_alphas: int = 20,
        lambda_min_ratio: float = 1e-3,
        alpha_floor: float = 1e-8,
    ) -> "PathGrid":
        """Log-uniform lambdas below max_j |x_j'y|; alphas capped so the
        smallest lambda keeps eta * alpha < 1 along the whole alpha grid."""
        lam_max = float(np.max(np.abs(design.X.T @ design.y)))
        lam_max = max(lam_max, 1e-9)
        lambdas = np.geomspace(lambda_min_ratio * lam_max, lam_max, n_lambdas)
        alpha_cap = _alpha_cap(lambdas[0], alpha_floor)
        if alpha_cap <= alpha_floor * (1.0 + 1e-9) or n_alphas == 1:
            alphas = np.array([alpha_floor])
        else:
            alphas = np.geomspace(alpha_cap, alpha_floor, n_alphas)
        return cls(lambdas=lambdas, alphas=alphas)

    @classmethod
    def lasso_default(
        cls,
        design: StandardizedDesign,
        n_lambdas: int = 50,
        lambda_min_ratio: float = 1e-3,
        alpha_floor: float = 1e-8,
    ) -> "PathGrid":
        """One-dimensional lambda grid with the alpha axis pinned to the floor."""
        lam_max = float(np.max(np.abs(design.X.T @ design.y)))
        lam_max = max(lam_max, 1e-9)
        lambdas = np.geomspace(lambda_min_ratio * lam_max, lam_max, n_lambdas)
        return cls(lambdas=lambdas, alphas=np.array([alpha_floor]))


def _alpha_cap(lam_min: float, alpha_floor: float) -> float:
    """Largest alpha keeping the nesting-map eta * alpha below 1 at lam_min."""

    def excess(a: float) -> float:
        return 0.5 * lam_min * (math.sqrt(1.0 + 2.0 * a) + 1.0) * a - 1.0

    if excess(alpha_floor) >= 0.0:
        return alpha_floor
    lo, hi = alpha_floor, max(2.0 * alpha_floor, 1.0)
    for _ in range(200):
        if excess(hi) > 0.0:
            break
        lo = hi
        hi *= 4.0
    else:
        raise NumericalError("alpha cap search failed to bracket")
    for _ in range(200):
        mid = 0.5 * (lo + hi)
        if excess(mid) < 0.0:
            lo = mid
        else:
            hi = mid
    return lo


def cell_params(kind: PenaltyKind, lam: float, alpha: float) -> PenaltyParams:
    """Hyperparameters of one path cell.

    KEP cells derive eta from (lam, alpha) through the nesting map; MCP
    cells take eta = lam directly (MCP has no nesting parameterization);
    L1 and LHALF cells use lam as the plain tuning parameter.
    """
    if kind is PenaltyKind.KEP:
        return PenaltyParams.with_nesting(lam, alpha)
    return PenaltyParams(eta=lam, alpha=alpha)


def objective_value(
    X: np.ndarray, y: np.ndarray, b: np.ndarray, params: PenaltyParams, kind: PenaltyKind
) -> float:
    """0.5 * ||y - X b||^2 plus the total penalty."""
    r = y - X @ b
    return 0.5 * float(r @ r) + penalty_value(b, params, kind)


class CdResult(NamedTuple):
    coef: np.ndarray
    trace: list[float]
    converged: bool
    sweeps: int


def _cd_sweeps(
    X: np.ndarray,
    y: np.ndarray,
    b: np.ndarray,
    thresh: Callable[[float, int], float],
    tol: float,
    max_sweeps: int,
    objective: Callable[[np.ndarray], float] | None,
) -> CdResult:
    """Cyclic one-at-a-time updates on unit-norm columns.

    The full residual r = y - X b is maintained incrementally (O(n) per
    coordinate change) and refreshed periodically to shed accumulated
    drift.  Coordinates are visited in fixed ascending order, so runs are
    reproducible.  Columns with zero norm are pinned at zero.
    """
    Xf = np.asfortranarray(X)
    norms_sq = np.sum(Xf * Xf, axis=0)
    active = [j for j in range(Xf.shape[1]) if norms_sq[j] > 0.0]
    for j in range(Xf.shape[1]):
        if norms_sq[j] == 0.0:
            b[j] = 0.0
    r = y - Xf @ b
    trace: list[float] = []
    converged = False
    sweeps = 0
    for sweep in range(max_sweeps):
        if sweep and sweep % 64 == 0:
            r = y - Xf @ b
        max_step = 0.0
        for j in active:
            xj = Xf[:, j]
            bj = b[j]
            zj = float(xj @ r) + bj
            nb = thresh(zj, j)
            if nb != bj:
                r += xj * (bj - nb)
                b[j] = nb
                step = abs(nb - bj)
                if step > max_step:
                    max_step = step
        sweeps = sweep + 1
        if objective is not None:
            trace.append(objective(b))
        if max_step <= tol:
            converged = True
            break
    return CdResult(coef=b, trace=trace, converged=converged, sweeps=sweeps)


def _uniform(thresh: Callable[[float], float]) -> Callable[[float, int], float]:
    def wrapped(z: float, _j: int) -> float:
        return thresh(z)

    return wrapped


def _check_regime(kind: PenaltyKind, params: PenaltyParams) -> None:
    if kind in _GUARDED_KINDS and params.eta * params.alpha >= 1.0:
        raise RegimeError(
            f"eta * alpha = {params.eta * params.alpha:.6g} >= 1: the univariate maps are "
            "not strictly convex in this regime"
        )


def _prepare_init(design: StandardizedDesign, init) -> np.ndarray:
    if init is None:
        return np.zeros(design.p)
    b = np.array(init, dtype=float)
    if b.shape != (design.p,):
        raise DataError(f"init must have shape ({design.p},), got {b.shape}")
    if not np.all(np.isfinite(b)):
        raise DataError("init must be finite")
    return b


def cd_single(
    design: StandardizedDesign,
    params: PenaltyParams,
    kind: PenaltyKind = PenaltyKind.KEP,
    init=None,
    tol: float = 1e-6,
    max_sweeps: int = 1000,
) -> CdResult:
    """Coordinate descent at a single hyperparameter setting.

    Dispatches to the exact scalar threshold of the chosen family and
    iterates full sweeps until the largest coordinate move in a sweep is
    at most ``tol``.  The recorded per-sweep objective trace is
    nonincreasing, since every update is an exact univariate minimizer.
    KEP and MCP fits are rejected outside the strict-convexity regime.
    """
    _check_regime(kind, params)
    b = _prepare_init(design, init)
    thresh = _uniform(make_scalar_thresholder(kind, params))
    obj = lambda bv: objective_value(design.X, design.y, bv, params, kind)  # noqa: E731
    return _cd_sweeps(design.X, design.y, b, thresh, tol, max_sweeps, obj)


@dataclass
class PathSolution:
    """Coefficient vectors indexed over the (lambda, alpha) grid.

    Keys are 0-based ``(l, k)`` indices into ``lambdas`` (increasing) and
    ``alphas`` (decreasing).  Cells whose effective ``eta * alpha`` falls on
    or beyond the convexity guard are recorded in ``skipped_cells`` and hold
    no coefficients; cells that hit the sweep budget keep their best iterate
    and are listed in ``unconverged_cells``.
    """

    lambdas: np.ndarray
    alphas: np.ndarray
    kind: PenaltyKind
    coefficients: dict[tuple[int, int], np.ndarray] = field(default_factory=dict)
    objective_traces: dict[tuple[int, int], list[float]] | None = None
    skipped_cells: set[tuple[int, int]] = field(default_factory=set)
    unconverged_cells: set[tuple[int, int]] = field(default_factory=set)

    def coef(self, l: int, k: int) -> np.ndarray:
        return self.coefficients[(l, k)]

    def cells(self):
        return sorted(self.coefficients.keys())


def cd_path(
    design: StandardizedDesign,
    grid: PathGrid,
    tol: float = 1e-6,
    max_sweeps: int = 1000,
    kind: PenaltyKind = PenaltyKind.KEP,
    record_traces: bool = False,
) -> PathSolution:
    """Warm-started coordinate descent over the whole (lambda, alpha) grid.

    Lambdas are visited from largest to smallest; within each lambda the
    alphas run from the lasso end (smallest) upward, warm-starting every
    cell from its predecessor.  The chain for the next lambda starts from
    the current lambda's lasso-end solution (all zeros above the largest
    lambda).  Cells with eta * alpha >= 1 are skipped, preserving the
    running warm start.
    """
    L, K = grid.shape
    sol = PathSolution(
        lambdas=grid.lambdas,
        alphas=grid.alphas,
        kind=kind,
        objective_traces={} if record_traces else None,
    )
    chain = np.zeros(design.p)
    for li in range(L - 1, -1, -1):
        lam = float(grid.lambdas[li])
        b = chain.copy()
        next_chain = None
        for ki in range(K - 1, -1, -1):
            alpha = float(grid.alphas[ki])
            params = cell_params(kind, lam, alpha)
            if kind in _GUARDED_KINDS and params.eta * alpha >= 1.0:
                sol.skipped_cells.add((li, ki))
                continue
            thresh = _uniform(make_scalar_thresholder(kind, params))
            obj = None
            if record_traces:
                obj = lambda bv, pp=params: objective_value(design.X, design.y, bv, pp, kind)
            res = _cd_sweeps(design.X, design.y, b, thresh, tol, max_sweeps, obj)
            b = res.coef
            sol.coefficients[(li, ki)] = b.copy()
            if record_traces and sol.objective_traces is not None:
                sol.objective_traces[(li, ki)] = res.trace
            if not res.converged:
                sol.unconverged_cells.add((li, ki))
            if ki == K - 1:
                next_chain = b.copy()
        if next_chain is not None:
            chain = next_chain
    return sol


def lla_solve(
    design: StandardizedDesign,
    params: PenaltyParams,
    init=None,
    inner_tol: float = 1e-8,
    outer_tol: float = 1e-6,
    max_outer: int = 100,
    inner_max_sweeps: int = 1000,
    return_history: bool = False,
):
    """Reweighted-l1 solver for the KEP objective (eta * alpha < 1).

    Each outer step linearizes the penalty at the current iterate, giving
    per-coordinate weights w_j = eta / sqrt(1 + 2 * alpha * |b_j|) (the
    conjugate weight map), and solves the weighted lasso by coordinate
    descent with soft thresholds.  Stops when the outer iterate moves by
    at most ``outer_tol`` in the sup norm.

    With ``return_history=True`` also returns the list of outer iterates,
    starting from the initial vector.
    """
    _check_regime(PenaltyKind.KEP, params)
    if params.q != 1:
        raise DomainError("lla_solve is defined for q = 1")
    b = _prepare_init(design, init)
    history = [b.copy()]
    for _ in range(max_outer):
        w = conjugate_weights(b, params)

        def thresh(z: float, j: int, w=w) -> float:
            az = abs(z) - w[j]
            return math.copysign(az, z) if az > 0.0 else 0.0

        prev = b.copy()
        res = _cd_sweeps(design.X, design.y, b, thresh, inner_tol, inner_max_sweeps, None)
        b = res.coef
        history.append(b.copy())
        if float(np.max(np.abs(b - prev))) <= outer_tol:
            break
    if return_history:
        return b, history
    return b


class IrlsResult(NamedTuple):
    coef: np.ndarray
    epsilons: list[float]
    iterations: int
    converged: bool


def irls_lq(
    design: StandardizedDesign,
    lam: float,
    q: int = 2,
    sparsity_index: int | None = None,
    tol: float = 1e-6,
    max_iter: int = 500,
    eps0: float = 1.0,
    inner_max_sweeps: int = 200,
) -> IrlsResult:
    """Iteratively reweighted l_q solver with the order-statistic epsilon rule.

    Alternates (a) a coefficient update against fixed weights -- an exact
    weighted-ridge solve for q = 2 (p-by-p or n-by-n system, whichever is
    smaller) or a weighted-lasso coordinate descent with soft thresholds at
    lam * w_j / 2 for q = 1 -- then (b) the epsilon update
    eps <- min(eps, r_{k+1}(b) / p) where r_i(b) is the i-th largest
    |b_j|, and (c) the weight update w_j = 1 / sqrt(|b_j|^q + eps^2).
    Epsilon is nonincreasing by construction; if it reaches exactly zero
    the iterate is k-sparse and the solve stops there.
    """
    if q not in (1, 2):
        raise DomainError(f"q must be 1 or 2, got {q!r}")
    if not (math.isfinite(lam) and lam > 0.0):
        raise DomainError(f"lam must be positive and finite, got {lam!r}")
    if not (math.isfinite(eps0) and eps0 > 0.0):
        raise DomainError(f"eps0 must be positive and finite, got {eps0!r}")
    n, p = design.n, design.p
    k = sparsity_index if sparsity_index is not None else max(1, math.ceil(p / 10))
    if not 1 <= k < p:
        raise DomainError(f"sparsity_index must satisfy 1 <= k < p, got {k!r}")
    X = design.X
    y = design.y
    eps = float(eps0)
    b = np.zeros(p)
    w = np.full(p, 1.0 / eps)
    epsilons = [eps]
    converged = False
    gram = X.T @ X if p <= n else None
    xty = X.T @ y
    iterations = 0
    for it in range(max_iter):
        iterations = it + 1
        prev = b.copy()
        if q == 2:
            try:
                if gram is not None:
                    b = np.linalg.solve(gram + lam * np.diag(w), xty)
                else:
                    d = lam * w
                    M = X @ (X.T / d[:, None]) + np.eye(n)
                    b = (X.T @ np.linalg.solve(M, y)) / d
            except np.linalg.LinAlgError as exc:
                raise NumericalError(f"weighted ridge system is singular: {exc}") from exc
        else:

            def thresh(z: float, j: int, w=w) -> float:
                az = abs(z) - 0.5 * lam * w[j]
                return math.copysign(az, z) if az > 0.0 else 0.0

            b = _cd_sweeps(X, y, b, thresh, tol, inner_max_sweeps, None).coef
        order_stat = float(np.sort(np.abs(b))[::-1][k])
        eps = min(eps, order_stat / p)
        epsilons.append(eps)
        if eps == 0.0:
            converged = True
            break
        w = 1.0 / np.sqrt(np.abs(b) ** q + eps * eps)
        if float(np.max(np.abs(b - prev))) <= tol:
            converged = True
            break
    return IrlsResult(coef=b, epsilons=epsilons, iterations=iterations, converged=converged)
