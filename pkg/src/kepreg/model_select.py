"""K-fold cross-validation over a path grid."""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .errors import DataError
from .penalties import PenaltyKind, PenaltyParams
from .solvers import PathGrid, StandardizedDesign, cd_path, cell_params

__all__ = ["CvResult", "cross_validate", "fold_assignments"]


@dataclass(frozen=True)
class CvResult:
    """Per-cell validation error with the selected cell.

    ``cv_error`` maps non-skipped grid cells (l, k) to mean held-out MSE
    across folds; ``best_cell`` attains the minimum, with exact ties broken
    toward larger lambda and then larger alpha (more parsimony).
    """

    cv_error: dict[tuple[int, int], float]
    best_cell: tuple[int, int]
    fold_assignments: np.ndarray
    lambdas: np.ndarray
    alphas: np.ndarray
    kind: PenaltyKind

    @property
    def best_lambda(self) -> float:
        return float(self.lambdas[self.best_cell[0]])

    @property
    def best_alpha(self) -> float:
        return float(self.alphas[self.best_cell[1]])

    def best_params(self) -> PenaltyParams:
        return cell_params(self.kind, self.best_lambda, self.best_alpha)


def fold_assignments(n: int, folds: int, seed: int) -> np.ndarray:
    """Seeded fold labels with sizes differing by at most one."""
    if folds < 2:
        raise DataError(f"folds must be >= 2, got {folds!r}")
    if n < folds:
        raise DataError(f"need at least as many rows as folds, got n={n}, folds={folds}")
    perm = np.random.default_rng(seed).permutation(n)
    labels = np.empty(n, dtype=int)
    labels[perm] = np.arange(n) % folds
    return labels


def cross_validate(
    design: StandardizedDesign,
    grid: PathGrid,
    folds: int,
    seed: int,
    kind: PenaltyKind = PenaltyKind.KEP,
    tol: float = 1e-6,
    max_sweeps: int = 1000,
) -> CvResult:
    """Cross-validate a path fit over the grid.

    Standardization is recomputed inside each fold (no leakage); a fold
    whose held-in design develops a constant column falls back to zeroing
    that column with a warning.  Held-out predictions run on the raw scale,
    including the intercept implied by the held-in centering, and per-cell
    errors average over folds.  The split is fully determined by ``seed``.
    """
    labels = fold_assignments(design.n, folds, seed)
    X_raw = design.raw_X()
    y = design.y
    L, K = grid.shape
    err_sums: dict[tuple[int, int], float] = {}
    skipped: set[tuple[int, int]] = set()
    for f in range(folds):
        held_out = labels == f
        held_in = ~held_out
        fold_design = StandardizedDesign.from_raw(X_raw[held_in], y[held_in], on_degenerate="zero")
        path = cd_path(fold_design, grid, tol=tol, max_sweeps=max_sweeps, kind=kind)
        skipped = path.skipped_cells
        y_in_mean = float(np.mean(y[held_in]))
        X_out = X_raw[held_out]
        y_out = y[held_out]
        for cell, b_std in path.coefficients.items():
            b_raw = fold_design.coef_to_raw(b_std)
            intercept = y_in_mean - float(fold_design.col_means @ b_raw)
            resid = y_out - (X_out @ b_raw + intercept)
            err_sums[cell] = err_sums.get(cell, 0.0) + float(np.mean(resid * resid))
    cv_error = {cell: total / folds for cell, total in err_sums.items()}
    if not cv_error:
        raise DataError("every grid cell was skipped by the convexity guard")
    best = None
    for (li, ki), err in cv_error.items():
        lam = float(grid.lambdas[li])
        alpha = float(grid.alphas[ki])
        if best is None:
            best = (err, lam, alpha, (li, ki))
            continue
        b_err, b_lam, b_alpha, _ = best
        if err < b_err or (err == b_err and (lam, alpha) > (b_lam, b_alpha)):
            best = (err, lam, alpha, (li, ki))
    assert best is not None
    _verify_disjoint(cv_error, skipped)
    return CvResult(
        cv_error=cv_error,
        best_cell=best[3],
        fold_assignments=labels,
        lambdas=grid.lambdas,
        alphas=grid.alphas,
        kind=kind,
    )


def _verify_disjoint(cv_error: dict, skipped: set) -> None:
    overlap = set(cv_error) & skipped
    if overlap:
        raise AssertionError(f"skipped cells carry errors: {sorted(overlap)}")
