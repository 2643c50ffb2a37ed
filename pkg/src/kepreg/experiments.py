"""Simulation and benchmark harness.

Generates the autoregressive sparse-regression benchmark, fits competing
penalties either on a fixed hyperparameter schedule or with cross-validated
hyperparameters, and reports standardized prediction error (SPE) and
feature selection error (FSE) per repeat with aggregates.

Data model: rows x ~ N(0, Sigma) with Sigma_ij = 0.7^|i-j|, responses
y = x'b* + sigma*e with e ~ N(0,1), where b* carries ten nonzeros
b*_i = b*_{i+p/2} = 0.2*i for i = 1..5 and sigma is calibrated so that
sqrt(b*' Sigma b*) / sigma equals the requested signal-to-noise ratio.

Randomness uses the counter-based Philox generator; the substream of
repeat r is keyed by ``seed XOR r``, so any Philox implementation can
reproduce the streams.  Repeats are independent and may run concurrently;
aggregation does not depend on completion order.
"""

from __future__ import annotations

import csv
import math
from dataclasses import dataclass, field

import numpy as np

from .errors import DataError, DomainError, KepregError
from .model_select import cross_validate
from .penalties import PenaltyKind, PenaltyParams
from .solvers import PathGrid, StandardizedDesign, cd_single

__all__ = [
    "AR_RHO",
    "Schedule",
    "SimConfig",
    "SimTruth",
    "SimReport",
    "method_label",
    "generate_instance",
    "spe",
    "fse",
    "run_schedule_experiment",
    "run_cv_experiment",
    "report_rows",
    "write_report_csv",
    "write_trace_csv",
]

AR_RHO = 0.7

_MASK64 = (1 << 64) - 1


def method_label(kind: PenaltyKind) -> str:
    return {"l1": "lasso"}.get(kind.value, kind.value)


@dataclass(frozen=True)
class Schedule:
    """Fixed hyperparameter rules: eta = n^eta_exponent, alpha = n^alpha_exponent.

    The defaults n^(1/4) and n^(-1/2) keep eta * alpha = n^(-1/4) < 1 for
    every n >= 2, so scheduled fits never trip the convexity guard.  The
    lasso comparator reuses eta as its lambda.
    """

    eta_exponent: float = 0.25
    alpha_exponent: float = -0.5

    def eta(self, n: int) -> float:
        return float(n) ** self.eta_exponent

    def alpha(self, n: int) -> float:
        return float(n) ** self.alpha_exponent

    def params_for(self, kind: PenaltyKind, n: int) -> PenaltyParams:
        if kind in (PenaltyKind.KEP, PenaltyKind.MCP):
            return PenaltyParams(eta=self.eta(n), alpha=self.alpha(n))
        return PenaltyParams(eta=self.eta(n), alpha=1.0)


@dataclass(frozen=True)
class SimConfig:
    """One simulation setting: sizes, signal-to-noise ratio, seeding."""

    n: int
    p: int
    snr: float
    seed: int
    repeats: int
    m: int = 1000
    schedule: Schedule | None = None
    folds: int = 5
    tol: float = 1e-6
    max_sweeps: int = 1000
    capture_traces: bool = False

    def __post_init__(self) -> None:
        if self.n < 2:
            raise DomainError(f"n must be >= 2, got {self.n}")
        if self.p < 10 or self.p % 2:
            raise DomainError(f"p must be even and >= 10, got {self.p}")
        if not (math.isfinite(self.snr) and self.snr > 0.0):
            raise DomainError(f"snr must be positive, got {self.snr!r}")
        if self.repeats < 1:
            raise DomainError(f"repeats must be >= 1, got {self.repeats}")
        if self.m < 1:
            raise DomainError(f"m must be >= 1, got {self.m}")


@dataclass(frozen=True)
class SimTruth:
    """Ground-truth coefficients and calibrated noise level."""

    b_star: np.ndarray
    sigma: float
    active_set: tuple[int, ...]

    @classmethod
    def for_config(cls, p: int, snr: float) -> "SimTruth":
        b = np.zeros(p)
        half = p // 2
        for i in range(1, 6):
            b[i - 1] = 0.2 * i
            b[half + i - 1] = 0.2 * i
        active = tuple(np.flatnonzero(b).tolist())
        # b*' Sigma b* over the sparse support only; Sigma_ij = AR_RHO^|i-j|.
        quad = 0.0
        for i in active:
            for j in active:
                quad += b[i] * b[j] * AR_RHO ** abs(i - j)
        return cls(b_star=b, sigma=math.sqrt(quad) / snr, active_set=active)


def _rng_for_repeat(seed: int, repeat: int) -> np.random.Generator:
    return np.random.Generator(np.random.Philox(key=(seed ^ repeat) & _MASK64))


def _ar1_rows(rng: np.random.Generator, n: int, p: int) -> np.ndarray:
    """Rows from N(0, Sigma) with Sigma_ij = AR_RHO^|i-j|.

    The AR(1) covariance factors into the first-order recursion
    x_1 = z_1, x_j = rho * x_{j-1} + sqrt(1 - rho^2) * z_j, which is its
    lower-triangular construction applied column by column.
    """
    z = rng.standard_normal((n, p))
    x = np.empty_like(z)
    x[:, 0] = z[:, 0]
    c = math.sqrt(1.0 - AR_RHO * AR_RHO)
    for j in range(1, p):
        x[:, j] = AR_RHO * x[:, j - 1] + c * z[:, j]
    return x


def generate_instance(config: SimConfig, repeat: int = 0):
    """Draw one train/test pair, fully determined by (config.seed, repeat).

    Returns ``((X_train, y_train), (X_test, y_test), truth)``; the stream
    order is train design, train noise, test design, test noise.
    """
    truth = SimTruth.for_config(config.p, config.snr)
    rng = _rng_for_repeat(config.seed, repeat)
    X_tr = _ar1_rows(rng, config.n, config.p)
    y_tr = X_tr @ truth.b_star + truth.sigma * rng.standard_normal(config.n)
    X_te = _ar1_rows(rng, config.m, config.p)
    y_te = X_te @ truth.b_star + truth.sigma * rng.standard_normal(config.m)
    return (X_tr, y_tr), (X_te, y_te), truth


def spe(y_test: np.ndarray, X_test: np.ndarray, b_hat: np.ndarray, sigma: float) -> float:
    """Standardized prediction error, sum_i (y_i - x_i'b)^2 / (m * sigma^2)."""
    y_test = np.asarray(y_test, dtype=float)
    X_test = np.asarray(X_test, dtype=float)
    b_hat = np.asarray(b_hat, dtype=float)
    if X_test.ndim != 2 or y_test.shape != (X_test.shape[0],) or b_hat.shape != (X_test.shape[1],):
        raise DataError(
            f"shape mismatch: X {X_test.shape}, y {y_test.shape}, b {b_hat.shape}"
        )
    if not sigma > 0.0:
        raise DomainError(f"sigma must be positive, got {sigma!r}")
    r = y_test - X_test @ b_hat
    return float(r @ r) / (y_test.size * sigma * sigma)


def fse(b_hat: np.ndarray, b_star: np.ndarray) -> float:
    """Fraction of coordinates whose zero/nonzero status disagrees with the truth.

    Zero-ness is exact: the threshold operators emit exact zeros.
    """
    b_hat = np.asarray(b_hat, dtype=float)
    b_star = np.asarray(b_star, dtype=float)
    if b_hat.shape != b_star.shape:
        raise DataError(f"length mismatch: {b_hat.shape} vs {b_star.shape}")
    wrong_zero = np.sum((b_hat == 0.0) & (b_star != 0.0))
    wrong_nonzero = np.sum((b_hat != 0.0) & (b_star == 0.0))
    return float(wrong_zero + wrong_nonzero) / b_hat.size


@dataclass
class SimReport:
    """Per-method, per-repeat SPE/FSE with mean and standard-error aggregates.

    Failed repeats are recorded as NaN rows alongside their error message
    rather than aborting the experiment.
    """

    config: SimConfig
    mode: str
    methods: list[str]
    spe_values: dict[str, np.ndarray]
    fse_values: dict[str, np.ndarray]
    failures: dict[str, list[tuple[int, str]]] = field(default_factory=dict)
    traces: dict[tuple[str, int], list[float]] | None = None

    def aggregates(self) -> dict[str, dict[str, float]]:
        out: dict[str, dict[str, float]] = {}
        for name in self.methods:
            s = self.spe_values[name]
            f = self.fse_values[name]
            ok = np.isfinite(s)
            count = int(np.sum(ok))
            denom = math.sqrt(count) if count else float("nan")
            ddof = 1 if count > 1 else 0
            out[name] = {
                "spe_mean": float(np.mean(s[ok])) if count else float("nan"),
                "spe_se": float(np.std(s[ok], ddof=ddof) / denom) if count else float("nan"),
                "fse_mean": float(np.mean(f[ok])) if count else float("nan"),
                "fse_se": float(np.std(f[ok], ddof=ddof) / denom) if count else float("nan"),
                "repeats_ok": count,
            }
        return out


def _fit_methods(
    config: SimConfig,
    methods,
    repeat: int,
    select_params,
    report: SimReport,
) -> None:
    train, test, truth = generate_instance(config, repeat)
    design = StandardizedDesign.from_raw(*train)
    for kind in methods:
        name = method_label(kind)
        try:
            params = select_params(kind, design)
            res = cd_single(
                design,
                params,
                kind=kind,
                tol=config.tol,
                max_sweeps=config.max_sweeps,
            )
            b_raw = design.coef_to_raw(res.coef)
            report.spe_values[name][repeat] = spe(test[1], test[0], b_raw, truth.sigma)
            report.fse_values[name][repeat] = fse(b_raw, truth.b_star)
            if report.traces is not None:
                report.traces[(name, repeat)] = res.trace
        except KepregError as exc:
            report.failures.setdefault(name, []).append((repeat, str(exc)))


def _new_report(config: SimConfig, mode: str, methods) -> SimReport:
    names = [method_label(k) for k in methods]
    return SimReport(
        config=config,
        mode=mode,
        methods=names,
        spe_values={n: np.full(config.repeats, np.nan) for n in names},
        fse_values={n: np.full(config.repeats, np.nan) for n in names},
        traces={} if config.capture_traces else None,
    )


def run_schedule_experiment(config: SimConfig, methods) -> SimReport:
    """Fit every method with the fixed hyperparameter schedule on each repeat.

    KEP and MCP take (eta, alpha) from the schedule; the lasso and half
    comparators take lambda = eta.  SPE/FSE are evaluated on the held-out
    test set on the raw scale through the standardization back-transform.
    """
    if config.schedule is None:
        raise DataError("run_schedule_experiment requires config.schedule")
    schedule = config.schedule
    report = _new_report(config, "schedule", methods)

    def select(kind: PenaltyKind, _design: StandardizedDesign) -> PenaltyParams:
        return schedule.params_for(kind, config.n)

    for r in range(config.repeats):
        _fit_methods(config, methods, r, select, report)
    return report


def run_cv_experiment(
    config: SimConfig,
    methods,
    folds: int | None = None,
    n_lambdas: int = 50,
    n_alphas: int = 20,
) -> SimReport:
    """Select hyperparameters per repeat by cross-validation, refit, evaluate.

    KEP and MCP search the two-dimensional (lambda, alpha) grid; lasso and
    half search the one-dimensional lambda grid.  The fold split of repeat
    r is keyed by ``seed XOR r``.
    """
    folds = config.folds if folds is None else folds
    if folds < 2:
        raise DataError(f"folds must be >= 2, got {folds!r}")
    report = _new_report(config, "cv", methods)

    for r in range(config.repeats):

        def select(kind: PenaltyKind, design: StandardizedDesign, r=r) -> PenaltyParams:
            if kind in (PenaltyKind.KEP, PenaltyKind.MCP):
                grid = PathGrid.default(design, n_lambdas=n_lambdas, n_alphas=n_alphas)
            else:
                grid = PathGrid.lasso_default(design, n_lambdas=n_lambdas)
            cv = cross_validate(
                design,
                grid,
                folds,
                seed=(config.seed ^ r) & _MASK64,
                kind=kind,
                tol=config.tol,
                max_sweeps=config.max_sweeps,
            )
            return cv.best_params()

        _fit_methods(config, methods, r, select, report)
    return report


def report_rows(report: SimReport) -> list[tuple[str, int, float, float]]:
    """Flatten a report to (method, repeat, spe, fse) rows."""
    rows = []
    for name in report.methods:
        for r in range(report.config.repeats):
            rows.append(
                (name, r, float(report.spe_values[name][r]), float(report.fse_values[name][r]))
            )
    return rows


def _fmt(x: float) -> str:
    return format(x, ".17g")


def write_report_csv(report: SimReport, path) -> None:
    """One row per method and repeat, full round-trip precision."""
    with open(path, "w", newline="", encoding="utf-8") as fh:
        writer = csv.writer(fh)
        writer.writerow(["method", "repeat", "spe", "fse"])
        for name, r, s, f in report_rows(report):
            writer.writerow([name, r, _fmt(s), _fmt(f)])


def write_trace_csv(trace, path) -> None:
    """Plot-ready two-column convergence trace: sweep index and objective."""
    with open(path, "w", newline="", encoding="utf-8") as fh:
        writer = csv.writer(fh)
        writer.writerow(["sweep", "objective"])
        for i, value in enumerate(trace, start=1):
            writer.writerow([i, _fmt(value)])
