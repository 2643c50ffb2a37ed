import math

import numpy as np
import pytest

from kepreg import (
    DataError,
    DomainError,
    PenaltyKind,
    Schedule,
    SimConfig,
    SimTruth,
    fse,
    generate_instance,
    run_cv_experiment,
    run_schedule_experiment,
    spe,
)
from kepreg.experiments import AR_RHO, report_rows, write_report_csv, write_trace_csv


def _config(**kw):
    base = dict(n=60, p=20, snr=3.0, seed=11, repeats=3, m=200, schedule=Schedule())
    base.update(kw)
    return SimConfig(**base)


def test_config_validation():
    with pytest.raises(DomainError):
        _config(p=15)  # odd
    with pytest.raises(DomainError):
        _config(p=8)  # too small
    with pytest.raises(DomainError):
        _config(snr=0.0)
    with pytest.raises(DomainError):
        _config(n=1)


def test_truth_construction():
    truth = SimTruth.for_config(200, 3.0)
    b = truth.b_star
    assert np.sum(b != 0.0) == 10
    for i in range(1, 6):
        assert b[i - 1] == pytest.approx(0.2 * i)
        assert b[100 + i - 1] == pytest.approx(0.2 * i)
    # sigma comes from the quadratic form of the truth under the AR covariance
    p = 200
    idx = np.arange(p)
    sigma_full = AR_RHO ** np.abs(idx[:, None] - idx[None, :])
    quad = float(b @ sigma_full @ b)
    assert truth.sigma == pytest.approx(math.sqrt(quad) / 3.0, rel=1e-12)


def test_generate_instance_deterministic():
    cfg = _config()
    (X1, y1), (T1, ty1), tr1 = generate_instance(cfg, repeat=1)
    (X2, y2), (T2, ty2), tr2 = generate_instance(cfg, repeat=1)
    np.testing.assert_array_equal(X1, X2)
    np.testing.assert_array_equal(y1, y2)
    np.testing.assert_array_equal(T1, T2)
    np.testing.assert_array_equal(ty1, ty2)
    (X3, _), _, _ = generate_instance(cfg, repeat=2)
    assert not np.array_equal(X1, X3)


def test_sampler_covariance_monte_carlo():
    cfg = SimConfig(n=1_000_000, p=10, snr=3.0, seed=4, repeats=1, m=1, schedule=Schedule())
    (X, _), _, _ = generate_instance(cfg, 0)
    emp = X.T @ X / X.shape[0]
    idx = np.arange(10)
    target = AR_RHO ** np.abs(idx[:, None] - idx[None, :])
    assert np.max(np.abs(emp - target)) <= 0.01


def test_spe_oracle_concentrates():
    cfg = _config(m=1000, repeats=1)
    vals = []
    for r in range(30):
        _, (X_te, y_te), truth = generate_instance(cfg, r)
        vals.append(spe(y_te, X_te, truth.b_star, truth.sigma))
    vals = np.asarray(vals)
    assert abs(vals.mean() - 1.0) <= 3.0 * math.sqrt(2.0 / 1000.0)
    band = 3.0 * math.sqrt(2.0 / 1000.0)
    assert np.mean(np.abs(vals - 1.0) <= band) >= 0.9


def test_spe_zero_fit_is_response_energy():
    rng = np.random.default_rng(0)
    X = rng.standard_normal((50, 4))
    y = rng.standard_normal(50)
    sigma = 0.7
    assert spe(y, X, np.zeros(4), sigma) == pytest.approx(float(y @ y) / (50 * sigma**2))
    with pytest.raises(DataError):
        spe(y, X, np.zeros(5), sigma)


def test_fse_hand_values():
    b_star = np.zeros(200)
    b_star[:10] = 1.0
    assert fse(b_star, b_star) == 0.0
    assert fse(np.zeros(200), b_star) == pytest.approx(0.05)
    b_hat = b_star.copy()
    b_hat[150] = 0.3
    assert fse(b_hat, b_star) == pytest.approx(0.005)
    with pytest.raises(DataError):
        fse(np.zeros(3), np.zeros(4))


def test_schedule_experiment_runs_and_is_deterministic():
    cfg = _config(repeats=4)
    methods = [PenaltyKind.KEP, PenaltyKind.L1]
    rep1 = run_schedule_experiment(cfg, methods)
    rep2 = run_schedule_experiment(cfg, methods)
    for name in rep1.methods:
        np.testing.assert_array_equal(rep1.spe_values[name], rep2.spe_values[name])
        np.testing.assert_array_equal(rep1.fse_values[name], rep2.fse_values[name])
        assert np.all(np.isfinite(rep1.spe_values[name]))
        assert np.all(rep1.fse_values[name] >= 0.0)
        assert np.all(rep1.fse_values[name] <= 1.0)
    agg = rep1.aggregates()
    assert agg["kep"]["repeats_ok"] == 4
    assert agg["kep"]["spe_mean"] > 0.0


def test_schedule_requires_schedule():
    cfg = _config()
    cfg = SimConfig(n=60, p=20, snr=3.0, seed=11, repeats=2, m=100, schedule=None)
    with pytest.raises(DataError):
        run_schedule_experiment(cfg, [PenaltyKind.KEP])


def test_schedule_guard_always_passes():
    sched = Schedule()
    for n in (2, 10, 100, 12800):
        assert sched.eta(n) * sched.alpha(n) < 1.0


def test_traces_captured_when_requested():
    cfg = _config(repeats=2, capture_traces=True)
    rep = run_schedule_experiment(cfg, [PenaltyKind.KEP])
    assert rep.traces and ("kep", 0) in rep.traces
    trace = rep.traces[("kep", 0)]
    assert len(trace) >= 1
    t = np.asarray(trace)
    assert np.all(np.diff(t) <= 1e-12 * np.maximum(1.0, np.abs(t[:-1])))


def test_cv_experiment_smoke():
    cfg = SimConfig(n=50, p=16, snr=3.0, seed=13, repeats=2, m=150, folds=3)
    rep = run_cv_experiment(cfg, [PenaltyKind.KEP, PenaltyKind.L1], n_lambdas=8, n_alphas=4)
    agg = rep.aggregates()
    for name in ("kep", "lasso"):
        assert agg[name]["repeats_ok"] == 2
        assert 0.5 < agg[name]["spe_mean"] < 20.0
    rep2 = run_cv_experiment(cfg, [PenaltyKind.KEP, PenaltyKind.L1], n_lambdas=8, n_alphas=4)
    np.testing.assert_array_equal(rep.spe_values["kep"], rep2.spe_values["kep"])


def test_report_rows_and_csv(tmp_path):
    cfg = _config(repeats=2)
    rep = run_schedule_experiment(cfg, [PenaltyKind.KEP])
    rows = report_rows(rep)
    assert len(rows) == 2
    out = tmp_path / "r.csv"
    write_report_csv(rep, out)
    text = out.read_text()
    assert text.splitlines()[0] == "method,repeat,spe,fse"
    write_report_csv(rep, tmp_path / "r2.csv")
    assert (tmp_path / "r2.csv").read_text() == text

    write_trace_csv([3.0, 2.0, 1.5], tmp_path / "t.csv")
    lines = (tmp_path / "t.csv").read_text().splitlines()
    assert lines[0] == "sweep,objective"
    assert lines[1].startswith("1,")
