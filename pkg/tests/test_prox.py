import math

import numpy as np
import pytest

from kepreg import (
    DomainError,
    PenaltyKind,
    PenaltyParams,
    Regime,
    UnivariateProblem,
    half_threshold,
    kep_threshold,
    mcp_threshold,
    oracle_threshold,
    phi,
    phi_sq_lipschitz_bound,
    soft_threshold,
)
from kepreg.prox import half_threshold_point, kep_threshold_point


def _problem(z, eta, alpha, kind):
    return UnivariateProblem(z=z, params=PenaltyParams(eta=eta, alpha=alpha), kind=kind)


def test_kep_dead_zone_continuous():
    d = kep_threshold(0.5, PenaltyParams(eta=1.0, alpha=0.5))
    assert d.estimate == 0.0
    assert d.threshold_point == 1.0
    assert d.regime is Regime.CONTINUOUS


def test_kep_root_equation():
    # the nonzero estimate solves b + (1 + b)^(-1/2) = 2 for eta=1, alpha=0.5
    d = kep_threshold(2.0, PenaltyParams(eta=1.0, alpha=0.5))
    assert abs(d.estimate + (1.0 + d.estimate) ** -0.5 - 2.0) <= 1e-9
    o = oracle_threshold(_problem(2.0, 1.0, 0.5, PenaltyKind.KEP), 1e-6)
    assert d.estimate == pytest.approx(o, abs=2e-6)


def test_kep_odd_symmetry():
    p = PenaltyParams(eta=1.0, alpha=0.5)
    assert kep_threshold(-2.0, p).estimate == -kep_threshold(2.0, p).estimate


def test_kep_rejects_bad_input():
    p = PenaltyParams(eta=1.0, alpha=0.5)
    with pytest.raises(DomainError):
        kep_threshold(float("inf"), p)
    with pytest.raises(DomainError):
        kep_threshold(1.0, PenaltyParams(eta=1.0, alpha=0.5, q=2))


def test_kep_fixed_point_residual():
    rng = np.random.default_rng(11)
    for _ in range(300):
        eta = rng.uniform(0.05, 5.0)
        alpha = rng.uniform(0.05, 5.0)
        z = rng.uniform(-10.0, 10.0)
        d = kep_threshold(z, PenaltyParams(eta=eta, alpha=alpha))
        b = d.estimate
        if b != 0.0:
            resid = b + math.copysign(eta / math.sqrt(2.0 * alpha * abs(b) + 1.0), b) - z
            assert abs(resid) <= 1e-9
            assert abs(b) <= abs(z)
            assert math.copysign(1.0, b) == math.copysign(1.0, z)


def test_kep_monotone_in_z():
    for eta, alpha in [(1.0, 0.5), (2.0, 1.0), (1.0, 3.0)]:
        p = PenaltyParams(eta=eta, alpha=alpha)
        zs = np.linspace(-8.0, 8.0, 3001)
        est = np.array([kep_threshold(z, p).estimate for z in zs])
        assert np.all(np.diff(est) >= 0.0)
        point = kep_threshold(0.0, p).threshold_point
        beyond = zs > point + 1e-9
        assert np.all(np.diff(est[beyond]) > 0.0)


def test_kep_estimate_zero_iff_below_threshold():
    # the reported threshold point is the exact dead-zone boundary
    for eta, alpha in [(1.0, 0.5), (1.0, 1.0), (2.0, 1.0), (4.0, 2.5)]:
        p = PenaltyParams(eta=eta, alpha=alpha)
        point = kep_threshold(0.0, p).threshold_point
        assert kep_threshold(point, p).estimate == 0.0
        assert kep_threshold(math.nextafter(point, 0.0), p).estimate == 0.0
        assert kep_threshold(point * (1.0 + 1e-9), p).estimate != 0.0


def test_kep_threshold_point_regime_boundary():
    # at eta*alpha = 1 both branch formulas give eta, and the rule stays continuous
    point, regime = kep_threshold_point(2.0, 0.5)
    assert point == pytest.approx(2.0, rel=1e-12)
    assert regime is Regime.CONTINUOUS
    point_above, _ = kep_threshold_point(2.0, 0.5 + 1e-9)
    assert point_above == pytest.approx(2.0, rel=1e-6)


def test_kep_discontinuous_jump_ties_objective():
    # just beyond the threshold the nonzero branch strictly beats zero
    eta, alpha = 2.0, 1.0
    p = PenaltyParams(eta=eta, alpha=alpha)
    point, regime = kep_threshold_point(eta, alpha)
    assert regime is Regime.DISCONTINUOUS
    prob_at = _problem(point * (1.0 + 1e-7), eta, alpha, PenaltyKind.KEP)
    assert oracle_threshold(prob_at, 1e-5) != 0.0
    prob_below = _problem(point * (1.0 - 1e-7), eta, alpha, PenaltyKind.KEP)
    assert oracle_threshold(prob_below, 1e-5) == 0.0


def test_kep_lipschitz_in_continuous_regime():
    rng = np.random.default_rng(3)
    for eta, alpha in [(1.0, 0.5), (1.5, 0.6), (0.4, 2.0)]:
        t = eta * alpha
        assert t < 1.0
        p = PenaltyParams(eta=eta, alpha=alpha)
        bound = phi_sq_lipschitz_bound(t)
        point = kep_threshold(0.0, p).threshold_point
        for _ in range(200):
            z = point + rng.uniform(0.0, 6.0) + 1e-5
            dz = 1e-6
            b1 = kep_threshold(z, p).estimate
            b2 = kep_threshold(z + dz, p).estimate
            assert abs(b2 - b1) <= bound * dz * (1.0 + 1e-6) + 1e-12


def test_nesting_threshold_point_nondecreasing_in_alpha():
    lam = 1.0
    alphas = np.geomspace(1e-4, 1e4, 120)
    points = []
    for a in alphas:
        params = PenaltyParams.with_nesting(lam, a)
        points.append(kep_threshold_point(params.eta, a)[0])
    assert np.all(np.diff(points) >= -1e-12)


def test_mcp_threshold_branches():
    p = PenaltyParams(eta=1.0, alpha=0.5)
    assert mcp_threshold(1.5, p).estimate == pytest.approx(1.0)
    assert mcp_threshold(3.0, p).estimate == 3.0
    assert mcp_threshold(2.0, p).estimate == pytest.approx(2.0)  # middle-branch boundary
    assert mcp_threshold(0.9, p).estimate == 0.0
    hard = PenaltyParams(eta=1.0, alpha=2.0)
    d = mcp_threshold(0.4, hard)
    assert d.estimate == 0.0
    assert d.regime is Regime.DISCONTINUOUS
    # hard-threshold cut sits at the objective tie sqrt(eta/alpha)
    assert d.threshold_point == pytest.approx(math.sqrt(0.5))
    assert mcp_threshold(0.8, hard).estimate == pytest.approx(0.8)


def test_mcp_odd_symmetry_and_bounds():
    rng = np.random.default_rng(21)
    for _ in range(200):
        eta = rng.uniform(0.05, 5.0)
        alpha = rng.uniform(0.05, 5.0)
        z = rng.uniform(0.0, 10.0)
        p = PenaltyParams(eta=eta, alpha=alpha)
        d_pos = mcp_threshold(z, p)
        d_neg = mcp_threshold(-z, p)
        assert d_pos.estimate == -d_neg.estimate
        assert abs(d_pos.estimate) <= z + 1e-15


def test_soft_threshold():
    assert soft_threshold(1.0, 1.0) == 0.0
    assert soft_threshold(2.0, 1.0) == 1.0
    assert soft_threshold(-2.0, 1.0) == -1.0
    np.testing.assert_allclose(soft_threshold(np.array([-3.0, 0.5, 3.0]), 1.0), [-2.0, 0.0, 2.0])


def test_half_threshold_dead_zone_and_symmetry():
    assert half_threshold(0.1, 1.0) == 0.0
    assert half_threshold(-2.0, 1.0) == -half_threshold(2.0, 1.0)
    # boundary tie maps to zero
    point = half_threshold_point(1.0)
    assert half_threshold(point, 1.0) == 0.0
    assert half_threshold(point + 1e-9, 1.0) != 0.0


def test_half_threshold_is_the_argmin():
    params = PenaltyParams(eta=1.0, alpha=1.0)  # alpha unused by the half rule
    for z in (0.5, 1.2, 1.45, 1.55, 2.0, 4.0, -3.0):
        o = oracle_threshold(
            UnivariateProblem(z=z, params=params, kind=PenaltyKind.LHALF), 1e-5
        )
        assert half_threshold(z, 1.0) == pytest.approx(o, abs=2e-5)


def test_kep_soft_limit():
    lam = 1.0
    p = PenaltyParams(eta=lam, alpha=1e-10)
    zs = np.arange(-50, 51) * 0.1
    worst = max(abs(kep_threshold(z, p).estimate - soft_threshold(z, lam)) for z in zs)
    assert worst <= 1e-5


def test_kep_half_limit():
    lam, alpha = 1.0, 1e8
    p = PenaltyParams.with_nesting(lam, alpha)
    assert abs(kep_threshold(2.0, p).estimate - half_threshold(2.0, lam)) <= 1e-3


def test_oracle_preconditions():
    params = PenaltyParams(eta=1.0, alpha=1.0)
    prob = UnivariateProblem(z=0.0, params=params, kind=PenaltyKind.KEP)
    assert oracle_threshold(prob, 1e-4) == 0.0
    with pytest.raises(DomainError):
        oracle_threshold(UnivariateProblem(z=0.5, params=params, kind=PenaltyKind.KEP), 0.1)


def test_oracle_equivalence_random_triples():
    # reduced-size companion of the acceptance sweep, step 1e-4
    rng = np.random.default_rng(77)
    step = 1e-4
    for _ in range(200):
        z = rng.uniform(-10.0, 10.0)
        while abs(z) < 1e-2:
            z = rng.uniform(-10.0, 10.0)
        eta = rng.uniform(1e-3, 5.0)
        alpha = rng.uniform(1e-3, 5.0)
        p = PenaltyParams(eta=eta, alpha=alpha)
        ok = oracle_threshold(UnivariateProblem(z=z, params=p, kind=PenaltyKind.KEP), step)
        om = oracle_threshold(UnivariateProblem(z=z, params=p, kind=PenaltyKind.MCP), step)
        assert abs(kep_threshold(z, p).estimate - ok) <= 2.0 * step
        assert abs(mcp_threshold(z, p).estimate - om) <= 2.0 * step


def test_phi_identity_at_2t():
    for t in np.arange(0.0, 1.0 + 1e-12, 0.1):
        assert abs(phi(2.0 * t, float(t)) - 1.0) <= 1e-10


def test_phi_strictly_increasing():
    for t in (0.0, 0.2, 0.5, 0.9, 1.0, 2.5):
        lo = max(0.0, 3.0 * t ** (2.0 / 3.0) - 1.0)
        u = np.linspace(lo, lo + 20.0, 2000)
        vals = phi(u, t)
        assert np.all(np.diff(vals) > 0.0)
        assert np.all(np.diff(vals**2) > 0.0)


def test_phi_sq_lipschitz_bound_holds():
    for t in np.arange(0.1, 0.95, 0.1):
        bound = phi_sq_lipschitz_bound(float(t))
        u = np.linspace(2.0 * t, 2.0 * t + 10.0, 4001)
        sq = phi(u, float(t)) ** 2
        quotients = np.abs(np.diff(sq)) / np.diff(u)
        assert np.max(quotients) <= bound


def test_phi_domain_guard():
    with pytest.raises(Exception):
        phi(0.0, 5.0)  # u far below 3*t^(2/3) - 1
