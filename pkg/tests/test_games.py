import math

import numpy as np
import pytest

from noregret import games
from noregret.errors import ConfigError, ContractViolation
from noregret.games import (EcQuadratic, NewsvendorMA, NewsvendorSA,
                            PortfolioStream, PowerManagement, QuadraticStream,
                            ec_probe, from_config, gradient_oracle,
                            monotonicity_probe, newsvendor_ma_beta,
                            newsvendor_signal, pm_beta, sample_ma_demand)


def pm_instance(sigma=0.0):
    return PowerManagement(gain=[[2.0, 1.0], [1.0, 2.0]],
                           target_rates=[0.5, 0.5], thermal_noise=[1.0, 1.0],
                           upper=[1.0, 1.0], sigma=sigma)


def test_pm_field_hand_value():
    pm = pm_instance()
    v = pm.field(np.array([1.0, 1.0]))
    # v_1 = 1 - 0.5 (1 + 1) / 2
    assert v[0] == pytest.approx(0.5)
    assert v[1] == pytest.approx(0.5)


def test_pm_beta_quadratic_formula():
    beta = pm_beta([[2.0, 1.0], [1.0, 2.0]], [0.5, 0.5])
    # symmetric W with off-diagonal 0.25: eigenvalues {0.75, 1.25}
    assert beta == pytest.approx(0.75, abs=1e-12)
    assert pm_beta(np.eye(3) * 2.0, [0.5, 0.5, 0.5]) == pytest.approx(1.0)


def test_pm_beta_flags_non_monotone():
    with pytest.warns(UserWarning):
        b = pm_beta([[1.0, 1.0], [1.0, 1.0]], [3.0, 3.0])
    assert b <= 0


def test_pm_nash_linear_solve():
    pm = pm_instance()
    a = pm.nash_closed_form()
    assert np.allclose(a, [1 / 3, 1 / 3], atol=1e-12)
    assert np.allclose(pm.field(a), 0.0, atol=1e-12)


def test_pm_default_boxes_cover_twice_nash():
    pm = PowerManagement(gain=[[2.0, 1.0], [1.0, 2.0]],
                         target_rates=[0.5, 0.5], thermal_noise=[1.0, 1.0])
    assert np.allclose(pm.upper, [2 / 3, 2 / 3], atol=1e-12)


def test_newsvendor_signal_cases():
    assert newsvendor_signal(2.0, 1.0, 5.0, 3.0) == 1.0
    assert newsvendor_signal(2.0, 1.0, 5.0, 7.0) == -1.0
    # tie goes to the sold-out branch
    assert newsvendor_signal(2.0, 1.0, 5.0, 5.0) == -1.0
    with pytest.raises(ContractViolation):
        newsvendor_signal(2.0, 1.0, -1.0, 3.0)


def test_sample_ma_demand_inversion():
    assert sample_ma_demand(0.0, 0.75) == pytest.approx(1.0, abs=1e-12)
    # atom at zero has mass s / (1 + s)
    assert sample_ma_demand(1.0, 0.4) == 0.0
    assert sample_ma_demand(1.0, 0.875) == pytest.approx(2.0, abs=1e-12)
    with pytest.raises(ContractViolation):
        sample_ma_demand(1.0, 0.0)
    with pytest.raises(ContractViolation):
        sample_ma_demand(1.0, 1.0)


def test_sample_ma_demand_plug_back():
    rng = np.random.default_rng(0)
    for s in (0.0, 0.7, 2.5):
        for u in rng.random(200) * 0.98 + 0.01:
            z = sample_ma_demand(s, float(u))
            cdf = 1.0 - (1.0 + s) / (1.0 + z + s) ** 2
            if z > 0:
                assert cdf == pytest.approx(u, abs=1e-9)
            else:
                assert u <= s / (1.0 + s) + 1e-12


def test_sample_ma_demand_empirical_cdf():
    rng = np.random.default_rng(1)
    n = 100_000
    for s in (0.0, 1.0):
        u = rng.random(n) * (1 - 2e-12) + 1e-12
        z = sample_ma_demand(s, u)
        grid = np.linspace(0.0, 40.0, 2001)
        emp = np.searchsorted(np.sort(z), grid, side="right") / n
        ana = 1.0 - (1.0 + s) / (1.0 + grid + s) ** 2
        assert np.max(np.abs(emp - ana)) <= 0.005


def test_newsvendor_ma_beta_values():
    assert newsvendor_ma_beta(2.0, [1.0, 1.0]) == pytest.approx(2 / 27)
    assert newsvendor_ma_beta(3.0, [0.0, 0.0]) == pytest.approx(3.0)
    b1 = newsvendor_ma_beta(2.0, [0.5, 0.5])
    b2 = newsvendor_ma_beta(2.0, [1.5, 1.5])
    assert b1 / b2 == pytest.approx(8.0)


def test_quadratic_stream_gradients():
    qs = QuadraticStream(beta=2.0, lower=[-1.0, -1.0], upper=[1.0, 1.0],
                         stream_seed=3)
    theta = qs.targets(5)[2]
    assert np.allclose(qs.field(theta, 3), 0.0)
    x = np.array([0.3, -0.4])
    assert np.allclose(qs.field(x, 3), 2.0 * (x - theta))
    assert qs.cost(theta, 3) == 0.0


def test_stream_prefix_stability():
    a = QuadraticStream(beta=1.0, lower=[0.0], upper=[1.0], stream_seed=7)
    b = QuadraticStream(beta=1.0, lower=[0.0], upper=[1.0], stream_seed=7)
    short = a.targets(100).copy()
    long = b.targets(100_000)
    assert np.array_equal(short, long[:100])
    p = PortfolioStream(dim=3, stream_seed=9)
    first = p.prices(64).copy()
    assert np.array_equal(first, p.prices(5000)[:64])


def test_portfolio_gradient_and_cost():
    p = PortfolioStream(dim=4, stream_seed=1)
    x = np.full(4, 0.25)
    a = p.prices(1)[0]
    assert np.allclose(p.field(x, 1), -a / (a @ x))
    assert p.cost(x, 1) == pytest.approx(-math.log(a @ x))
    # all-ones price relatives: cost 0, gradient all -1
    p._prices = np.ones((8, 4))
    assert p.cost(x, 2) == pytest.approx(0.0)
    assert np.allclose(p.field(x, 2), -1.0)


def test_power_management_field_formula_example():
    pm = pm_instance()
    v = pm.field(np.array([1.0, 1.0]))
    assert v[0] == pytest.approx(1.0 - 0.5 * (1 + 1) / 2)


def test_oracle_unbiasedness_montecarlo():
    cases = [
        (pm_instance(sigma=0.1), np.array([0.7, 0.2])),
        (QuadraticStream(beta=1.0, lower=[-1.0] * 3, upper=[1.0] * 3,
                         sigma=0.5), np.array([0.1, -0.2, 0.5])),
        (NewsvendorSA(price=2.0, cost=1.0, x_bar=100.0), np.array([30.0])),
        (NewsvendorMA(price=2.0, costs=[1.0, 1.0], x_bars=[1.0, 1.0]),
         np.array([0.4, 0.6])),
    ]
    rng = np.random.default_rng(5)
    n = 1_000_000
    for game, x in cases:
        draws = game.signal_matrix(x, 1, rng, n)
        mean = draws.mean(axis=0)
        stderr = draws.std(axis=0, ddof=1) / math.sqrt(n)
        target = game.field(x, 1)
        assert np.all(np.abs(mean - target) <= 4.0 * stderr + 1e-12), game.name


def test_newsvendor_sa_expected_signal_value():
    nv = NewsvendorSA(price=2.0, cost=1.0, x_bar=100.0)
    # p F(30) - p + c = 2 * 0.3 - 1 = -0.4
    assert nv.field(np.array([30.0]))[0] == pytest.approx(-0.4)


def test_gradient_oracle_checks_feasibility():
    nv = NewsvendorSA(price=2.0, cost=1.0, x_bar=100.0)
    with pytest.raises(ContractViolation):
        gradient_oracle(nv, np.array([150.0]), 1, np.random.default_rng(0))


def test_monotonicity_probe_quadratic_exact():
    qs = QuadraticStream(beta=1.7, lower=[-1.0, -1.0], upper=[1.0, 1.0])
    rep = monotonicity_probe(qs, 1.7, 500, np.random.default_rng(0))
    assert rep.passed
    assert rep.worst == pytest.approx(1.7, abs=1e-9)


def test_monotonicity_probe_pm_and_newsvendor():
    pm = pm_instance()
    rep = monotonicity_probe(pm, pm.beta(), 2000, np.random.default_rng(1))
    assert rep.passed
    nv = NewsvendorMA(price=2.0, costs=[1.0, 1.0], x_bars=[1.0, 1.0])
    rep2 = monotonicity_probe(nv, nv.beta(), 2000, np.random.default_rng(2))
    assert rep2.passed


def test_monotonicity_probe_detects_inflated_claim():
    pm = pm_instance()
    rep = monotonicity_probe(pm, pm.beta() * 1.5, 2000,
                             np.random.default_rng(3))
    assert not rep.passed


def test_ec_probe_single_agent_unit_ball():
    game = EcQuadratic(a=[[0.8, 0.6]], dims=[2], radius=1.0)
    rep = ec_probe(game, 2.0, 1.0, 2.0, 2000, np.random.default_rng(4))
    assert rep.passed


def test_ec_probe_trivial_equal_points():
    game = EcQuadratic(a=[[1.0, 0.5], [0.5, 1.0]], dims=[1, 1])
    x = game.joint_set.sample(np.random.default_rng(5))
    coef = 0.25 * min(1.0 / (4.0 * 2.0 * 3.0), 0.5)
    lhs = float((x - x) @ (game.field(x) - game.field(x)))
    assert lhs == 0.0  # both sides vanish at x' = x
    rep = ec_probe(game, 2 * game.monotone_modulus() / 4.5, 1.5 * math.sqrt(2),
                   game.joint_set.diameter(), 1000, np.random.default_rng(6))
    assert rep.passed
    assert coef > 0


def test_ec_probe_strongly_monotone_alpha_rule():
    pm = pm_instance()
    gsq = pm.gradient_bound_sq()
    alpha = 2.0 * pm.beta() / gsq
    rep = ec_probe(pm, alpha, math.sqrt(gsq), pm.joint_set.diameter(), 2000,
                   np.random.default_rng(7))
    assert rep.passed


def test_newsvendor_ma_hessian_floor():
    nv = NewsvendorMA(price=2.0, costs=[1.0, 1.0], x_bars=[1.0, 1.0])
    beta = nv.beta()
    rng = np.random.default_rng(8)
    for _ in range(200):
        x = nv.joint_set.sample(rng)
        h = 1e-5 * (1.0 + float(np.linalg.norm(x)))
        J = np.empty((2, 2))
        for j in range(2):
            e = np.zeros(2)
            e[j] = h
            J[:, j] = (nv.field(x + e) - nv.field(x - e)) / (2 * h)
        assert np.linalg.eigvalsh(0.5 * (J + J.T))[0] >= beta - 1e-6


def test_from_config_roundtrip_and_validation():
    doc = {"game": "power_management",
           "params": {"gain": [[2.0, 1.0], [1.0, 2.0]],
                      "target_rates": [0.5, 0.5],
                      "thermal_noise": [1.0, 1.0],
                      "upper": [1.0, 1.0]},
           "noise": {"sigma": 0.25}}
    game = from_config(doc)
    assert isinstance(game, PowerManagement)
    assert game.sigma == 0.25
    with pytest.raises(ConfigError) as err:
        from_config({**doc, "extra": 1})
    assert err.value.key == "extra"
    with pytest.raises(ConfigError):
        from_config({"game": "nope", "params": {}})
    bad = {"game": "newsvendor_sa",
           "params": {"price": 2.0, "cost": 1.0, "x_bar": 100.0, "typo": 3}}
    with pytest.raises(ConfigError) as err2:
        from_config(bad)
    assert err2.value.key == "typo"


def test_newsvendor_rejects_additive_noise():
    with pytest.raises(ConfigError):
        games.from_config({"game": "newsvendor_sa",
                           "params": {"price": 2.0, "cost": 1.0, "x_bar": 10.0},
                           "noise": {"sigma": 0.3}})


def test_reported_gradient_bound_dominates_field():
    for game in (pm_instance(sigma=0.1),
                 QuadraticStream(beta=1.0, lower=[-1.0] * 2, upper=[1.0] * 2,
                                 sigma=0.5)):
        gsq = game.gradient_bound_sq()
        rng = np.random.default_rng(9)
        for _ in range(500):
            x = game.joint_set.sample(rng)
            assert float(np.linalg.norm(game.field(x, 1))) ** 2 <= gsq
