import math

import numpy as np
import pytest

from noregret import games, harness, metrics
from noregret.errors import ContractViolation
from noregret.geometry import Box
from noregret.metrics import (BestFixedAction, NashEquilibrium,
                              best_in_hindsight, fit_rate, gap_estimate,
                              last_iterate_distance, nash_oracle, regret_curve)


def quadratic_with_targets(targets, beta=1.0, lower=(0.0,), upper=(1.0,)):
    qs = games.QuadraticStream(beta=beta, lower=list(lower), upper=list(upper))
    qs._targets = np.asarray(targets, dtype=np.float64)
    return qs


def test_hindsight_projected_mean():
    qs = quadratic_with_targets([[0.2], [0.8]])
    best = best_in_hindsight(qs, 2)
    assert best.point[0] == pytest.approx(0.5)
    assert best.value == pytest.approx(0.5 * 0.3**2 + 0.5 * 0.3**2)


def test_hindsight_newsvendor_critical_fractile():
    nv = games.NewsvendorSA(price=2.0, cost=1.0, x_bar=100.0)
    best = best_in_hindsight(nv, 10)
    assert best.point[0] == pytest.approx(50.0)
    # independent check: 1-d grid minimization of the expected cost
    grid = np.linspace(0.0, 100.0, 200_001)
    costs = (2.0 - 1.0) * (100.0 - grid) ** 2 / 200.0 + 1.0 * grid**2 / 200.0
    assert best.point[0] == pytest.approx(grid[np.argmin(costs)], abs=1e-3)


def test_hindsight_identical_interior_costs():
    qs = quadratic_with_targets([[0.4]] * 5, lower=(0.0,), upper=(1.0,))
    best = best_in_hindsight(qs, 5)
    assert best.point[0] == pytest.approx(0.4)
    assert best.value == pytest.approx(0.0, abs=1e-16)


def test_hindsight_portfolio_residual_contract():
    game = games.PortfolioStream(dim=4, stream_seed=2)
    horizon = 5000
    best = best_in_hindsight(game, horizon)
    g = metrics._avg_field(game, best.point, horizon)
    r = np.linalg.norm(best.point - game.joint_set.project(best.point - g))
    assert r <= 1e-10
    # no feasible point sampled nearby does better
    rng = np.random.default_rng(0)
    for _ in range(200):
        y = game.joint_set.sample(rng)
        assert game.cum_costs(best.point, [horizon])[0] <= \
            game.cum_costs(y, [horizon])[0] + 1e-9


def test_regret_zero_at_best_point():
    qs = quadratic_with_targets([[0.2], [0.8]])
    best = best_in_hindsight(qs, 2)
    cum = qs.cum_costs(best.point, [1, 2])
    reg = regret_curve([1, 2], cum, qs, best)
    assert np.allclose(reg, 0.0, atol=1e-15)


def test_regret_single_round_half():
    # f(x) = x^2 / 2 on [-1, 1], played at x = 1: regret 0.5
    qs = quadratic_with_targets([[0.0]], lower=(-1.0,), upper=(1.0,))
    best = best_in_hindsight(qs, 1)
    alg_cost = qs.cost(np.array([1.0]), 1)
    reg = regret_curve([1], [alg_cost], qs, best)
    assert reg[0] == pytest.approx(0.5)


def test_regret_requires_best_fixed_ground():
    qs = quadratic_with_targets([[0.2]])
    with pytest.raises(ContractViolation):
        regret_curve([1], [0.0], qs, NashEquilibrium(np.zeros(1), 0.0))


def test_nash_oracle_power_management():
    pm = games.PowerManagement(gain=[[2.0, 1.0], [1.0, 2.0]],
                               target_rates=[0.5, 0.5],
                               thermal_noise=[1.0, 1.0], upper=[1.0, 1.0])
    ne = nash_oracle(pm)
    assert np.allclose(ne.point, [1 / 3, 1 / 3], atol=1e-12)
    assert ne.residual <= 1e-10
    # sampled variational-inequality condition
    rng = np.random.default_rng(1)
    v = pm.field(ne.point)
    for _ in range(2000):
        x = pm.joint_set.sample(rng)
        assert (ne.point - x) @ v <= 1e-8


def test_nash_oracle_newsvendor_ma_fixed_point():
    nv = games.NewsvendorMA(price=2.0, costs=[1.0, 1.0], x_bars=[1.0, 1.0])
    ne = nash_oracle(nv)
    # p F_i(x) = p - c_i at the equilibrium
    s = float(np.sum(ne.point)) - ne.point
    F = 1.0 - (1.0 + s) / (1.0 + float(np.sum(ne.point))) ** 2
    assert np.allclose(2.0 * F, 1.0, atol=1e-9)
    assert np.allclose(ne.point, (math.sqrt(5) - 1) / 4, atol=1e-9)


def test_nash_oracle_vi_fallback():
    ec = games.EcQuadratic(a=[[1.0, 0.5], [0.5, 1.0]], dims=[1, 1])
    ne = nash_oracle(ec)
    assert np.allclose(ne.point, 0.0, atol=1e-9)


def test_last_iterate_distance_values():
    ne = NashEquilibrium(np.array([1 / 3, 1 / 3]), 0.0)
    seq = last_iterate_distance([np.array([1 / 3, 1 / 3]),
                                 np.array([1 / 3 + 0.1, 1 / 3])], ne)
    assert seq[0] == 0.0
    assert seq[1] == pytest.approx(0.01)


def test_gap_zero_at_equilibrium():
    ec = games.EcQuadratic(a=[[1.0, 0.5], [0.5, 1.0]], dims=[1, 1])
    assert gap_estimate(np.zeros(2), ec, rng=np.random.default_rng(0)) == 0.0


def test_gap_constant_field_closed_form():
    class ConstField(games.Game):
        name = "const"

        def field(self, x, t=1):
            return np.array([1.0, -2.0])

    cf = ConstField([Box([-1.0, -1.0], [1.0, 1.0])])
    x_hat = np.array([0.5, 0.5])
    c = np.array([1.0, -2.0])
    expect = float(c @ x_hat) - (-1.0 * 1.0 - 2.0 * 1.0)
    got = gap_estimate(x_hat, cf, rng=np.random.default_rng(1))
    assert got == pytest.approx(expect, abs=1e-9)


def test_gap_matches_dense_grid_on_ec_toy():
    ec = games.EcQuadratic(a=[[1.0, 0.5], [0.5, 1.0]], dims=[1, 1])
    x_hat = np.array([0.6, -0.3])
    xs = np.linspace(-1, 1, 1000)
    X, Y = np.meshgrid(xs, xs, indexing="ij")
    M = np.array([[1.0, 0.5], [0.5, 1.0]])
    VX = M[0, 0] * X + M[0, 1] * Y
    VY = M[1, 0] * X + M[1, 1] * Y
    phi = (x_hat[0] - X) * VX + (x_hat[1] - Y) * VY
    grid_sup = float(phi.max())
    got = gap_estimate(x_hat, ec, rng=np.random.default_rng(2))
    assert got == pytest.approx(grid_sup, abs=1e-3)
    assert got >= 0.0


def test_gap_nonnegative_everywhere():
    ec = games.EcQuadratic(a=[[1.0, 0.5], [0.5, 1.0]], dims=[1, 1])
    rng = np.random.default_rng(3)
    for _ in range(20):
        x_hat = ec.joint_set.sample(rng)
        assert gap_estimate(x_hat, ec, starts=4, iters=100, rng=rng) >= 0.0


def test_fit_rate_exact_power_laws():
    Ts = [10, 100, 1000]
    assert fit_rate(Ts, [10.0 / t for t in Ts]) == pytest.approx(-1.0, abs=1e-12)
    assert fit_rate(Ts, [3.0, 3.0, 3.0]) == pytest.approx(0.0, abs=1e-12)
    Ts2 = [1000, 10_000, 100_000]
    means = [math.log(t) / t for t in Ts2]
    slope = fit_rate(Ts2, means)
    assert -1.0 < slope < -0.8


def test_fit_rate_contract():
    with pytest.raises(ContractViolation):
        fit_rate([10, 100], [1.0, 0.1])
    with pytest.raises(ContractViolation):
        fit_rate([10, 100, 1000], [1.0, -0.1, 0.01])
