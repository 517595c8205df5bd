"""Game catalog: gradient oracles, noise, curvature calculators, probes.

Streams (quadratic / linear regression / portfolio) are fixed cost
sequences drawn once from a stream seed; replication randomness only enters
through oracle noise and the learners' schedules. Static games (power
management, newsvendor, the exp-concave quadratic game) expose their joint
gradient field directly.
"""

import itertools
import math
import warnings
from dataclasses import dataclass

import numpy as np

from .errors import ConfigError, ContractViolation
from .geometry import Ball, Box, Product
from .geometry import Simplex
from .learners import BlockLayout, GradientSignal


def newsvendor_signal(price, cost, order, demand):
    """Censored-demand gradient signal for one retailer.

    Observable sales are min(order, demand): leftover stock (demand < order)
    reveals the overage slope `cost`; selling out reveals `cost - price`.
    Ties demand == order cannot be distinguished from demand > order by the
    sales observation and take the sold-out branch. Unbiased for
    p F(x) - p + c when the demand law is continuous at x.
    """
    if order < 0 or demand < 0:
        raise ContractViolation("order and demand must be nonnegative")
    return cost if demand < order else cost - price


def sample_ma_demand(others_sum, u):
    """Inverse-CDF demand draw for the multi-retailer game.

    The demand CDF given the other retailers' total stock s is
    F(z) = 1 - (1+s) / (1+z+s)^2, with an atom of mass s/(1+s) at zero.
    Accepts scalar or array u; every entry must lie strictly in (0, 1).
    """
    s = others_sum
    if np.any(np.asarray(s) < 0):
        raise ContractViolation("others_sum must be nonnegative")
    u_arr = np.asarray(u, dtype=np.float64)
    if np.any(u_arr <= 0.0) or np.any(u_arr >= 1.0):
        raise ContractViolation("u must lie strictly in (0, 1)")
    z = np.sqrt((1.0 + s) / (1.0 - u_arr)) - (1.0 + s)
    z = np.maximum(z, 0.0)
    return float(z) if np.isscalar(u) else z


def pm_beta(gain, target_rates):
    """Strong-monotonicity modulus of the power-management game.

    Builds W with W_ij = r_i G_ij / G_ii off the diagonal and returns the
    smallest eigenvalue of I - (W + W')/2. Non-positive output means the
    instance is not strongly monotone; a warning is emitted in that case.
    """
    G = np.asarray(gain, dtype=np.float64)
    r = np.asarray(target_rates, dtype=np.float64)
    n = G.shape[0]
    if np.any(np.diag(G) <= 0):
        raise ContractViolation("gain matrix needs a strictly positive diagonal")
    W = (r[:, None] * G) / np.diag(G)[:, None]
    np.fill_diagonal(W, 0.0)
    beta = float(np.linalg.eigvalsh(np.eye(n) - 0.5 * (W + W.T))[0])
    if beta <= 0:
        warnings.warn("power-management instance is not strongly monotone "
                      f"(modulus {beta:.3g})", stacklevel=2)
    return beta


def newsvendor_ma_beta(price, x_bar):
    """p / (1 + sum of stock caps)^3."""
    x_bar = np.asarray(x_bar, dtype=np.float64)
    if not price > 0 or np.any(x_bar < 0):
        raise ContractViolation("need price > 0 and nonnegative stock caps")
    return float(price / (1.0 + float(np.sum(x_bar))) ** 3)


class Game:
    """Common behavior: block layout, noise, default oracle and bounds."""

    name = "game"
    intrinsic_noise = False

    def __init__(self, sets, sigma=0.0):
        sigma = float(sigma)
        if not (sigma >= 0.0 and math.isfinite(sigma)):
            raise ConfigError("noise sigma must be finite and >= 0", key="sigma")
        self.sets = list(sets)
        self.sigma = sigma
        self.layout = BlockLayout([s.dim for s in self.sets])

    @property
    def n_agents(self):
        return len(self.sets)

    @property
    def dim(self):
        return self.layout.total_dim

    @property
    def joint_set(self):
        return self.sets[0] if len(self.sets) == 1 else Product(tuple(self.sets))

    @property
    def exact(self):
        return self.sigma == 0.0 and not self.intrinsic_noise

    def field(self, x, t=1):
        raise NotImplementedError

    def cost(self, x, t):
        """Round-t cost at x, when the instance defines one; else None."""
        return None

    def cum_costs(self, x, ts):
        """sum_{s<=t} f_s(x) at each t in ts, when costs are defined."""
        return None

    def hindsight_best(self, horizon):
        """Closed-form argmin of the cumulative cost, when available."""
        return None

    def nash_closed_form(self):
        return None

    def signals(self, x, t, rng, check=True):
        x = np.asarray(x, dtype=np.float64)
        if check and not self.joint_set.contains(x, tol=1e-9):
            raise ContractViolation("oracle queried at an infeasible point")
        v = self.field(x, t)
        if self.sigma > 0.0:
            v = v + self.sigma * rng.standard_normal(self.dim)
        exact = self.exact
        return [GradientSignal(v[s], exact=exact) for s in self.layout.slices()]

    def signal_matrix(self, x, t, rng, n):
        """n independent oracle draws at a fixed x, stacked row-wise."""
        x = np.asarray(x, dtype=np.float64)
        v = self.field(x, t)
        out = np.tile(v, (n, 1))
        if self.sigma > 0.0:
            out += self.sigma * rng.standard_normal((n, self.dim))
        return out

    def _field_sup_samples(self, rng, samples):
        best = 0.0
        js = self.joint_set
        for _ in range(samples):
            x = js.sample(rng)
            best = max(best, float(np.linalg.norm(self.field(x, 1))))
        if all(isinstance(s, Box) for s in self.sets) and self.dim <= 12:
            lows = np.concatenate([s.lower for s in self.sets])
            highs = np.concatenate([s.upper for s in self.sets])
            for corner in itertools.product(*zip(lows, highs)):
                v = self.field(np.array(corner), 1)
                best = max(best, float(np.linalg.norm(v)))
        return best

    def gradient_bound_sq(self, samples=4096, seed=0):
        """Reported second-moment bound for the signals.

        Sampled sup of the mean field with a 10% safety margin, plus the
        additive-noise variance d sigma^2.
        """
        rng = np.random.Generator(np.random.PCG64(np.random.SeedSequence((0xB0D5, seed))))
        sup = self._field_sup_samples(rng, samples)
        return (1.1 * sup) ** 2 + self.dim * self.sigma**2


def _grow(n):
    size = 1024
    while size < n:
        size *= 2
    return size


def _stream_rng(seed, tag):
    return np.random.Generator(np.random.PCG64(np.random.SeedSequence((int(seed), tag))))


class QuadraticStream(Game):
    """Single agent, f_t(x) = beta/2 |x - theta_t|^2 with box targets."""

    name = "quadratic_stream"

    def __init__(self, beta, lower, upper, stream_seed=0, sigma=0.0):
        if not beta > 0:
            raise ConfigError("beta must be positive", key="beta")
        super().__init__([Box(lower, upper)], sigma)
        self.beta = float(beta)
        self.stream_seed = int(stream_seed)
        self._targets = np.empty((0, self.dim))

    def targets(self, horizon):
        if self._targets.shape[0] < horizon:
            n = _grow(horizon)
            rng = _stream_rng(self.stream_seed, 1)
            box = self.sets[0]
            u = rng.random((n, self.dim))
            self._targets = box.lower + u * (box.upper - box.lower)
        return self._targets[:horizon]

    def field(self, x, t=1):
        theta = self.targets(t)[t - 1]
        return self.beta * (x - theta)

    def cost(self, x, t):
        theta = self.targets(t)[t - 1]
        d = x - theta
        return 0.5 * self.beta * float(d @ d)

    def cum_costs(self, x, ts):
        ts = np.asarray(ts, dtype=np.int64)
        horizon = int(ts.max())
        diffs = x[None, :] - self.targets(horizon)
        per_round = 0.5 * self.beta * np.sum(diffs * diffs, axis=1)
        return np.cumsum(per_round)[ts - 1]

    def hindsight_best(self, horizon):
        return self.sets[0].project(self.targets(horizon).mean(axis=0))

    def gradient_bound_sq(self, samples=4096, seed=0):
        box = self.sets[0]
        span = float(np.linalg.norm(box.upper - box.lower))
        return (self.beta * span) ** 2 + self.dim * self.sigma**2


class LinearRegressionStream(Game):
    """Single agent, f_t(x) = (a_t.x - b_t)^2 on a centered ball."""

    name = "linear_regression_stream"

    def __init__(self, dim, radius=1.0, stream_seed=0, sigma=0.0, label_noise=0.1):
        super().__init__([Ball(np.zeros(dim), radius)], sigma)
        self.stream_seed = int(stream_seed)
        self.label_noise = float(label_noise)
        w = _stream_rng(stream_seed, 0).standard_normal(dim)
        self.w_true = (0.5 * radius / np.linalg.norm(w)) * w
        self._features = np.empty((0, dim))
        self._labels = np.empty(0)

    def rounds(self, horizon):
        if self._features.shape[0] < horizon:
            n = _grow(horizon)
            a = _stream_rng(self.stream_seed, 1).random((n, self.dim)) * 2.0 - 1.0
            eps = _stream_rng(self.stream_seed, 2).standard_normal(n)
            self._features = a
            self._labels = a @ self.w_true + self.label_noise * eps
        return self._features[:horizon], self._labels[:horizon]

    def field(self, x, t=1):
        a, b = self.rounds(t)
        r = float(a[t - 1] @ x) - b[t - 1]
        return 2.0 * r * a[t - 1]

    def cost(self, x, t):
        a, b = self.rounds(t)
        return (float(a[t - 1] @ x) - b[t - 1]) ** 2

    def cum_costs(self, x, ts):
        ts = np.asarray(ts, dtype=np.int64)
        a, b = self.rounds(int(ts.max()))
        res = a @ x - b
        return np.cumsum(res * res)[ts - 1]

    def avg_hessian(self, x, horizon):
        a, _ = self.rounds(horizon)
        return 2.0 * (a.T @ a) / horizon

    def hindsight_best(self, horizon):
        a, b = self.rounds(horizon)
        sol, *_ = np.linalg.lstsq(a, b, rcond=None)
        if self.sets[0].contains(sol, tol=0.0):
            return sol
        return None

    def gradient_bound_sq(self, samples=4096, seed=0):
        rng = np.random.Generator(np.random.PCG64(np.random.SeedSequence((0xB0D5, seed))))
        a, b = self.rounds(256)
        best = 0.0
        for _ in range(samples):
            x = self.joint_set.sample(rng)
            res = a @ x - b
            best = max(best, float(np.max(2.0 * np.abs(res) * np.linalg.norm(a, axis=1))))
        return (1.1 * best) ** 2 + self.dim * self.sigma**2


class PortfolioStream(Game):
    """Single agent on the simplex, f_t(x) = -log(a_t.x)."""

    name = "portfolio_stream"

    def __init__(self, dim, lo=0.5, hi=2.0, stream_seed=0, sigma=0.0):
        if not 0 < lo <= hi:
            raise ConfigError("price relatives need 0 < lo <= hi", key="lo")
        super().__init__([Simplex(dim)], sigma)
        self.lo, self.hi = float(lo), float(hi)
        self.stream_seed = int(stream_seed)
        self._prices = np.empty((0, dim))

    def prices(self, horizon):
        if self._prices.shape[0] < horizon:
            n = _grow(horizon)
            u = _stream_rng(self.stream_seed, 1).random((n, self.dim))
            self._prices = self.lo + u * (self.hi - self.lo)
        return self._prices[:horizon]

    def field(self, x, t=1):
        a = self.prices(t)[t - 1]
        return -a / float(a @ x)

    def cost(self, x, t):
        a = self.prices(t)[t - 1]
        return -math.log(float(a @ x))

    def cum_costs(self, x, ts):
        ts = np.asarray(ts, dtype=np.int64)
        w = self.prices(int(ts.max())) @ x
        return np.cumsum(-np.log(w))[ts - 1]

    def avg_hessian(self, x, horizon):
        a = self.prices(horizon)
        w = a @ x
        scaled = a / w[:, None]
        return (scaled.T @ scaled) / horizon

    def ons_ground_truth(self):
        """Exact (G, D, alpha) for the non-adaptive Newton baseline."""
        return {
            "G": self.hi * math.sqrt(self.dim) / self.lo,
            "D": self.sets[0].diameter(),
            "alpha": 1.0,
        }

    def gradient_bound_sq(self, samples=4096, seed=0):
        g = self.hi * math.sqrt(self.dim) / self.lo
        return g * g + self.dim * self.sigma**2


class PowerManagement(Game):
    """Target-rate power control on N one-dimensional links.

    v_i(a) = a_i - r_i (sum_{j != i} G_ij a_j + eta_i) / G_ii.
    """

    name = "power_management"

    def __init__(self, gain, target_rates, thermal_noise, upper=None, sigma=0.0):
        G = np.asarray(gain, dtype=np.float64)
        r = np.asarray(target_rates, dtype=np.float64)
        eta = np.asarray(thermal_noise, dtype=np.float64)
        n = G.shape[0]
        if G.shape != (n, n):
            raise ConfigError("gain must be a square matrix", key="gain")
        if np.any(np.diag(G) <= 0):
            raise ConfigError("gain diagonal must be strictly positive", key="gain")
        if np.any(r < 0) or np.any(eta < 0):
            raise ConfigError("target rates and thermal noise must be >= 0",
                              key="target_rates")
        self.gain, self.r, self.eta_th = G, r, eta
        if upper is None:
            interior = self._interior_nash()
            if interior is None or np.any(interior <= 0):
                raise ConfigError("cannot derive boxes: interior equilibrium "
                                  "not positive; pass upper explicitly", key="upper")
            upper = 2.0 * interior
        upper = np.asarray(upper, dtype=np.float64)
        sets = [Box([0.0], [float(u)]) for u in upper]
        super().__init__(sets, sigma)
        self.upper = upper

    def _interior_nash(self):
        n = self.gain.shape[0]
        W = (self.r[:, None] * self.gain) / np.diag(self.gain)[:, None]
        np.fill_diagonal(W, 0.0)
        b = self.r * self.eta_th / np.diag(self.gain)
        try:
            return np.linalg.solve(np.eye(n) - W, b)
        except np.linalg.LinAlgError:
            return None

    def field(self, x, t=1):
        diag = np.diag(self.gain)
        interference = self.gain @ x - diag * x
        return x - self.r * (interference + self.eta_th) / diag

    def nash_closed_form(self):
        a = self._interior_nash()
        if a is None:
            return None
        lo = np.zeros(self.n_agents)
        if np.any(a < lo) or np.any(a > self.upper):
            return None
        return a

    def beta(self):
        return pm_beta(self.gain, self.r)


class NewsvendorSA(Game):
    """Single retailer with lost sales and uniform demand on [0, x_bar]."""

    name = "newsvendor_sa"
    intrinsic_noise = True

    def __init__(self, price, cost, x_bar, sigma=0.0):
        if not (0 < cost <= price):
            raise ConfigError("need 0 < cost <= price", key="cost")
        if not x_bar > 0:
            raise ConfigError("x_bar must be positive", key="x_bar")
        if sigma != 0.0:
            raise ConfigError("newsvendor noise is the demand draw; sigma must be 0",
                              key="sigma")
        super().__init__([Box([0.0], [float(x_bar)])], 0.0)
        self.price, self.c, self.x_bar = float(price), float(cost), float(x_bar)

    def field(self, x, t=1):
        return np.array([self.price * x[0] / self.x_bar - self.price + self.c])

    def signals(self, x, t, rng, check=True):
        x = np.asarray(x, dtype=np.float64)
        if check and not self.joint_set.contains(x, tol=1e-9):
            raise ContractViolation("oracle queried at an infeasible point")
        demand = rng.random() * self.x_bar
        xi = newsvendor_signal(self.price, self.c, float(x[0]), demand)
        return [GradientSignal(np.array([xi]), exact=False)]

    def signal_matrix(self, x, t, rng, n):
        demands = rng.random(n) * self.x_bar
        vals = np.where(demands < x[0], self.c, self.c - self.price)
        return vals[:, None]

    def expected_cost(self, x):
        # (p-c) E[(D-x)^+] + c E[(x-D)^+] under uniform demand
        p, c, xb = self.price, self.c, self.x_bar
        x = float(x)
        return (p - c) * (xb - x) ** 2 / (2 * xb) + c * x**2 / (2 * xb)

    def cost(self, x, t):
        return self.expected_cost(x[0])

    def cum_costs(self, x, ts):
        ts = np.asarray(ts, dtype=np.int64)
        return self.expected_cost(x[0]) * ts.astype(np.float64)

    def hindsight_best(self, horizon):
        return self.nash_closed_form()

    def nash_closed_form(self):
        # critical fractile F(x*) = (p - c) / p with F(z) = z / x_bar
        return np.array([self.x_bar * (self.price - self.c) / self.price])

    def beta(self):
        # density lower bound 1/x_bar gives strong convexity p/x_bar
        return self.price / self.x_bar

    def gradient_bound_sq(self, samples=4096, seed=0):
        # signals take only the values c and c - p
        return max(self.c, self.price - self.c) ** 2


class NewsvendorMA(Game):
    """Multi-retailer newsvendor with stock-dependent demand laws."""

    name = "newsvendor_ma"
    intrinsic_noise = True

    def __init__(self, price, costs, x_bars, sigma=0.0):
        costs = np.asarray(costs, dtype=np.float64)
        x_bars = np.asarray(x_bars, dtype=np.float64)
        if np.any(costs <= 0) or np.any(costs > price):
            raise ConfigError("need 0 < cost_i <= price", key="costs")
        if np.any(x_bars <= 0):
            raise ConfigError("stock caps must be positive", key="x_bars")
        if sigma != 0.0:
            raise ConfigError("newsvendor noise is the demand draw; sigma must be 0",
                              key="sigma")
        super().__init__([Box([0.0], [float(u)]) for u in x_bars], 0.0)
        self.price = float(price)
        self.costs = costs
        self.x_bars = x_bars

    def field(self, x, t=1):
        S = float(np.sum(x))
        s = S - x
        F = 1.0 - (1.0 + s) / (1.0 + S) ** 2
        return self.price * F - self.price + self.costs

    def signals(self, x, t, rng, check=True):
        x = np.asarray(x, dtype=np.float64)
        if check and not self.joint_set.contains(x, tol=1e-9):
            raise ContractViolation("oracle queried at an infeasible point")
        S = float(np.sum(x))
        out = []
        for i in range(self.n_agents):
            u = rng.random()
            while u <= 0.0:
                u = rng.random()
            demand = sample_ma_demand(S - x[i], u)
            xi = newsvendor_signal(self.price, self.costs[i], float(x[i]), demand)
            out.append(GradientSignal(np.array([xi]), exact=False))
        return out

    def signal_matrix(self, x, t, rng, n):
        S = float(np.sum(x))
        cols = []
        for i in range(self.n_agents):
            u = rng.random(n)
            u = np.clip(u, np.finfo(float).tiny, None)
            demands = sample_ma_demand(S - x[i], u)
            cols.append(np.where(demands < x[i], self.costs[i],
                                 self.costs[i] - self.price))
        return np.stack(cols, axis=1)

    def nash_closed_form(self):
        # damped fixed point on p F_i(x) = p - c_i; valid while interior
        q = (self.price - self.costs) / self.price
        x = 0.5 * self.x_bars.copy()
        for _ in range(10_000):
            S = float(np.sum(x))
            s = S - x
            target = np.sqrt((1.0 + s) / (1.0 - q)) - (1.0 + s)
            x_new = np.clip(0.5 * x + 0.5 * target, 0.0, self.x_bars)
            if np.max(np.abs(x_new - x)) < 1e-13:
                x = x_new
                break
            x = x_new
        if np.max(np.abs(self.field(x))) > 1e-10:
            return None
        return x

    def beta(self):
        return newsvendor_ma_beta(self.price, self.x_bars)

    def gradient_bound_sq(self, samples=4096, seed=0):
        return float(np.sum(np.maximum(self.costs, self.price - self.costs) ** 2))


class EcQuadratic(Game):
    """Agents with costs u_i(x) = (a_i.x)^2 / 2 over the joint action."""

    name = "ec_quadratic"

    def __init__(self, a, dims=None, lower=None, upper=None, radius=None, sigma=0.0):
        A = np.asarray(a, dtype=np.float64)
        if A.ndim != 2:
            raise ConfigError("a must be a matrix with one row per agent", key="a")
        n, total = A.shape
        if dims is None:
            dims = [total] if n == 1 else [1] * n
        dims = [int(d) for d in dims]
        if sum(dims) != total or len(dims) != n:
            raise ConfigError("dims must partition the columns of a, one block "
                              "per row", key="dims")
        if radius is not None:
            if n != 1:
                raise ConfigError("ball action sets are single-agent only",
                                  key="radius")
            sets = [Ball(np.zeros(total), float(radius))]
        else:
            lo = np.full(total, -1.0) if lower is None else np.asarray(lower, float)
            hi = np.full(total, 1.0) if upper is None else np.asarray(upper, float)
            layout = BlockLayout(dims)
            sets = [Box(lo[s], hi[s]) for s in layout.slices()]
        super().__init__(sets, sigma)
        self.a = A

    def field(self, x, t=1):
        m = self.a @ x
        out = np.empty(self.dim)
        for i, s in enumerate(self.layout.slices()):
            out[s] = m[i] * self.a[i, s]
        return out

    def cost(self, x, t):
        if self.n_agents != 1:
            return None
        return 0.5 * float(self.a[0] @ x) ** 2

    def cum_costs(self, x, ts):
        if self.n_agents != 1:
            return None
        ts = np.asarray(ts, dtype=np.int64)
        return self.cost(x, 1) * ts.astype(np.float64)

    def hindsight_best(self, horizon):
        return None

    def monotone_modulus(self):
        """lambda_min of the symmetrized field Jacobian (constant here)."""
        M = np.zeros((self.dim, self.dim))
        for i, s in enumerate(self.layout.slices()):
            M[s, :] = np.outer(self.a[i, s], self.a[i])
        return float(np.linalg.eigvalsh(0.5 * (M + M.T))[0])


_REGISTRY = {
    QuadraticStream.name: (QuadraticStream,
                           {"beta", "lower", "upper", "stream_seed"}),
    LinearRegressionStream.name: (LinearRegressionStream,
                                  {"dim", "radius", "stream_seed", "label_noise"}),
    PortfolioStream.name: (PortfolioStream, {"dim", "lo", "hi", "stream_seed"}),
    PowerManagement.name: (PowerManagement,
                           {"gain", "target_rates", "thermal_noise", "upper"}),
    NewsvendorSA.name: (NewsvendorSA, {"price", "cost", "x_bar"}),
    NewsvendorMA.name: (NewsvendorMA, {"price", "costs", "x_bars"}),
    EcQuadratic.name: (EcQuadratic, {"a", "dims", "lower", "upper", "radius"}),
}


def from_config(doc):
    """Build a game from an instance document {game, params, noise}."""
    if not isinstance(doc, dict):
        raise ConfigError("instance document must be a JSON object")
    extra = set(doc) - {"game", "params", "noise"}
    if extra:
        raise ConfigError(f"unknown instance key {sorted(extra)[0]!r}",
                          key=sorted(extra)[0])
    if "game" not in doc:
        raise ConfigError("instance document needs a 'game' key", key="game")
    name = doc["game"]
    if name not in _REGISTRY:
        raise ConfigError(f"unknown game {name!r}", key="game")
    cls, allowed = _REGISTRY[name]
    params = doc.get("params", {})
    bad = set(params) - allowed
    if bad:
        raise ConfigError(f"unknown param {sorted(bad)[0]!r} for game {name}",
                          key=sorted(bad)[0])
    noise = doc.get("noise", {"sigma": 0.0})
    if set(noise) - {"sigma"}:
        bad_key = sorted(set(noise) - {"sigma"})[0]
        raise ConfigError(f"unknown noise key {bad_key!r}", key=bad_key)
    try:
        return cls(**params, sigma=float(noise.get("sigma", 0.0)))
    except TypeError as exc:
        raise ConfigError(f"bad params for game {name}: {exc}", key="params")


def gradient_oracle(game, x, t, rng):
    """Per-agent signal blocks with E[signal | x] equal to the game field."""
    return game.signals(x, t, rng)


@dataclass(frozen=True)
class ProbeReport:
    kind: str
    passed: bool
    pairs: int
    claim: float
    worst: float
    note: str = ""

    def __str__(self):
        status = "PASS" if self.passed else "FAIL"
        return (f"{self.kind} probe: {status} (claim {self.claim:.6g}, "
                f"worst {self.worst:.6g}, pairs {self.pairs}){self.note}")


def monotonicity_probe(game, beta_claim, pairs, rng, t=1):
    """Sampled check of <x'-x, v(x')-v(x)> >= beta |x'-x|^2."""
    js = game.joint_set
    worst = math.inf
    for _ in range(pairs):
        x = js.sample(rng)
        y = js.sample(rng)
        d = y - x
        nsq = float(d @ d)
        if nsq < 1e-18:
            continue
        ratio = float(d @ (game.field(y, t) - game.field(x, t))) / nsq
        worst = min(worst, ratio)
    passed = worst >= beta_claim - 1e-9
    return ProbeReport("monotonicity", passed, pairs, beta_claim, worst)


def ec_probe(game, alpha_claim, G, D, pairs, rng, t=1):
    """Sampled check of the exp-concave game inequality.

    <x'-x, v(x')-v(x)> must dominate
    (1/4) min(1/(4GD), alpha) sum_i [ (d_i.v_i(x'))^2 + (d_i.v_i(x))^2 ].
    Reports the worst margin (left minus right side).
    """
    coef = 0.25 * min(1.0 / (4.0 * G * D), alpha_claim)
    js = game.joint_set
    slices = game.layout.slices()
    worst = math.inf
    for _ in range(pairs):
        x = js.sample(rng)
        y = js.sample(rng)
        d = y - x
        vx = game.field(x, t)
        vy = game.field(y, t)
        lhs = float(d @ (vy - vx))
        rhs = 0.0
        for s in slices:
            rhs += float(d[s] @ vy[s]) ** 2 + float(d[s] @ vx[s]) ** 2
        worst = min(worst, lhs - coef * rhs)
    passed = worst >= -1e-9
    return ProbeReport("exp-concavity", passed, pairs, alpha_claim, worst)
