"""Step-size (prox-weight) rules, adaptive and not, plus geometric sampling.

Convention used throughout the package: eta is the coefficient of the
quadratic prox term, so the effective gradient step length is 1/eta.
"""

import math
from dataclasses import dataclass

import numpy as np

from .errors import ContractViolation


def sample_geometric(p0, rng, size=None):
    """Geometric sample(s) on {1, 2, ...} with pmf (1-p0)^(k-1) p0.

    Inverse-CDF transform: ceil(ln U / ln(1-p0)) for U uniform on (0, 1].
    """
    if not 0.0 < p0 <= 1.0:
        raise ContractViolation("p0 must lie in (0, 1]")
    if p0 == 1.0:
        if size is None:
            return 1
        return np.ones(size, dtype=np.int64)
    u = 1.0 - rng.random(size)
    m = np.ceil(np.log(u) / math.log1p(-p0))
    if size is None:
        return max(1, int(m))
    return np.maximum(m.astype(np.int64), 1)


def default_p0(horizon):
    """Sampling probability 1 / ln(horizon + 10)."""
    if horizon < 1:
        raise ContractViolation("horizon must be >= 1")
    return 1.0 / math.log(horizon + 10.0)


@dataclass
class GeometricMaxState:
    """Running maximum of geometric draws; the whole adaptive-schedule state."""

    p0: float
    running_max: int = 0
    samples_drawn: int = 0

    def __post_init__(self):
        if not 0.0 < self.p0 <= 1.0:
            raise ContractViolation("p0 must lie in (0, 1]")

    def draw(self, rng):
        m = sample_geometric(self.p0, rng)
        self.samples_drawn += 1
        if m > self.running_max:
            self.running_max = m
        return m


def adaogd_weight(t, state):
    """(t+1) / sqrt(1 + running max); grows linearly in the round index."""
    if state.running_max < 1:
        raise ContractViolation("adaptive weight needs at least one sample")
    return (t + 1) / math.sqrt(1.0 + state.running_max)


def adaons_weight(state):
    """1 / sqrt(1 + running max); non-increasing along any sample path."""
    if state.running_max < 1:
        raise ContractViolation("adaptive weight needs at least one sample")
    return 1.0 / math.sqrt(1.0 + state.running_max)


def ogd_weight(beta, t):
    if not beta > 0:
        raise ContractViolation("beta must be positive")
    return beta * (t + 1)


def ons_weight(G, D, alpha):
    if not (G > 0 and D > 0 and alpha > 0):
        raise ContractViolation("G, D, alpha must all be positive")
    return 0.5 * min(1.0 / (4.0 * G * D), alpha)


@dataclass(frozen=True)
class MaxStats:
    mean_max: float
    stderr: float
    tail_counts: dict
    trials: int


def geometric_max_stats(p0, n, trials, rng, thresholds=(), chunk=2_000_000):
    """Monte Carlo summary of the max of n iid geometric draws.

    Returns the empirical mean (with standard error) and, per requested
    threshold x, the number of trials whose max was <= x.
    """
    if n < 1 or trials < 1:
        raise ContractViolation("n and trials must be >= 1")
    maxima = np.empty(trials, dtype=np.int64)
    rows_per_chunk = max(1, chunk // n)
    done = 0
    while done < trials:
        rows = min(rows_per_chunk, trials - done)
        block = sample_geometric(p0, rng, size=(rows, n))
        maxima[done:done + rows] = block.max(axis=1)
        done += rows
    mean = float(maxima.mean())
    stderr = float(maxima.std(ddof=1) / np.sqrt(trials)) if trials > 1 else 0.0
    tails = {float(x): int(np.count_nonzero(maxima <= x)) for x in thresholds}
    return MaxStats(mean_max=mean, stderr=stderr, tail_counts=tails, trials=trials)
