"""The four learning algorithms behind one uniform round interface.

Each learner owns its action, its feasible set, its schedule state and (for
the Newton-style family) its curvature state, plus its own random stream.
An update reads nothing outside the learner, which is what makes the
multi-agent loop decentralized.
"""

from dataclasses import dataclass

import numpy as np

from . import geometry
from .curvature import CurvatureState
from .errors import ConfigError, ContractViolation
from .schedules import (GeometricMaxState, adaogd_weight, adaons_weight,
                        default_p0, ogd_weight, ons_weight)

ALGORITHMS = ("ogd", "adaogd", "ons", "adaons")


@dataclass
class GradientSignal:
    """One agent's feedback for one round; `exact` marks a noiseless oracle."""

    vector: np.ndarray
    exact: bool = False

    def __post_init__(self):
        self.vector = np.ascontiguousarray(np.asarray(self.vector, dtype=np.float64))


class BlockLayout:
    """Partition of a joint action vector into per-agent blocks."""

    def __init__(self, dims):
        self.dims = tuple(int(d) for d in dims)
        self.offsets = np.concatenate([[0], np.cumsum(self.dims)])
        self._slices = [slice(int(a), int(b))
                        for a, b in zip(self.offsets[:-1], self.offsets[1:])]

    @property
    def total_dim(self):
        return int(self.offsets[-1])

    def slices(self):
        return self._slices

    def split(self, x):
        return [x[s] for s in self.slices()]

    def join(self, blocks):
        return np.concatenate([np.atleast_1d(b) for b in blocks])


class Learner:
    def __init__(self, algorithm, feasible_set, x1, horizon, known_params=None,
                 rng=None):
        if algorithm not in ALGORITHMS:
            raise ConfigError(f"unknown algorithm {algorithm!r}", key="algorithm")
        x1 = np.ascontiguousarray(np.asarray(x1, dtype=np.float64))
        if horizon < 1:
            raise ContractViolation("horizon must be >= 1")
        if not feasible_set.contains(x1, tol=1e-9):
            raise ContractViolation("initial action is infeasible")

        self.algorithm = algorithm
        self.feasible_set = feasible_set
        self.action = feasible_set.project(x1)
        self.horizon = horizon
        self.round = 1
        self.rng = rng
        self.beta = None
        self.eta_fixed = None
        self.schedule = None
        self.curvature = None
        self.last_weight = None

        adaptive = algorithm in ("adaogd", "adaons")
        if adaptive:
            if known_params:
                raise ConfigError(
                    f"{algorithm} is parameter-free; drop known_params",
                    key="known_params",
                )
            if rng is None:
                raise ConfigError(
                    f"{algorithm} draws random step weights and needs an rng",
                    key="rng",
                )
            self.schedule = GeometricMaxState(default_p0(horizon))
        elif algorithm == "ogd":
            if not known_params or "beta" not in known_params:
                raise ConfigError("ogd needs known_params with beta", key="known_params")
            self.beta = float(known_params["beta"])
            if not self.beta > 0:
                raise ConfigError("beta must be positive", key="known_params")
        else:  # ons
            needed = ("G", "D", "alpha")
            if not known_params or any(k not in known_params for k in needed):
                raise ConfigError("ons needs known_params with G, D, alpha",
                                  key="known_params")
            self.eta_fixed = ons_weight(known_params["G"], known_params["D"],
                                        known_params["alpha"])

        if algorithm in ("ons", "adaons"):
            self.curvature = CurvatureState(feasible_set.dim)

    @property
    def dim(self):
        return self.feasible_set.dim

    def step(self, signal):
        """Consume one gradient signal and produce the next action."""
        v = signal.vector
        if v.shape[0] != self.dim:
            raise ContractViolation("signal dimension mismatch")
        t = self.round

        if self.algorithm == "ogd":
            eta = ogd_weight(self.beta, t)
            nxt = geometry.project_euclidean(self.feasible_set, self.action - v / eta)
        elif self.algorithm == "adaogd":
            self.schedule.draw(self.rng)
            eta = adaogd_weight(t, self.schedule)
            nxt = geometry.project_euclidean(self.feasible_set, self.action - v / eta)
        elif self.algorithm == "ons":
            if not signal.exact:
                raise ContractViolation("ons requires exact gradient signals")
            eta = self.eta_fixed
            self.curvature.update(v)
            nxt = geometry.project_quadratic(self.feasible_set, self.action, v, eta,
                                             self.curvature)
        else:  # adaons
            if not signal.exact:
                raise ContractViolation("adaons requires exact gradient signals")
            self.schedule.draw(self.rng)
            eta = adaons_weight(self.schedule)
            self.curvature.update(v)
            nxt = geometry.project_quadratic(self.feasible_set, self.action, v, eta,
                                             self.curvature)

        self.last_weight = eta
        self.action = nxt
        self.round = t + 1
        return nxt


def learner_init(algorithm, feasible_set, x1, horizon, known_params=None, rng=None):
    return Learner(algorithm, feasible_set, x1, horizon, known_params, rng)


def learner_step(state, signal):
    return state, state.step(signal)


def ma_round(learners, oracle):
    """One synchronous round: query the oracle once, step every agent.

    The oracle is called at the current joint action before any learner
    mutates, so an oracle failure leaves all learners untouched.
    """
    layout = BlockLayout([ln.dim for ln in learners])
    t = learners[0].round
    if any(ln.round != t for ln in learners):
        raise ContractViolation("learners are out of sync")
    joint = layout.join([ln.action for ln in learners])
    signals = oracle(joint, t)
    if len(signals) != len(learners):
        raise ContractViolation("oracle returned wrong number of signal blocks")
    new_blocks = [ln.step(sig) for ln, sig in zip(learners, signals)]
    return learners, layout.join(new_blocks)
