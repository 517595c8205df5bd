"""Adaptive no-regret learning: learners, games, metrics and a harness.

Parameter-free gradient and Newton-style online learners whose step
schedules are driven by the running maximum of geometric random draws,
alongside their non-adaptive baselines, a catalog of game instances with
(noisy) gradient oracles, and reproducible experiment tooling.
"""

from .curvature import CurvatureState, curvature_init, qf_bound_check, rank_one_update
from .errors import ConfigError, ContractViolation, SolverError
from .geometry import (Ball, Box, Product, Simplex, diameter, project_euclidean,
                       project_quadratic)
from .kernels import BACKEND
from .learners import (ALGORITHMS, BlockLayout, GradientSignal, Learner,
                       learner_init, learner_step, ma_round)
from .metrics import (BestFixedAction, NashEquilibrium, best_in_hindsight,
                      fit_rate, gap_estimate, last_iterate_distance, nash_oracle,
                      regret_curve)
from .schedules import (GeometricMaxState, adaogd_weight, adaons_weight,
                        default_p0, geometric_max_stats, ogd_weight, ons_weight,
                        sample_geometric)

__version__ = "0.1.0"

__all__ = [
    "ALGORITHMS", "BACKEND", "Ball", "BestFixedAction", "BlockLayout", "Box",
    "ConfigError", "ContractViolation", "CurvatureState", "GeometricMaxState",
    "GradientSignal", "Learner", "NashEquilibrium", "Product", "Simplex",
    "SolverError", "adaogd_weight", "adaons_weight", "best_in_hindsight",
    "curvature_init", "default_p0", "diameter", "fit_rate", "gap_estimate",
    "geometric_max_stats", "last_iterate_distance", "learner_init",
    "learner_step", "ma_round", "nash_oracle", "ogd_weight", "ons_weight",
    "project_euclidean", "project_quadratic", "qf_bound_check", "rank_one_update",
    "regret_curve", "sample_geometric",
]
