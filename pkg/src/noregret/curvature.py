"""Running second-order state for the Newton-style learners.

Maintains A (identity plus a sum of gradient outer products), its inverse
via rank-1 updates with periodic full re-inversions, an upper bound on the
top eigenvalue, and the accumulated post-update quadratic forms
g' A^{-1} g whose sum admits a d log(T G^2 + 1) ceiling.
"""

import numpy as np

from . import kernels
from .errors import ContractViolation

REFRESH_EVERY = 1000


class CurvatureState:
    __slots__ = ("matrix", "inverse", "update_count", "qf_sum", "lmax_bound",
                 "is_identity")

    def __init__(self, dim):
        if dim < 1:
            raise ContractViolation("dimension must be >= 1")
        self.matrix = np.eye(dim)
        self.inverse = np.eye(dim)
        self.update_count = 0
        self.qf_sum = 0.0
        self.lmax_bound = 1.0
        self.is_identity = True

    @property
    def dim(self):
        return self.matrix.shape[0]

    def update(self, g):
        """Add g g' to the matrix; returns the post-update form g' A^{-1} g."""
        g = np.ascontiguousarray(np.asarray(g, dtype=np.float64))
        if g.shape[0] != self.dim:
            raise ContractViolation("gradient dimension mismatch")
        qf, gsq = kernels.rank_one_update(self.matrix, self.inverse, g)
        self.update_count += 1
        if gsq > 0.0:
            self.is_identity = False
            self.qf_sum += qf
            self.lmax_bound += gsq
            if self.update_count % REFRESH_EVERY == 0:
                self._refresh()
        return qf

    def _refresh(self):
        # kill rank-1 drift: symmetrize, re-invert, tighten the eigen bound
        self.matrix = 0.5 * (self.matrix + self.matrix.T)
        self.inverse = np.linalg.inv(self.matrix)
        self.lmax_bound = float(np.linalg.eigvalsh(self.matrix)[-1])

    def qf_bound(self, horizon, grad_bound):
        return self.dim * np.log(horizon * grad_bound**2 + 1.0)


def curvature_init(dim):
    return CurvatureState(dim)


def rank_one_update(state, g):
    state.update(g)
    return state


def qf_bound_check(state, horizon, grad_bound, slack=1e-9):
    """True when the accumulated quadratic forms respect their log ceiling."""
    return bool(state.qf_sum <= state.qf_bound(horizon, grad_bound) + slack)
