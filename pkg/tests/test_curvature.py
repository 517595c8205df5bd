import math

import numpy as np
import pytest

from noregret.curvature import (CurvatureState, curvature_init, qf_bound_check,
                                rank_one_update)
from noregret.errors import ContractViolation


def test_init_identity():
    for d in (1, 2, 6):
        cs = curvature_init(d)
        assert np.array_equal(cs.matrix, np.eye(d))
        assert np.array_equal(cs.inverse @ cs.matrix, np.eye(d))
        assert cs.update_count == 0 and cs.qf_sum == 0.0


def test_init_rejects_bad_dim():
    with pytest.raises(ContractViolation):
        curvature_init(0)


def test_unit_vector_update():
    cs = curvature_init(2)
    rank_one_update(cs, np.array([1.0, 0.0]))
    assert np.allclose(cs.inverse, [[0.5, 0.0], [0.0, 1.0]], atol=1e-15)


def test_ones_update_matches_direct_inverse():
    cs = curvature_init(2)
    rank_one_update(cs, np.array([1.0, 1.0]))
    expect = np.linalg.inv(np.array([[2.0, 1.0], [1.0, 2.0]]))
    assert np.allclose(cs.inverse, expect, atol=1e-14)
    assert np.allclose(expect, [[2 / 3, -1 / 3], [-1 / 3, 2 / 3]])


def test_zero_gradient_only_counts():
    cs = curvature_init(3)
    rank_one_update(cs, np.zeros(3))
    assert cs.update_count == 1
    assert np.array_equal(cs.matrix, np.eye(3))
    assert cs.qf_sum == 0.0


def test_inverse_drift_stays_small():
    rng = np.random.default_rng(0)
    for d in (3, 8):
        cs = curvature_init(d)
        for _ in range(100):
            cs.update(rng.standard_normal(d))
        err = np.max(np.abs(cs.matrix @ cs.inverse - np.eye(d)))
        assert err <= 1e-8
        assert np.max(np.abs(cs.inverse - np.linalg.inv(cs.matrix))) <= 1e-8


def test_refresh_keeps_long_chains_accurate():
    rng = np.random.default_rng(1)
    cs = curvature_init(4)
    for _ in range(2500):
        cs.update(rng.standard_normal(4) * 2.0)
    assert np.max(np.abs(cs.matrix @ cs.inverse - np.eye(4))) <= 1e-8


def test_min_eigenvalue_never_below_one():
    rng = np.random.default_rng(2)
    cs = curvature_init(5)
    for _ in range(60):
        cs.update(rng.standard_normal(5))
        assert np.linalg.eigvalsh(cs.matrix)[0] >= 1.0 - 1e-10
    big = curvature_init(40)
    for _ in range(30):
        big.update(rng.standard_normal(40))
    for _ in range(50):
        x = rng.standard_normal(40)
        assert x @ big.matrix @ x >= x @ x - 1e-8


def test_qf_single_update_value():
    cs = curvature_init(1)
    cs.update(np.array([1.0]))
    assert cs.qf_sum == pytest.approx(0.5, abs=1e-15)
    assert qf_bound_check(cs, 1, 1.0)  # 0.5 <= log 2


def test_qf_harmonic_sum_oracle():
    T = 500
    cs = curvature_init(1)
    for _ in range(T):
        cs.update(np.array([1.0]))
    harmonic = sum(1.0 / (t + 1) for t in range(1, T + 1))
    assert cs.qf_sum == pytest.approx(harmonic, abs=1e-9)
    assert cs.qf_sum <= math.log(T + 1)
    assert qf_bound_check(cs, T, 1.0)


def test_qf_bound_check_empty():
    cs = curvature_init(3)
    assert qf_bound_check(cs, 0, 5.0)


def test_qf_bound_on_random_trajectories():
    rng = np.random.default_rng(3)
    for d in (2, 5):
        cs = curvature_init(d)
        G = 2.0
        for t in range(1, 400):
            g = rng.standard_normal(d)
            n = np.linalg.norm(g)
            if n > G:
                g *= G / n
            cs.update(g)
            assert qf_bound_check(cs, t, G)


def test_qf_sum_nondecreasing():
    rng = np.random.default_rng(4)
    cs = curvature_init(3)
    prev = 0.0
    for _ in range(50):
        cs.update(rng.standard_normal(3))
        assert cs.qf_sum >= prev
        prev = cs.qf_sum
