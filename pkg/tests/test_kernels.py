"""Backend parity: the compiled kernels must agree with the numpy fallback."""

import numpy as np
import pytest

from noregret import _kernels_py

cy = pytest.importorskip("noregret._kernels_cy")


def test_backend_reported():
    from noregret import kernels
    assert kernels.BACKEND in ("cython", "python")


@pytest.mark.parametrize("d", [1, 2, 5, 9])
def test_projection_parity(d):
    rng = np.random.default_rng(d)
    lo = -np.abs(rng.standard_normal(d)) - 0.1
    hi = np.abs(rng.standard_normal(d)) + 0.1
    center = rng.standard_normal(d)
    for _ in range(200):
        y = rng.standard_normal(d) * 3.0
        assert np.array_equal(cy.project_box(y, lo, hi),
                              _kernels_py.project_box(y, lo, hi))
        assert np.allclose(cy.project_ball(y, center, 1.3),
                           _kernels_py.project_ball(y, center, 1.3),
                           atol=5e-16, rtol=0)
        assert np.allclose(cy.project_simplex(y),
                           _kernels_py.project_simplex(y), atol=5e-15, rtol=0)


def _setup_qp(rng, d):
    A = np.eye(d)
    for _ in range(4):
        g = rng.standard_normal(d)
        A += np.outer(g, g)
    anchor = rng.standard_normal(d)
    grad = rng.standard_normal(d)
    eta = float(rng.random() + 0.2)
    return A, anchor, grad, eta


def test_qp_box_parity():
    rng = np.random.default_rng(0)
    d = 4
    lo, hi = -np.ones(d), np.ones(d)
    for _ in range(50):
        A, anchor, grad, eta = _setup_qp(rng, d)
        x0 = np.clip(anchor, lo, hi)
        xc, _, _ = cy.qp_box(anchor, grad, eta, A, lo, hi, x0, 1e-13, 10_000)
        xp, _, _ = _kernels_py.qp_box(anchor, grad, eta, A, lo, hi, x0,
                                      1e-13, 10_000)
        assert np.allclose(xc, xp, atol=5e-12, rtol=0)


def test_qp_pgd_simplex_parity():
    rng = np.random.default_rng(1)
    d = 5
    for _ in range(25):
        A, anchor, grad, eta = _setup_qp(rng, d)
        x0 = _kernels_py.project_simplex(anchor)
        step = 1.0 / (eta * float(np.linalg.eigvalsh(A)[-1]))
        xc, _, rc = cy.qp_pgd_simplex(anchor, grad, eta, A, x0, step, 1e-13,
                                      100_000)
        xp, _, rp = _kernels_py.qp_pgd_simplex(anchor, grad, eta, A, x0, step,
                                               1e-13, 100_000)
        assert np.allclose(xc, xp, atol=1e-10, rtol=0)
        assert rc <= 1e-13 and rp <= 1e-13


def test_rank_one_update_parity():
    rng = np.random.default_rng(2)
    d = 6
    Ac, Aic = np.eye(d), np.eye(d)
    Ap, Aip = np.eye(d), np.eye(d)
    for _ in range(200):
        g = rng.standard_normal(d)
        qc, sc = cy.rank_one_update(Ac, Aic, g)
        qp_, sp = _kernels_py.rank_one_update(Ap, Aip, g)
        assert qc == pytest.approx(qp_, rel=1e-12)
        assert sc == pytest.approx(sp, rel=1e-12)
    assert np.allclose(Ac, Ap, atol=1e-10, rtol=0)
    assert np.allclose(Aic, Aip, atol=1e-10, rtol=0)


def test_rank_one_zero_vector_noop():
    d = 3
    for mod in (cy, _kernels_py):
        A, Ai = np.eye(d), np.eye(d)
        qf, gsq = mod.rank_one_update(A, Ai, np.zeros(d))
        assert qf == 0.0 and gsq == 0.0
        assert np.array_equal(A, np.eye(d))
