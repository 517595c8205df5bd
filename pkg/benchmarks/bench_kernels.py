"""Benchmark the compiled kernels against the pure numpy fallback.

Run from the repository root:

    python3 benchmarks/bench_kernels.py

Imports both backend modules directly, so no reinstall or environment
variable is needed to compare them.
"""

import time

import numpy as np

from noregret import _kernels_py

try:
    from noregret import _kernels_cy
except ImportError:
    _kernels_cy = None


def make_cases(rng, d=5):
    A = np.eye(d)
    for _ in range(50):
        g = rng.standard_normal(d)
        A += np.outer(g, g)
    A_inv = np.linalg.inv(A)
    anchor = rng.random(d)
    grad = rng.standard_normal(d)
    lo, hi = -np.ones(d), np.ones(d)
    x0 = np.clip(anchor - A_inv @ grad, lo, hi)
    step = 1.0 / float(np.linalg.eigvalsh(A)[-1])
    return dict(A=A, A_inv=A_inv, anchor=anchor, grad=grad, lo=lo, hi=hi,
                x0=x0, step=step)


def bench(fn, reps):
    start = time.perf_counter()
    for _ in range(reps):
        fn()
    return (time.perf_counter() - start) / reps * 1e6


def run(backend, name, reps=20_000):
    rng = np.random.default_rng(7)
    c = make_cases(rng)
    d = c["anchor"].shape[0]
    y = rng.standard_normal(d) * 2.0
    rows = []
    rows.append(("project_simplex", bench(lambda: backend.project_simplex(y), reps)))
    rows.append(("project_box", bench(
        lambda: backend.project_box(y, c["lo"], c["hi"]), reps)))
    rows.append(("qp_box", bench(
        lambda: backend.qp_box(c["anchor"], c["grad"], 0.5, c["A"], c["lo"],
                               c["hi"], c["x0"], 1e-13, 10_000), reps // 4)))
    x0s = backend.project_simplex(c["x0"])
    rows.append(("qp_pgd_simplex", bench(
        lambda: backend.qp_pgd_simplex(c["anchor"], c["grad"], 0.5, c["A"],
                                       x0s, c["step"] / 0.5, 1e-12, 10_000),
        reps // 4)))

    def rank_one():
        A = c["A"].copy()
        Ai = c["A_inv"].copy()
        backend.rank_one_update(A, Ai, c["grad"])

    rows.append(("rank_one_update", bench(rank_one, reps)))
    print(f"\n{name} backend")
    for op, us in rows:
        print(f"  {op:18s} {us:9.2f} us/call")
    return dict(rows)


def main():
    py = run(_kernels_py, "python")
    if _kernels_cy is None:
        print("\ncompiled backend not built; install with the Cython extension "
              "to compare")
        return
    cy = run(_kernels_cy, "cython")
    print("\nspeedup (python / cython)")
    for op in py:
        print(f"  {op:18s} {py[op] / cy[op]:9.1f}x")


if __name__ == "__main__":
    main()
