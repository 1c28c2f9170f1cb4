import os
import subprocess
import sys

import numpy as np
import pytest

from deagrey import _accel, _kernels
from deagrey.dea import DeaInstance, DeaOptions, evaluate_all
from deagrey.lp import LpProblem, solve_lp

needs_numba = pytest.mark.skipif(not _accel.HAS_NUMBA, reason="numba not installed")


def _phase1_tableau(A, b):
    m, n = A.shape
    T = np.zeros((m + 1, n + m + 1))
    T[:m, :n] = A
    T[:m, n:n + m] = np.eye(m)
    T[:m, -1] = b
    T[m, :n] = -A.sum(axis=0)
    T[m, -1] = -b.sum()
    return T, np.arange(n, n + m, dtype=np.int64)


@needs_numba
def test_backends_agree_bitwise(rng):
    for _ in range(100):
        m, n = rng.integers(1, 6), rng.integers(1, 9)
        A = rng.normal(size=(m, n))
        b = np.abs(rng.normal(size=m))
        T1, basis1 = _phase1_tableau(A, b)
        T2, basis2 = T1.copy(), basis1.copy()
        r1 = _kernels.simplex_loop(T1, basis1, n, 1e-9, 2 * (n + m), 500)
        r2 = _kernels.simplex_numpy(T2, basis2, n, 1e-9, 2 * (n + m), 500)
        assert tuple(r1) == tuple(r2)
        assert basis1.tolist() == basis2.tolist()
        np.testing.assert_array_equal(T1, T2)


@needs_numba
def test_bland_switch_agrees():
    # stall limit 0 forces Bland's rule from the first degenerate pivot
    A = np.array([[0.25, -8.0, -1.0, 9.0], [0.5, -12.0, -0.5, 3.0], [0.0, 0.0, 1.0, 0.0]])
    T1, basis1 = _phase1_tableau(A, np.array([0.0, 0.0, 1.0]))
    T2, basis2 = T1.copy(), basis1.copy()
    assert (tuple(_kernels.simplex_loop(T1, basis1, 4, 1e-9, 0, 100))
            == tuple(_kernels.simplex_numpy(T2, basis2, 4, 1e-9, 0, 100)))
    np.testing.assert_array_equal(T1, T2)


def test_iteration_limit_status():
    A = np.array([[1.0, 1.0], [1.0, -1.0]])
    T, basis = _phase1_tableau(A, np.array([2.0, 0.0]))
    status, it = _kernels.simplex_numpy(T, basis, 2, 1e-9, 10, 0)
    assert status == _kernels.ITERATION_LIMIT and it == 0


def test_env_flag_selects_numpy_backend():
    env = dict(os.environ, DEAGREY_DISABLE_NUMBA="1")
    code = ("from deagrey import _kernels; "
            "print(_kernels.BACKEND, _kernels.run_simplex is _kernels.simplex_numpy)")
    out = subprocess.run([sys.executable, "-c", code], env=env, capture_output=True,
                         text=True, check=True).stdout.split()
    assert out == ["numpy", "True"]


def test_numpy_backend_end_to_end(monkeypatch, rng):
    X = rng.uniform(1, 10, (2, 6))
    Y = rng.uniform(1, 10, (2, 6))
    inst = DeaInstance([f"d{i}" for i in range(6)], X, Y)
    default = [s.score for s in evaluate_all(inst, DeaOptions())]
    monkeypatch.setattr(_kernels, "run_simplex", _kernels.simplex_numpy)
    fallback = [s.score for s in evaluate_all(inst, DeaOptions())]
    np.testing.assert_allclose(default, fallback, rtol=0, atol=1e-12)
    sol = solve_lp(LpProblem([1.0], [[1.0]], [1.0]))
    assert sol.solution.tolist() == [1.0]
