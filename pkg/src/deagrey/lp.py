"""Dense two-phase primal simplex for standard-form linear programs.

Every problem has the form::

    minimise / maximise  c @ x
    subject to           A @ x == b,  x >= 0

Infeasible and unbounded problems are reported through
``LpSolution.status``; only malformed input raises.
"""
from __future__ import annotations

import enum
from dataclasses import dataclass

import numpy as np

from deagrey import _kernels
from deagrey.errors import SolverError, ValidationError

PIVOT_TOL = 1e-9


class Sense(str, enum.Enum):
    MINIMIZE = "minimize"
    MAXIMIZE = "maximize"


class Status(str, enum.Enum):
    OPTIMAL = "Optimal"
    INFEASIBLE = "Infeasible"
    UNBOUNDED = "Unbounded"


@dataclass(frozen=True)
class LpProblem:
    """Standard-form LP; all variables are bounded below by zero."""

    cost: np.ndarray
    eq_matrix: np.ndarray
    eq_rhs: np.ndarray
    sense: Sense = Sense.MINIMIZE

    def __post_init__(self):
        cost = np.array(self.cost, dtype=float, ndmin=1)
        A = np.array(self.eq_matrix, dtype=float)
        b = np.array(self.eq_rhs, dtype=float, ndmin=1)
        if cost.ndim != 1:
            raise ValidationError(f"cost must be a vector, got shape {cost.shape}")
        if A.size == 0 and A.ndim < 2:
            A = A.reshape(0, cost.size)
        if A.ndim != 2:
            raise ValidationError(f"eq_matrix must be 2-D, got shape {A.shape}")
        if b.ndim != 1:
            raise ValidationError(f"eq_rhs must be a vector, got shape {b.shape}")
        if A.shape[0] != b.size:
            raise ValidationError(
                f"eq_matrix has {A.shape[0]} rows but eq_rhs has length {b.size}")
        if A.shape[1] != cost.size:
            raise ValidationError(
                f"eq_matrix has {A.shape[1]} columns but cost has length {cost.size}")
        for name, arr in (("cost", cost), ("eq_matrix", A), ("eq_rhs", b)):
            if not np.all(np.isfinite(arr)):
                raise ValidationError(f"{name} contains NaN or infinite entries")
        for arr in (cost, A, b):
            arr.setflags(write=False)
        object.__setattr__(self, "cost", cost)
        object.__setattr__(self, "eq_matrix", A)
        object.__setattr__(self, "eq_rhs", b)
        object.__setattr__(self, "sense", Sense(self.sense))

    @property
    def n_vars(self):
        return self.cost.size

    @property
    def n_cons(self):
        return self.eq_rhs.size

    def residual(self, x):
        """Infinity norm of ``A @ x - b``."""
        if self.n_cons == 0:
            return 0.0
        return float(np.max(np.abs(self.eq_matrix @ x - self.eq_rhs)))


@dataclass(frozen=True)
class LpSolution:
    status: Status
    solution: np.ndarray
    objective: float
    iterations: int

    @property
    def optimal(self):
        return self.status is Status.OPTIMAL


def residual_bound(problem):
    rhs_norm = float(np.max(np.abs(problem.eq_rhs))) if problem.n_cons else 0.0
    return 1e-7 * (1.0 + rhs_norm)


def _pivot(T, r, q):
    T[r] = T[r] / T[r, q]
    f = T[:, q].copy()
    f[r] = 0.0
    T -= f[:, None] * T[r]


def _drive_out_artificials(T, basis, n):
    """Pivot zero-level artificials out of the basis; return rows that are redundant."""
    m = T.shape[0] - 1
    redundant = []
    for i in range(m):
        if basis[i] < n:
            continue
        row = np.abs(T[i, :n])
        j = int(np.argmax(row)) if n else -1
        if j >= 0 and row[j] > PIVOT_TOL:
            _pivot(T, i, j)
            basis[i] = j
        else:
            redundant.append(i)
    return redundant


def _polish(problem, A, b, basis):
    """Recompute basic values from the original data for a tighter residual."""
    x = np.zeros(problem.n_vars)
    if basis.size == 0:
        return x
    B = A[:, basis]
    try:
        xb, *_ = np.linalg.lstsq(B, b, rcond=None)
    except np.linalg.LinAlgError:
        return None
    x[basis] = xb
    return x


def solve_lp(problem: LpProblem, max_iter: int | None = None) -> LpSolution:
    """Solve ``problem`` with the two-phase dense simplex method.

    Dantzig pricing is used until ``2 * (n_vars + n_cons)`` consecutive pivots
    fail to improve the objective, after which Bland's rule takes over for
    the rest of the phase. The result is deterministic for a given input and
    kernel backend.
    """
    n, m = problem.n_vars, problem.n_cons
    sign = 1.0 if problem.sense is Sense.MINIMIZE else -1.0
    c = sign * problem.cost
    A = problem.eq_matrix.copy()
    b = problem.eq_rhs.copy()
    neg = b < 0
    A[neg] *= -1.0
    b[neg] *= -1.0

    stall_limit = 2 * (n + m)
    if max_iter is None:
        max_iter = 50 * (n + m) + 100

    # phase 1: artificial basis, minimise the sum of artificials
    T = np.zeros((m + 1, n + m + 1))
    T[:m, :n] = A
    T[:m, n:n + m] = np.eye(m)
    T[:m, -1] = b
    T[m, :n] = -A.sum(axis=0)
    T[m, -1] = -b.sum()
    basis = np.arange(n, n + m, dtype=np.int64)

    status, it1 = _kernels.run_simplex(T, basis, n, PIVOT_TOL, stall_limit, max_iter)
    if status == _kernels.ITERATION_LIMIT:
        raise SolverError("phase 1 hit the iteration limit",
                          {"iterations": it1, "n_vars": n, "n_cons": m})
    infeas = -T[m, -1]
    if infeas > PIVOT_TOL * (1.0 + float(b.max(initial=0.0))):
        return LpSolution(Status.INFEASIBLE, np.full(n, np.nan), float("nan"), it1)

    redundant = _drive_out_artificials(T, basis, n)
    keep = np.setdiff1d(np.arange(m), redundant)

    # phase 2: drop artificial columns and redundant rows, price the real cost
    T2 = np.empty((keep.size + 1, n + 1))
    T2[:-1, :n] = T[keep, :n]
    T2[:-1, -1] = T[keep, -1]
    basis2 = basis[keep].copy()
    T2[-1, :n] = c - c[basis2] @ T2[:-1, :n]
    T2[-1, -1] = -(c[basis2] @ T2[:-1, -1])

    status, it2 = _kernels.run_simplex(T2, basis2, n, PIVOT_TOL, stall_limit,
                                       max_iter)
    iterations = it1 + it2
    if status == _kernels.ITERATION_LIMIT:
        raise SolverError("phase 2 hit the iteration limit",
                          {"iterations": iterations, "n_vars": n, "n_cons": m})
    if status == _kernels.UNBOUNDED:
        return LpSolution(Status.UNBOUNDED, np.full(n, np.nan), float("nan"),
                          iterations)

    x = np.zeros(n)
    x[basis2] = T2[:-1, -1]
    x = np.maximum(x, 0.0)
    bound = residual_bound(problem)
    if problem.residual(x) > 1e-3 * bound:
        polished = _polish(problem, A[keep], b[keep], basis2)
        if (polished is not None and polished.min(initial=0.0) >= -1e-12
                and problem.residual(polished) < problem.residual(x)):
            x = np.maximum(polished, 0.0)
    res = problem.residual(x)
    if res > bound:
        raise SolverError("optimal basis violates the residual bound",
                          {"residual": res, "bound": bound, "iterations": iterations})
    return LpSolution(Status.OPTIMAL, x, float(problem.cost @ x), iterations)
