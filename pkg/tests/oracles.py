"""Brute-force reference solvers, independent of the simplex code path."""
import itertools

import numpy as np


def basic_feasible_solutions(A, b, tol=1e-9):
    """Every basic feasible solution of ``A x = b, x >= 0`` by column-subset enumeration."""
    A = np.asarray(A, dtype=float)
    b = np.asarray(b, dtype=float)
    m, n = A.shape
    if m == 0:
        return [np.zeros(n)]
    rank = np.linalg.matrix_rank(A)
    if rank == 0:
        return [np.zeros(n)] if np.abs(b).max() <= tol else []
    out = []
    for cols in itertools.combinations(range(n), rank):
        cols = list(cols)
        B = A[:, cols]
        if np.linalg.matrix_rank(B) < rank:
            continue
        xb, *_ = np.linalg.lstsq(B, b, rcond=None)
        if np.max(np.abs(B @ xb - b), initial=0.0) > tol * (1 + np.abs(b).max(initial=0)):
            continue
        if xb.min(initial=0.0) < -tol:
            continue
        x = np.zeros(n)
        x[cols] = np.maximum(xb, 0.0)
        out.append(x)
    return out


def vertex_lp(cost, A, b, maximize=False, tol=1e-9):
    """Return ``(status, objective)`` with status in Optimal/Infeasible/Unbounded.

    Unboundedness is decided over the normalised recession cone
    ``{d >= 0, A d = 0, sum(d) = 1}``, whose vertices are the extreme rays.
    """
    c = -np.asarray(cost, float) if maximize else np.asarray(cost, float)
    A = np.asarray(A, float).reshape(-1, len(c))
    b = np.asarray(b, float)
    verts = basic_feasible_solutions(A, b, tol)
    if not verts:
        return "Infeasible", None
    n = len(c)
    ray_A = np.vstack([A, np.ones((1, n))])
    ray_b = np.r_[np.zeros(A.shape[0]), 1.0]
    for d in basic_feasible_solutions(ray_A, ray_b, tol):
        if c @ d < -1e-9:
            return "Unbounded", None
    best = min(float(c @ x) for x in verts)
    return "Optimal", (-best if maximize else best)


def dea_oracle(X, Y, k, orientation="input", rts="crs"):
    """Radial DEA score by vertex enumeration on an independently written encoding.

    ``X`` is inputs (w x n), ``Y`` outputs (q x n). The radial variable is kept
    nonnegative instead of split, and constraints are inequalities turned into
    equalities with explicit surplus columns.
    """
    X = np.asarray(X, float)
    Y = np.asarray(Y, float)
    w, n = X.shape
    q = Y.shape[0]
    rows, rhs = [], []
    # variable order: radial, lambda_1..n, surplus per inequality row
    n_ineq = w + q
    nv = 1 + n + n_ineq
    for i in range(w):
        row = np.zeros(nv)
        if orientation == "input":
            row[0] = X[i, k]
            row[1:1 + n] = -X[i]
            row[1 + n + i] = -1.0          # theta*x0 - X lam >= 0
            rhs.append(0.0)
        else:
            row[1:1 + n] = -X[i]
            row[1 + n + i] = -1.0          # x0 - X lam >= 0
            rhs.append(-X[i, k])
        rows.append(row)
    for r in range(q):
        row = np.zeros(nv)
        if orientation == "input":
            row[1:1 + n] = Y[r]
            row[1 + n + w + r] = -1.0      # Y lam >= y0
            rhs.append(Y[r, k])
        else:
            row[0] = -Y[r, k]
            row[1:1 + n] = Y[r]
            row[1 + n + w + r] = -1.0      # Y lam >= eta*y0
            rhs.append(0.0)
        rows.append(row)
    if rts == "vrs":
        row = np.zeros(nv)
        row[1:1 + n] = 1.0
        rows.append(row)
        rhs.append(1.0)
    cost = np.zeros(nv)
    cost[0] = 1.0
    status, obj = vertex_lp(cost, np.array(rows), np.array(rhs),
                            maximize=(orientation == "output"))
    assert status == "Optimal", status
    return obj
