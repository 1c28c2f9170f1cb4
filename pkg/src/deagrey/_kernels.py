"""Simplex pivoting kernels on a dense tableau.

Tableau layout, shape ``(m + 1, ncols)``:

* rows ``0..m-1`` are constraints, row ``m`` holds reduced costs;
* the last column is the right-hand side, ``T[m, -1]`` is minus the objective.

Both kernels minimise, share one pricing and ratio-test rule, and mutate
``T`` and ``basis`` in place. ``simplex_loop`` is written for numba,
``simplex_numpy`` is the vectorised fallback. ``run_simplex`` is whichever
one ``deagrey._accel`` selected at import time.
"""
import numpy as np

from deagrey._accel import USE_NUMBA, njit

OPTIMAL = 0
UNBOUNDED = 1
ITERATION_LIMIT = 2

# relative band inside which two ratios count as tied
RATIO_TIE = 1e-12


@njit
def simplex_loop(T, basis, n_enter, tol, stall_limit, max_iter):
    m = T.shape[0] - 1
    ncols = T.shape[1]
    rhs = ncols - 1
    it = 0
    stall = 0
    bland = False
    best_obj = T[m, rhs]
    while True:
        q = -1
        if bland:
            for j in range(n_enter):
                if T[m, j] < -tol:
                    q = j
                    break
        else:
            dmin = -tol
            for j in range(n_enter):
                if T[m, j] < dmin:
                    dmin = T[m, j]
                    q = j
        if q < 0:
            return OPTIMAL, it
        if it >= max_iter:
            return ITERATION_LIMIT, it

        min_ratio = np.inf
        for i in range(m):
            if T[i, q] > tol:
                ratio = max(T[i, rhs], 0.0) / T[i, q]
                if ratio < min_ratio:
                    min_ratio = ratio
        if min_ratio == np.inf:
            return UNBOUNDED, it
        band = min_ratio + RATIO_TIE * (1.0 + abs(min_ratio))
        r = -1
        for i in range(m):
            if T[i, q] > tol and max(T[i, rhs], 0.0) / T[i, q] <= band:
                if r < 0 or basis[i] < basis[r]:
                    r = i

        piv = T[r, q]
        for j in range(ncols):
            T[r, j] = T[r, j] / piv
        for i in range(m + 1):
            if i != r:
                f = T[i, q]
                if f != 0.0:
                    for j in range(ncols):
                        T[i, j] = T[i, j] - f * T[r, j]
        basis[r] = q
        it += 1

        obj = T[m, rhs]
        if obj > best_obj + RATIO_TIE * (1.0 + abs(best_obj)):
            best_obj = obj
            stall = 0
        else:
            stall += 1
            if stall >= stall_limit:
                bland = True


def simplex_numpy(T, basis, n_enter, tol, stall_limit, max_iter):
    m = T.shape[0] - 1
    it = 0
    stall = 0
    bland = False
    best_obj = T[m, -1]
    while True:
        costs = T[m, :n_enter]
        if bland:
            cand = np.flatnonzero(costs < -tol)
            q = int(cand[0]) if cand.size else -1
        else:
            q = int(np.argmin(costs)) if n_enter else -1
            if q >= 0 and not costs[q] < -tol:
                q = -1
        if q < 0:
            return OPTIMAL, it
        if it >= max_iter:
            return ITERATION_LIMIT, it

        col = T[:m, q]
        rows = np.flatnonzero(col > tol)
        if rows.size == 0:
            return UNBOUNDED, it
        ratios = np.maximum(T[rows, -1], 0.0) / col[rows]
        min_ratio = ratios.min()
        tied = rows[ratios <= min_ratio + RATIO_TIE * (1.0 + abs(min_ratio))]
        r = int(tied[np.argmin(basis[tied])])

        T[r] = T[r] / T[r, q]
        f = T[:, q].copy()
        f[r] = 0.0
        nz = np.flatnonzero(f)
        T[nz] -= f[nz, None] * T[r]
        basis[r] = q
        it += 1

        obj = T[m, -1]
        if obj > best_obj + RATIO_TIE * (1.0 + abs(best_obj)):
            best_obj = obj
            stall = 0
        else:
            stall += 1
            if stall >= stall_limit:
                bland = True


run_simplex = simplex_loop if USE_NUMBA else simplex_numpy
BACKEND = "numba" if USE_NUMBA else "numpy"
