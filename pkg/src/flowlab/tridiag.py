"""Periodic (cyclic) tridiagonal solves via a Sherman-Morrison correction."""
import numpy as np
from scipy.linalg import solve_banded


class CyclicTridiagonal:
    """Matrix with ``diag`` on the diagonal, ``upper[i]`` at (i, i+1 mod n) and
    ``lower[i]`` at (i, i-1 mod n).

    The corner entries make the matrix a rank-one update of a plain
    tridiagonal matrix T' = A - w v^T; ``T'^{-1} w`` is computed once so
    each solve costs one banded solve.
    """

    def __init__(self, lower, diag, upper):
        self.lower = np.asarray(lower, dtype=float)
        self.diag = np.asarray(diag, dtype=float)
        self.upper = np.asarray(upper, dtype=float)
        n = len(self.diag)
        if n < 3:
            raise ValueError("cyclic system needs at least 3 unknowns")
        corner_top = self.lower[0]      # A[0, n-1]
        corner_bottom = self.upper[-1]  # A[n-1, 0]
        gamma = -self.diag[0]
        core = self.diag.copy()
        core[0] -= gamma
        core[-1] -= corner_top * corner_bottom / gamma
        self._ab = np.zeros((3, n))
        self._ab[0, 1:] = self.upper[:-1]
        self._ab[1] = core
        self._ab[2, :-1] = self.lower[1:]
        self._w = np.zeros(n)
        self._w[0], self._w[-1] = gamma, corner_bottom
        self._v = np.zeros(n)
        self._v[0], self._v[-1] = 1.0, corner_top / gamma
        self._z = solve_banded((1, 1), self._ab, self._w)
        self._denom = 1.0 + self._v @ self._z

    def solve(self, rhs):
        y = solve_banded((1, 1), self._ab, rhs)
        return y - (self._v @ y) / self._denom * self._z

    def matvec(self, x):
        return self.diag * x + self.upper * np.roll(x, -1) + self.lower * np.roll(x, 1)

    def dense(self):
        n = len(self.diag)
        m = np.diag(self.diag)
        idx = np.arange(n)
        m[idx, (idx + 1) % n] += self.upper
        m[idx, (idx - 1) % n] += self.lower
        return m
