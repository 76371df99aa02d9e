"""Cyclic (periodic) tridiagonal solves for the implicit diffusion step.

The systems produced by the time steppers have a constant main diagonal
(1 + 2*lambda), constant off-diagonal (-lambda) and periodic corner entries.
They are solved in O(J) by the Thomas algorithm on a rank-1-modified
tridiagonal system followed by a Sherman-Morrison correction that restores
the corners.  A dense partial-pivoting solve is kept as an independent
testing oracle.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

__all__ = [
    "CyclicTridiagonalSystem",
    "SingularSystem",
    "solve_cyclic",
    "solve_cyclic_variable",
    "solve_dense_oracle",
    "assemble_dense",
]

_PIVOT_FLOOR = 1e-30

DENSE_ORACLE_MAX_SIZE = 2048


class SingularSystem(Exception):
    """A pivot fell below the admissible floor; the system is not solvable."""


@dataclass(frozen=True)
class CyclicTridiagonalSystem:
    """(diag)*x_j + (off)*x_{j+1} + (off)*x_{j-1} = rhs_j with periodic indices."""

    diag: float
    off: float
    rhs: np.ndarray = field(repr=False)

    def __post_init__(self):
        object.__setattr__(self, "rhs", np.asarray(self.rhs, dtype=float))
        if self.rhs.ndim != 1 or self.size < 3:
            raise ValueError("cyclic structure needs a 1-D right-hand side with J >= 3")

    @property
    def size(self) -> int:
        return self.rhs.shape[0]


def _solve_core(diag: list[float], off: float, rhs: list[float]) -> list[float]:
    """Thomas + Sherman-Morrison on plain Python lists.

    The corner entries ``off`` at (0, n-1) and (n-1, 0) are removed by
    subtracting the rank-1 term u v^T with u = (g, 0, ..., 0, off) and
    v = (1, 0, ..., 0, off/g), g = -diag[0]; the modified tridiagonal system
    stays diagonally dominant whenever the original one is.
    """
    n = len(rhs)
    g = -diag[0]
    if abs(g) < _PIVOT_FLOOR:
        raise SingularSystem(f"corner-removal pivot {g!r} below floor")
    b_first = diag[0] - g
    b_last = diag[n - 1] - off * off / g

    # Shared LU pass of the modified system; y solves against rhs, z against u.
    mult = [0.0] * n
    y = [0.0] * n
    z = [0.0] * n
    beta = b_first
    if abs(beta) < _PIVOT_FLOOR:
        raise SingularSystem(f"pivot {beta!r} below floor at row 0")
    mult[0] = off / beta
    y[0] = rhs[0] / beta
    z[0] = g / beta
    for i in range(1, n):
        b_i = b_last if i == n - 1 else diag[i]
        beta = b_i - off * mult[i - 1]
        if abs(beta) < _PIVOT_FLOOR:
            raise SingularSystem(f"pivot {beta!r} below floor at row {i}")
        mult[i] = off / beta
        u_i = off if i == n - 1 else 0.0
        y[i] = (rhs[i] - off * y[i - 1]) / beta
        z[i] = (u_i - off * z[i - 1]) / beta
    for i in range(n - 2, -1, -1):
        y[i] -= mult[i] * y[i + 1]
        z[i] -= mult[i] * z[i + 1]

    w = off / g
    denom = 1.0 + z[0] + w * z[n - 1]
    if abs(denom) < _PIVOT_FLOOR:
        raise SingularSystem("rank-1 correction denominator vanished")
    factor = (y[0] + w * y[n - 1]) / denom
    return [y[i] - factor * z[i] for i in range(n)]


def solve_cyclic(sys: CyclicTridiagonalSystem) -> np.ndarray:
    """Solve the constant-coefficient cyclic tridiagonal system in O(J)."""
    diag = [sys.diag] * sys.size
    return np.array(_solve_core(diag, sys.off, sys.rhs.tolist()))


def solve_cyclic_variable(diag: np.ndarray, off: float, rhs: np.ndarray) -> np.ndarray:
    """Variant with a per-row main diagonal (Newton Jacobians); same corners."""
    diag = np.asarray(diag, dtype=float)
    rhs = np.asarray(rhs, dtype=float)
    if diag.shape != rhs.shape or rhs.ndim != 1 or rhs.shape[0] < 3:
        raise ValueError("diag and rhs must be 1-D of equal length J >= 3")
    return np.array(_solve_core(diag.tolist(), off, rhs.tolist()))


def assemble_dense(sys: CyclicTridiagonalSystem) -> np.ndarray:
    """Explicit J x J matrix of the system, for the oracle and for tests."""
    n = sys.size
    a = np.zeros((n, n))
    np.fill_diagonal(a, sys.diag)
    idx = np.arange(n)
    a[idx, (idx + 1) % n] += sys.off
    a[idx, (idx - 1) % n] += sys.off
    return a


def solve_dense_oracle(sys: CyclicTridiagonalSystem) -> np.ndarray:
    """O(J^3) reference solve on the assembled matrix (partial-pivoting LU)."""
    if sys.size > DENSE_ORACLE_MAX_SIZE:
        raise ValueError(f"dense oracle limited to J <= {DENSE_ORACLE_MAX_SIZE}")
    try:
        return np.linalg.solve(assemble_dense(sys), sys.rhs)
    except np.linalg.LinAlgError as exc:
        raise SingularSystem(str(exc)) from exc
