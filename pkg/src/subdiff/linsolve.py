"""Complex tridiagonal and sparse-banded solvers for the per-step systems.

The 1D schemes produce tridiagonal systems that are strictly diagonally
dominant for the parameter ranges of interest; those go through a plain
Thomas sweep. If dominance fails, the solve falls back to a partially
pivoted banded factorization. The 2D schemes produce 9-point systems whose
matrix is fixed over most of the march, so the factorization is kept and
reused.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np
import scipy.sparse as sp
from scipy.linalg import solve_banded
from scipy.sparse.linalg import splu

from .errors import ParameterError, SingularMatrixError


@dataclass
class Tridiag:
    """Tridiagonal matrix (sub, diag, sup) with a reusable LU factorization."""

    sub: np.ndarray
    diag: np.ndarray
    sup: np.ndarray
    _factors: tuple | None = field(default=None, repr=False)

    def __post_init__(self):
        self.sub = np.asarray(self.sub, dtype=complex)
        self.diag = np.asarray(self.diag, dtype=complex)
        self.sup = np.asarray(self.sup, dtype=complex)
        m = self.diag.size
        if self.sub.size != m - 1 or self.sup.size != m - 1:
            raise ParameterError(
                f"band lengths {self.sub.size}/{self.diag.size}/{self.sup.size} inconsistent")

    @property
    def size(self) -> int:
        return self.diag.size

    def is_diagonally_dominant(self) -> bool:
        m = self.size
        off = np.zeros(m)
        off[:-1] += np.abs(self.sup)
        off[1:] += np.abs(self.sub)
        return bool(np.all(np.abs(self.diag) >= off) and np.all(np.abs(self.diag) > 0))

    def factor(self) -> "Tridiag":
        """LU factorization without pivoting (valid under diagonal dominance)."""
        m = self.size
        d = np.empty(m, dtype=complex)
        lower = np.empty(max(m - 1, 0), dtype=complex)
        d[0] = self.diag[0]
        if d[0] == 0:
            raise SingularMatrixError("zero pivot", 0)
        for i in range(1, m):
            lower[i - 1] = self.sub[i - 1] / d[i - 1]
            d[i] = self.diag[i] - lower[i - 1] * self.sup[i - 1]
            if d[i] == 0:
                raise SingularMatrixError("zero pivot", i)
        self._factors = (lower, d)
        return self

    def solve_factored(self, rhs: np.ndarray) -> np.ndarray:
        if self._factors is None:
            self.factor()
        lower, d = self._factors
        m = self.size
        y = np.array(rhs, dtype=complex)
        for i in range(1, m):
            y[i] -= lower[i - 1] * y[i - 1]
        x = y
        x[m - 1] /= d[m - 1]
        for i in range(m - 2, -1, -1):
            x[i] = (x[i] - self.sup[i] * x[i + 1]) / d[i]
        return x

    def dense(self) -> np.ndarray:
        m = self.size
        a = np.zeros((m, m), dtype=complex)
        a[np.arange(m), np.arange(m)] = self.diag
        a[np.arange(1, m), np.arange(m - 1)] = self.sub
        a[np.arange(m - 1), np.arange(1, m)] = self.sup
        return a


def thomas_solve(a: Tridiag, rhs: np.ndarray) -> np.ndarray:
    """Solve a tridiagonal system.

    Diagonally dominant systems take the non-pivoting Thomas sweep; anything
    else is routed through a partially pivoted banded solve.
    """
    rhs = np.asarray(rhs, dtype=complex)
    if rhs.shape[0] != a.size:
        raise ParameterError(f"rhs length {rhs.shape[0]} != matrix size {a.size}")
    if a.size == 0:
        return rhs.copy()
    if a.is_diagonally_dominant():
        return a.solve_factored(rhs)
    ab = np.zeros((3, a.size), dtype=complex)
    ab[0, 1:] = a.sup
    ab[1] = a.diag
    ab[2, :-1] = a.sub
    try:
        return solve_banded((1, 1), ab, rhs)
    except np.linalg.LinAlgError as exc:  # pragma: no cover - rare
        raise SingularMatrixError(str(exc)) from exc


@dataclass
class BandedMatrix:
    """Sparse matrix with banded structure and a reusable LU factorization.

    For the 2D compact stencil under lexicographic interior ordering the
    half-bandwidth is M1 (x-interior count plus one); the factorization is
    computed once per march and shared by every step that keeps the same
    matrix.
    """

    matrix: sp.spmatrix
    bandwidth: int
    _lu: object | None = field(default=None, repr=False)

    @property
    def rows(self) -> int:
        return self.matrix.shape[0]

    @property
    def factorized(self) -> bool:
        return self._lu is not None


def banded_from_sparse(matrix: sp.spmatrix) -> BandedMatrix:
    csc = matrix.tocsc()
    csc.eliminate_zeros()  # cancellation leaves stored zeros that fake width
    coo = csc.tocoo()
    bandwidth = int(np.abs(coo.row - coo.col).max()) if coo.nnz else 0
    return BandedMatrix(matrix=csc, bandwidth=bandwidth)


def banded_factor(a: BandedMatrix) -> BandedMatrix:
    """Factor in place and return the same object (idempotent)."""
    if a._lu is None:
        try:
            a._lu = splu(a.matrix.astype(complex).tocsc())
        except RuntimeError as exc:
            raise SingularMatrixError(f"sparse factorization failed: {exc}") from exc
    return a


def banded_solve(a: BandedMatrix, rhs: np.ndarray) -> np.ndarray:
    """Solve using the stored factorization (factoring on first use)."""
    rhs = np.asarray(rhs, dtype=complex)
    if rhs.shape[0] != a.rows:
        raise ParameterError(f"rhs length {rhs.shape[0]} != matrix size {a.rows}")
    banded_factor(a)
    x = a._lu.solve(rhs)
    if not np.all(np.isfinite(x)):
        raise SingularMatrixError("sparse solve produced non-finite values")
    return x
