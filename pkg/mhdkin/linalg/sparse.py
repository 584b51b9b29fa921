import logging
from collections.abc import Callable

import numpy as np
import scipy.linalg as la
import scipy.sparse as sp
import scipy.sparse.linalg as spla

from mhdkin.core.config import settings
from mhdkin.core.exceptions import DimensionMismatchError, SingularMatrixError

logger = logging.getLogger(__name__)

Operator = sp.spmatrix | sp.sparray | spla.LinearOperator | np.ndarray | Callable


def as_csr(matrix) -> sp.csr_matrix:
    """Canonical CSR: summed duplicates, sorted column indices, no explicit zeros."""
    csr = sp.csr_matrix(matrix, dtype=float)
    csr.sum_duplicates()
    csr.eliminate_zeros()
    csr.sort_indices()
    return csr


def as_operator(operator: Operator, size: int | None = None) -> spla.LinearOperator:
    """Wrap matrices, linear operators and plain callables as a LinearOperator."""
    if callable(operator) and not isinstance(operator, spla.LinearOperator):
        if size is None:
            raise ValueError("A callable operator needs an explicit size")
        return spla.LinearOperator((size, size), matvec=operator, dtype=float)
    return spla.aslinearoperator(operator)


def spmv(matrix, x: np.ndarray) -> np.ndarray:
    """
    Sparse matrix-vector product.

    Raises:
        DimensionMismatchError: If x does not match the number of columns
    """
    if matrix.shape[1] != len(x):
        raise DimensionMismatchError(matrix.shape[1], len(x))
    return np.asarray(matrix @ x)


class DirectSolver:
    """
    Sparse LU factorization, computed once and reused for every solve.

    Raises:
        SingularMatrixError: If the factorization hits a zero pivot
    """

    def __init__(self, matrix):
        self.matrix = sp.csc_matrix(matrix, dtype=float)
        if self.matrix.shape[0] != self.matrix.shape[1]:
            raise DimensionMismatchError(self.matrix.shape[0], self.matrix.shape[1])
        try:
            self._lu = spla.splu(self.matrix)
        except RuntimeError as exc:
            pivot = _locate_zero_pivot(self.matrix)
            logger.debug("Sparse LU failed: %s", exc)
            raise SingularMatrixError(pivot) from exc

    @property
    def size(self) -> int:
        return self.matrix.shape[0]

    def solve(self, b: np.ndarray) -> np.ndarray:
        if len(b) != self.size:
            raise DimensionMismatchError(self.size, len(b))
        return self._lu.solve(np.asarray(b, dtype=float))

    __call__ = solve


def direct_solve(matrix, b: np.ndarray) -> np.ndarray:
    """Solve A x = b with a sparse LU factorization."""
    return DirectSolver(matrix).solve(b)


def _locate_zero_pivot(matrix: sp.csc_matrix) -> int | None:
    """Index of the first vanishing pivot of a dense LU, for small matrices only."""
    if matrix.shape[0] > settings.dense_size_cap:
        return None
    _, _, upper = la.lu(matrix.toarray())
    diagonal = np.abs(np.diag(upper))
    scale = max(float(np.max(diagonal, initial=0.0)), 1.0)
    zero = np.flatnonzero(diagonal <= 1e-14 * scale)
    return int(zero[0]) if zero.size else None
