"""Preconditioners for the inner block solves, each a callable r -> M^{-1} r."""

import logging
from collections.abc import Callable
from enum import StrEnum

import numpy as np
import pyamg
import scipy.sparse as sp
import scipy.sparse.linalg as spla

from mhdkin.core.config import settings

logger = logging.getLogger(__name__)

Preconditioner = Callable[[np.ndarray], np.ndarray]


class PreconditionerKind(StrEnum):
    JACOBI = "jacobi"
    ILU = "ilu"
    AMG = "amg"


def jacobi(matrix) -> Preconditioner:
    """Diagonal preconditioner r -> r / diag(A)."""
    diagonal = np.asarray(matrix.diagonal(), dtype=float)
    inverse = np.where(diagonal != 0.0, 1.0 / np.where(diagonal != 0.0, diagonal, 1.0), 1.0)

    def apply(r: np.ndarray) -> np.ndarray:
        return inverse * r

    return apply


def ilu(
    matrix,
    drop_tol: float | None = None,
    fill_factor: float | None = None,
) -> Preconditioner:
    """
    Incomplete LU factorization; falls back to Jacobi when the factor is singular.

    Not symmetric, so only suited to GMRES.
    """
    try:
        factor = spla.spilu(
            sp.csc_matrix(matrix, dtype=float),
            drop_tol=drop_tol or settings.ilu_drop_tol,
            fill_factor=fill_factor or settings.ilu_fill_factor,
        )
    except RuntimeError as exc:
        logger.warning("Incomplete LU failed (%s), switching to the diagonal of A", exc)
        return jacobi(matrix)
    return factor.solve


def amg(matrix, max_coarse: int | None = None) -> Preconditioner:
    """
    One smoothed aggregation V-cycle.

    The cycle uses symmetric Gauss-Seidel smoothing, so for an SPD matrix it
    is an SPD preconditioner fit for CG.
    """
    hierarchy = pyamg.smoothed_aggregation_solver(
        sp.csr_matrix(matrix, dtype=float),
        max_coarse=max_coarse or settings.amg_max_coarse,
    )
    logger.debug("AMG hierarchy with %d levels", len(hierarchy.levels))
    return hierarchy.aspreconditioner(cycle="V").matvec


BUILDERS: dict[PreconditionerKind, Callable[..., Preconditioner]] = {
    PreconditionerKind.JACOBI: jacobi,
    PreconditionerKind.ILU: ilu,
    PreconditionerKind.AMG: amg,
}


def build_preconditioner(kind: PreconditionerKind | str, matrix) -> Preconditioner:
    return BUILDERS[PreconditionerKind(kind)](matrix)
