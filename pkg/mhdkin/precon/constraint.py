"""
Dense check of constraint preconditioning on small systems.

With the unknowns reordered to (J, A | phi, r) the system reads
[[Z, N^T], [N, 0]] with Z = [[M, K], [X, F]] and N = [[G, 0], [0, B]]. A
preconditioner sharing N but replacing Z by some Z_tilde has the eigenvalue
1 with multiplicity at least twice the number of constraint rows; the
remaining eigenvalues are those of (V^T Z_tilde V)^{-1} (V^T Z V) with V a
basis of ker N.
"""

import logging
from dataclasses import dataclass

import numpy as np
import scipy.linalg as la
from scipy.optimize import linear_sum_assignment

from mhdkin.assembly import BlockName, BlockSystem, FieldName, assemble_block
from mhdkin.core.config import settings
from mhdkin.core.exceptions import (
    DenseSizeError,
    EigenSolverError,
    RankDeficientConstraintError,
    SpectrumMismatchError,
)

logger = logging.getLogger(__name__)

PRIMAL_FIELDS = (FieldName.J, FieldName.A)
CONSTRAINT_FIELDS = (FieldName.PHI, FieldName.R)


@dataclass
class ConstraintSystem:
    A_tilde: np.ndarray
    P_tilde: np.ndarray
    Z: np.ndarray
    Z_tilde: np.ndarray
    N: np.ndarray
    permutation: np.ndarray  # reordered position -> position in (J, phi, A, r)

    @property
    def n_primal(self) -> int:
        return self.Z.shape[0]

    @property
    def n_constraints(self) -> int:
        return self.N.shape[0]


@dataclass
class SpectrumReport:
    unit_count: int
    cluster_count: int
    reduced_unit_count: int
    n_primal: int
    n_constraints: int
    eigenvalues: np.ndarray
    reduced_eigenvalues: np.ndarray
    max_mismatch: float
    null_space_residual: float


def build_constraint_preconditioner_dense(
    system: BlockSystem,
    exact_z: bool = False,
    size_cap: int | None = None,
) -> ConstraintSystem:
    """
    Dense (A_tilde, P_tilde) in the (J, A | phi, r) ordering.

    Args:
        system: assembled system on a coarse mesh
        exact_z: use Z_tilde = Z instead of [[M, K], [0, F_w]]
        size_cap: largest allowed dense dimension, settings.dense_size_cap by default

    Raises:
        DenseSizeError: If the system is larger than the cap
    """
    size_cap = size_cap or settings.dense_size_cap
    if system.size > size_cap:
        raise DenseSizeError(system.size, size_cap)

    offsets, sizes = system.offsets, system.sizes
    permutation = np.concatenate(
        [
            np.arange(offsets[name], offsets[name] + sizes[name])
            for name in (*PRIMAL_FIELDS, *CONSTRAINT_FIELDS)
        ]
    )
    A_tilde = system.matrix().toarray()[np.ix_(permutation, permutation)]
    n_primal = sizes[FieldName.J] + sizes[FieldName.A]

    Z = A_tilde[:n_primal, :n_primal]
    N = A_tilde[n_primal:, :n_primal]
    if exact_z:
        Z_tilde = Z.copy()
    else:
        F_w = system.blocks.get(BlockName.F_W)
        if F_w is None:
            F_w = assemble_block(BlockName.F_W, system.spaces, system.case)
        n_j = sizes[FieldName.J]
        Z_tilde = Z.copy()
        Z_tilde[n_j:, :n_j] = 0.0
        Z_tilde[n_j:, n_j:] = F_w.toarray()

    P_tilde = A_tilde.copy()
    P_tilde[:n_primal, :n_primal] = Z_tilde
    logger.debug(
        "Dense constraint system: %d primal, %d constraint unknowns", n_primal, N.shape[0]
    )
    return ConstraintSystem(
        A_tilde=A_tilde,
        P_tilde=P_tilde,
        Z=Z,
        Z_tilde=Z_tilde,
        N=N,
        permutation=permutation,
    )


def verify_unit_eigenvalue_multiplicity(
    constraint: ConstraintSystem,
    tol: float = 1e-6,
    cluster_tol: float | None = None,
) -> SpectrumReport:
    """
    Count the unit eigenvalues of P_tilde^{-1} A_tilde and compare the rest
    with the reduced spectrum on ker N.

    The unit eigenvalue is defective and also absorbs the unit eigenvalues of
    the reduced problem, so its computed copies scatter well beyond machine
    precision. The cluster is therefore counted within ``cluster_tol`` and
    must hold exactly 2 N_L plus the reduced unit eigenvalues; only the
    eigenvalues off the cluster are matched against the reduced spectrum.

    Returns:
        SpectrumReport; ``unit_count`` is the number of eigenvalues within tol of 1

    Raises:
        RankDeficientConstraintError: If N does not have full row rank
        EigenSolverError: If a generalized eigenproblem cannot be solved
        SpectrumMismatchError: If fewer than 2 N_L unit eigenvalues are found,
            the cluster has the wrong size, or the remaining eigenvalues do
            not match the reduced spectrum
    """
    cluster_tol = cluster_tol or settings.unit_cluster_tol
    N = constraint.N
    n_constraints, n_primal = N.shape
    rank = int(np.linalg.matrix_rank(N))
    if rank < n_constraints:
        raise RankDeficientConstraintError(rank, n_constraints)

    eigenvalues = _generalized_eigenvalues(constraint.A_tilde, constraint.P_tilde)
    distance = np.abs(eigenvalues - 1.0)
    unit_count = int(np.sum(distance <= tol))
    if unit_count < 2 * n_constraints:
        raise SpectrumMismatchError(
            f"{unit_count} unit eigenvalues, expected at least {2 * n_constraints}",
            {"unit_count": unit_count, "n_constraints": n_constraints},
        )

    V = la.null_space(N)
    null_space_residual = float(np.max(np.abs(N @ V), initial=0.0))
    reduced = _generalized_eigenvalues(
        V.T @ constraint.Z @ V, V.T @ constraint.Z_tilde @ V
    )

    in_cluster = distance <= cluster_tol
    reduced_in_cluster = np.abs(reduced - 1.0) <= cluster_tol
    cluster_count = int(np.sum(in_cluster))
    reduced_unit_count = int(np.sum(reduced_in_cluster))
    if cluster_count != 2 * n_constraints + reduced_unit_count:
        raise SpectrumMismatchError(
            f"{cluster_count} eigenvalues near 1, expected 2 N_L + {reduced_unit_count}"
            f" = {2 * n_constraints + reduced_unit_count}",
            {
                "cluster_count": cluster_count,
                "reduced_unit_count": reduced_unit_count,
                "n_constraints": n_constraints,
            },
        )

    # equal sizes follow from the cluster count
    remaining = eigenvalues[~in_cluster]
    reduced_remaining = reduced[~reduced_in_cluster]
    max_mismatch = 0.0
    if len(remaining):
        cost = np.abs(remaining[:, None] - reduced_remaining[None, :])
        rows, cols = linear_sum_assignment(cost)
        scale = np.maximum(1.0, np.abs(reduced_remaining[cols]))
        max_mismatch = float(np.max(cost[rows, cols] / scale))
    if max_mismatch > tol:
        raise SpectrumMismatchError(
            f"non-unit eigenvalues differ from the reduced spectrum by {max_mismatch:.3e}",
            {"max_mismatch": max_mismatch},
        )

    logger.info(
        "Constraint preconditioning: %d unit eigenvalues (2 N_L = %d), %d in the cluster"
        " with %d from the reduced spectrum, the rest matched to %.2e",
        unit_count,
        2 * n_constraints,
        cluster_count,
        reduced_unit_count,
        max_mismatch,
    )
    return SpectrumReport(
        unit_count=unit_count,
        cluster_count=cluster_count,
        reduced_unit_count=reduced_unit_count,
        n_primal=n_primal,
        n_constraints=n_constraints,
        eigenvalues=eigenvalues,
        reduced_eigenvalues=reduced,
        max_mismatch=max_mismatch,
        null_space_residual=null_space_residual,
    )


def _generalized_eigenvalues(a: np.ndarray, b: np.ndarray) -> np.ndarray:
    try:
        eigenvalues = la.eigvals(a, b)
    except (la.LinAlgError, ValueError) as exc:
        raise EigenSolverError(str(exc)) from exc
    if not np.all(np.isfinite(eigenvalues)):
        raise EigenSolverError("preconditioner is singular (infinite eigenvalues)")
    return eigenvalues
