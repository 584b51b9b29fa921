import logging
from collections.abc import Callable
from enum import StrEnum

import numpy as np
import scipy.sparse as sp

from mhdkin.core.config import settings
from mhdkin.core.exceptions import MeshMismatchError
from mhdkin.fem import (
    CellBatch,
    FeSpace,
    MixedSpaces,
    QuadratureRule,
    eval_basis,
    evaluate_field,
    grundmann_moeller,
    iter_batches,
)
from mhdkin.models.case import PhysicsCase

logger = logging.getLogger(__name__)

# Products of the linear and quadratic bases are integrated exactly at this degree
POLYNOMIAL_DEGREE = 2

LocalKernel = Callable[[CellBatch, QuadratureRule], np.ndarray]


class BlockName(StrEnum):
    M = "M"
    G = "G"
    K = "K"
    X = "X"
    F = "F"
    B = "B"
    F_W = "F_w"
    F_HAT_W = "F_hat_w"
    M_HAT = "M_hat"
    Q = "Q"
    Q_HAT = "Q_hat"
    L = "L"


class FieldName(StrEnum):
    J = "J"
    PHI = "phi"
    A = "A"
    R = "r"


FIELD_ORDER = (FieldName.J, FieldName.PHI, FieldName.A, FieldName.R)


def field_spaces(spaces: MixedSpaces) -> dict[FieldName, FeSpace]:
    return {
        FieldName.J: spaces.v2,
        FieldName.PHI: spaces.v3,
        FieldName.A: spaces.v1,
        FieldName.R: spaces.v0,
    }


def _assemble_global(
    test: FeSpace,
    trial: FeSpace,
    kernel: LocalKernel,
    degree: int,
) -> sp.csr_matrix:
    """Sum local matrices (t, n_test, n_trial) into a global CSR matrix."""
    if test.mesh is not trial.mesh:
        raise MeshMismatchError()
    rule = grundmann_moeller(3, degree)
    rows, cols, vals = [], [], []
    for batch in iter_batches(test.mesh):
        local = kernel(batch, rule)
        test_dofs = test.cell_dofs[batch.cells]
        trial_dofs = trial.cell_dofs[batch.cells]
        rows.append(np.broadcast_to(test_dofs[:, :, None], local.shape).ravel())
        cols.append(np.broadcast_to(trial_dofs[:, None, :], local.shape).ravel())
        vals.append(local.ravel())
    matrix = sp.coo_matrix(
        (np.concatenate(vals), (np.concatenate(rows), np.concatenate(cols))),
        shape=(test.n_dofs, trial.n_dofs),
    ).tocsr()
    matrix.sum_duplicates()
    matrix.sort_indices()
    return matrix


def reduce_block(matrix: sp.csr_matrix, test: FeSpace, trial: FeSpace) -> sp.csr_matrix:
    return matrix[test.free_dofs][:, trial.free_dofs].tocsr()


def _vector_mass(space: FeSpace, scale: float = 1.0) -> LocalKernel:
    def kernel(batch, rule):
        values = eval_basis(space, batch, rule.points).values
        return scale * np.einsum("tp,tpid,tpjd->tij", batch.weights(rule), values, values)

    return kernel


def _derivative_product(space: FeSpace, scale: float = 1.0) -> LocalKernel:
    """(D u_j, D u_i) for the gradient, curl or divergence D of the space."""

    def kernel(batch, rule):
        derivative = eval_basis(space, batch, rule.points).derivative
        weights = batch.weights(rule)
        if derivative.ndim == 3:
            return scale * np.einsum("tp,tpi,tpj->tij", weights, derivative, derivative)
        return scale * np.einsum("tp,tpid,tpjd->tij", weights, derivative, derivative)

    return kernel


def _velocity(case: PhysicsCase, batch: CellBatch, rule: QuadratureRule) -> np.ndarray:
    return evaluate_field(case.w, batch.map(rule.points))


def assemble_block(
    name: BlockName | str,
    spaces: MixedSpaces,
    case: PhysicsCase,
    reduced: bool = True,
) -> sp.csr_matrix:
    """
    Assemble one sub-block of the saddle-point operator or its preconditioner.

    Args:
        name: block to assemble
        spaces: the four spaces on a common mesh
        case: coefficients and velocity
        reduced: drop rows and columns of constrained (essential boundary) dofs

    Returns:
        CSR matrix with rows indexing the test space and columns the trial space
    """
    name = BlockName(name)
    v0, v1, v2, v3 = spaces.v0, spaces.v1, spaces.v2, spaces.v3
    coefficient_degree = settings.quadrature_degree

    exact = POLYNOMIAL_DEGREE

    match name:
        case BlockName.M:
            test, trial = v2, v2
            full = _assemble_global(v2, v2, _vector_mass(v2, case.eta), exact)

        case BlockName.M_HAT:
            test, trial = v2, v2
            full = _assemble_global(v2, v2, _vector_mass(v2, case.eta), exact)
            full = full + _assemble_global(
                v2, v2, _derivative_product(v2, case.eta), exact
            )

        case BlockName.G:
            test, trial = v3, v2

            def kernel(batch, rule):
                divergence = eval_basis(v2, batch, rule.points).derivative
                weights = batch.weights(rule)
                return -np.einsum("tp,tpj->tj", weights, divergence)[:, None, :]

            full = _assemble_global(v3, v2, kernel, exact)

        case BlockName.K:
            test, trial = v2, v1

            def kernel(batch, rule):
                values = eval_basis(v2, batch, rule.points).values
                curls = eval_basis(v1, batch, rule.points).derivative
                w = _velocity(case, batch, rule)
                advected = np.cross(curls, w[:, :, None, :])
                return np.einsum(
                    "tp,tpid,tpjd->tij", batch.weights(rule), values, advected
                )

            full = _assemble_global(v2, v1, kernel, coefficient_degree)

        case BlockName.X:
            test, trial = v1, v2

            def kernel(batch, rule):
                a = eval_basis(v1, batch, rule.points).values
                phi = eval_basis(v2, batch, rule.points).values
                return -np.einsum("tp,tpid,tpjd->tij", batch.weights(rule), a, phi)

            full = _assemble_global(v1, v2, kernel, exact)

        case BlockName.F:
            test, trial = v1, v1
            full = _assemble_global(v1, v1, _derivative_product(v1, case.nu_m), exact)

        case BlockName.F_W | BlockName.F_HAT_W:
            test, trial = v1, v1

            # sigma (curl a_j, w x a_i)
            def kernel(batch, rule):
                basis = eval_basis(v1, batch, rule.points)
                w = _velocity(case, batch, rule)
                transported = np.cross(w[:, :, None, :], basis.values)
                return case.sigma * np.einsum(
                    "tp,tpid,tpjd->tij",
                    batch.weights(rule),
                    transported,
                    basis.derivative,
                )

            full = _assemble_global(v1, v1, _derivative_product(v1, case.nu_m), exact)
            if case.has_velocity:
                full = full + _assemble_global(v1, v1, kernel, coefficient_degree)
            if name is BlockName.F_HAT_W:
                full = full + _assemble_global(v1, v1, _vector_mass(v1), exact)

        case BlockName.B:
            test, trial = v0, v1

            def kernel(batch, rule):
                grads = eval_basis(v0, batch, rule.points).derivative
                a = eval_basis(v1, batch, rule.points).values
                return np.einsum("tp,tpid,tpjd->tij", batch.weights(rule), grads, a)

            full = _assemble_global(v0, v1, kernel, exact)

        case BlockName.Q | BlockName.Q_HAT:
            # P0 basis is the constant one, so the mass matrix is diagonal
            test, trial = v3, v3
            scale = case.sigma if name is BlockName.Q_HAT else 1.0
            full = sp.diags(scale * np.abs(spaces.mesh.volumes), format="csr")

        case BlockName.L:
            test, trial = v0, v0
            full = _assemble_global(v0, v0, _derivative_product(v0), exact)

    logger.debug("Assembled %s: shape %s, nnz %d", name, full.shape, full.nnz)
    if not reduced:
        return full
    return reduce_block(full, test, trial)

