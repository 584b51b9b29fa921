import logging

import numpy as np
import scipy.sparse as sp

from mhdkin.assembly.blocks import BlockName, FieldName, assemble_block
from mhdkin.core.config import settings
from mhdkin.fem import (
    FeSpace,
    MixedSpaces,
    cell_batch,
    eval_basis,
    evaluate_field,
    grundmann_moeller,
    interpolate,
    iter_batches,
)
from mhdkin.models.case import PhysicsCase

logger = logging.getLogger(__name__)


def load_vector(space: FeSpace, source, degree: int | None = None) -> np.ndarray:
    """(source, v) for every basis function v of a vector-valued space."""
    rule = grundmann_moeller(3, degree or settings.quadrature_degree)
    load = np.zeros(space.n_dofs)
    for batch in iter_batches(space.mesh):
        values = eval_basis(space, batch, rule.points).values
        samples = evaluate_field(source, batch.map(rule.points))
        local = np.einsum("tp,tpid,tpd->ti", batch.weights(rule), values, samples)
        np.add.at(load, space.cell_dofs[batch.cells], local)
    return load


def boundary_flux_vector(space: FeSpace, scalar, degree: int | None = None) -> np.ndarray:
    """
    Boundary integral of scalar * (v . n) with the outward unit normal n.

    Each boundary face is integrated from its single adjacent cell, whose
    basis is evaluated at the face quadrature points.
    """
    mesh = space.mesh
    rule = grundmann_moeller(2, degree or settings.quadrature_degree)
    faces = np.flatnonzero(mesh.boundary_faces)
    owners = mesh.face_cells[faces, 0]

    corners = mesh.vertices[mesh.faces[faces]]
    normal = np.cross(corners[:, 1] - corners[:, 0], corners[:, 2] - corners[:, 0])
    area = 0.5 * np.linalg.norm(normal, axis=1)
    centroids = mesh.vertices[mesh.cells[owners]].mean(axis=1)
    outward = np.einsum("fd,fd->f", normal, corners[:, 0] - centroids) > 0
    unit_normal = np.where(outward[:, None], 1.0, -1.0) * normal / (2.0 * area[:, None])

    points = np.einsum("pk,fkd->fpd", rule.points, corners)
    weights = area[:, None] * rule.weights[None, :]
    values = weights * evaluate_field(scalar, points)

    flux = np.zeros(space.n_dofs)
    chunk = settings.assembly_chunk_size
    for start in range(0, len(faces), chunk):
        part = slice(start, start + chunk)
        batch = cell_batch(mesh, owners[part])
        lam = batch.barycentric(points[part])
        basis = eval_basis(space, batch, lam).values
        local = np.einsum("fp,fpid,fd->fi", values[part], basis, unit_normal[part])
        np.add.at(flux, space.cell_dofs[owners[part]], local)
    return flux


def assemble_rhs(
    spaces: MixedSpaces,
    case: PhysicsCase,
    full_blocks: dict[BlockName, sp.csr_matrix] | None = None,
) -> tuple[dict[FieldName, np.ndarray], np.ndarray]:
    """
    Assemble the reduced right-hand sides (b_J, b_phi, b_A, b_r).

    The tangential boundary datum of A is interpolated onto the constrained
    V1 dofs and moved to the right-hand side through every block with V1
    columns (K, F and B).

    Args:
        spaces: the four spaces on a common mesh
        case: sources and boundary data
        full_blocks: unreduced K, F and B when already assembled

    Returns:
        (rhs per field, boundary values of the constrained V1 dofs)
    """
    full_blocks = dict(full_blocks or {})
    for name in (BlockName.K, BlockName.F, BlockName.B):
        if name not in full_blocks:
            full_blocks[name] = assemble_block(name, spaces, case, reduced=False)

    v0, v1, v2, v3 = spaces.v0, spaces.v1, spaces.v2, spaces.v3
    constrained = v1.constrained_dofs
    a_boundary = interpolate(v1, case.a_boundary)[constrained]

    b_j = load_vector(v2, case.f1) - boundary_flux_vector(v2, case.phi_boundary)
    b_j -= full_blocks[BlockName.K][:, constrained] @ a_boundary
    b_a = load_vector(v1, case.g)[v1.free_dofs]
    b_a -= full_blocks[BlockName.F][v1.free_dofs][:, constrained] @ a_boundary
    b_r = -(full_blocks[BlockName.B][v0.free_dofs][:, constrained] @ a_boundary)

    rhs = {
        FieldName.J: b_j[v2.free_dofs],
        FieldName.PHI: np.zeros(v3.n_free),
        FieldName.A: b_a,
        FieldName.R: b_r,
    }
    logger.debug(
        "Right-hand side norms: %s",
        {name: float(np.linalg.norm(vector)) for name, vector in rhs.items()},
    )
    return rhs, a_boundary
