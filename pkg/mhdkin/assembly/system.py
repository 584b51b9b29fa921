import logging
from dataclasses import dataclass, field

import numpy as np
import scipy.sparse as sp

from mhdkin.assembly.blocks import (
    FIELD_ORDER,
    BlockName,
    FieldName,
    assemble_block,
    field_spaces,
    reduce_block,
)
from mhdkin.assembly.rhs import assemble_rhs
from mhdkin.core.exceptions import DimensionMismatchError
from mhdkin.fem import MixedSpaces
from mhdkin.models.case import PhysicsCase

logger = logging.getLogger(__name__)


@dataclass(eq=False)
class BlockSystem:
    """
    Reduced blocks and right-hand sides of the (J, phi, A, r) system.

    ``a_boundary`` holds the values of the constrained V1 dofs the
    right-hand side was lifted with.
    """

    spaces: MixedSpaces
    case: PhysicsCase
    blocks: dict[BlockName, sp.csr_matrix]
    rhs: dict[FieldName, np.ndarray]
    a_boundary: np.ndarray
    metadata: dict[str, float] = field(default_factory=dict)

    @property
    def sizes(self) -> dict[FieldName, int]:
        return {name: space.n_free for name, space in field_spaces(self.spaces).items()}

    @property
    def offsets(self) -> dict[FieldName, int]:
        offsets, start = {}, 0
        for name in FIELD_ORDER:
            offsets[name] = start
            start += self.sizes[name]
        return offsets

    @property
    def size(self) -> int:
        return sum(self.sizes.values())

    def dof_counts(self) -> dict[FieldName, int]:
        """Unreduced dof counts per field."""
        return {name: space.n_dofs for name, space in field_spaces(self.spaces).items()}

    def matrix(self) -> sp.csr_matrix:
        b = self.blocks
        return sp.block_array(
            [
                [b[BlockName.M], b[BlockName.G].T, b[BlockName.K], None],
                [b[BlockName.G], None, None, None],
                [b[BlockName.X], None, b[BlockName.F], b[BlockName.B].T],
                [None, None, b[BlockName.B], None],
            ],
            format="csr",
        )

    def rhs_vector(self) -> np.ndarray:
        return np.concatenate([self.rhs[name] for name in FIELD_ORDER])

    def split(self, x: np.ndarray) -> dict[FieldName, np.ndarray]:
        """Split a reduced vector into its field parts."""
        if len(x) != self.size:
            raise DimensionMismatchError(self.size, len(x))
        offsets, sizes = self.offsets, self.sizes
        return {name: x[offsets[name] : offsets[name] + sizes[name]] for name in FIELD_ORDER}

    def join(self, parts: dict[FieldName, np.ndarray]) -> np.ndarray:
        return np.concatenate([parts[name] for name in FIELD_ORDER])

    def expand(self, x: np.ndarray) -> dict[FieldName, np.ndarray]:
        """Full coefficient vectors per field, boundary data inserted for A."""
        full = {}
        for name, space in field_spaces(self.spaces).items():
            coefficients = np.zeros(space.n_dofs)
            coefficients[space.free_dofs] = self.split(x)[name]
            full[name] = coefficients
        full[FieldName.A][self.spaces.v1.constrained_dofs] = self.a_boundary
        return full


SYSTEM_BLOCKS = (
    BlockName.M,
    BlockName.G,
    BlockName.K,
    BlockName.X,
    BlockName.F,
    BlockName.B,
)
PRECONDITIONER_BLOCKS = (
    BlockName.M_HAT,
    BlockName.Q_HAT,
    BlockName.F_HAT_W,
    BlockName.L,
)

# Blocks whose constrained V1 columns lift the boundary datum of A
_LIFTING_BLOCKS = (BlockName.K, BlockName.F, BlockName.B)


def assemble_system(
    spaces: MixedSpaces,
    case: PhysicsCase,
    with_preconditioner: bool = True,
) -> BlockSystem:
    """
    Assemble the reduced saddle-point system and its right-hand side.

    Args:
        spaces: the four spaces on a common mesh
        case: physics case
        with_preconditioner: also assemble M_hat, Q_hat, F_hat_w and L

    Returns:
        BlockSystem ready for the outer solver
    """
    full = {
        name: assemble_block(name, spaces, case, reduced=False)
        for name in _LIFTING_BLOCKS
    }
    test_trial = {
        BlockName.K: (spaces.v2, spaces.v1),
        BlockName.F: (spaces.v1, spaces.v1),
        BlockName.B: (spaces.v0, spaces.v1),
    }
    blocks = {
        name: reduce_block(matrix, *test_trial[name]) for name, matrix in full.items()
    }
    for name in (BlockName.M, BlockName.G, BlockName.X):
        blocks[name] = assemble_block(name, spaces, case)
    if with_preconditioner:
        for name in PRECONDITIONER_BLOCKS:
            blocks[name] = assemble_block(name, spaces, case)

    rhs, a_boundary = assemble_rhs(spaces, case, full)
    system = BlockSystem(
        spaces=spaces, case=case, blocks=blocks, rhs=rhs, a_boundary=a_boundary
    )
    logger.info(
        "Assembled %s system on %d cells: %d unknowns",
        case.name,
        spaces.mesh.n_cells,
        system.size,
    )
    return system
