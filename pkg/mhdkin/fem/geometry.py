import logging
from collections.abc import Callable, Iterator
from dataclasses import dataclass

import numpy as np

from mhdkin.core.config import settings
from mhdkin.core.exceptions import DegenerateCellError
from mhdkin.fem.quadrature import QuadratureRule, grundmann_moeller
from mhdkin.mesh import TetMesh

logger = logging.getLogger(__name__)


@dataclass(frozen=True)
class CellBatch:
    """
    Affine geometry of a contiguous chunk of cells.

    Vertices are taken in ascending global order (``mesh.sorted_cells``),
    which is the local order all finite element bases are written in.
    """

    cells: np.ndarray  # (t,) cell indices
    coordinates: np.ndarray  # (t, 4, 3)
    jacobian: np.ndarray  # (t, 3, 3), columns x_k - x_0
    determinant: np.ndarray  # (t,)
    grads: np.ndarray  # (t, 4, 3) gradients of the barycentric coordinates

    @property
    def size(self) -> int:
        return len(self.cells)

    @property
    def volumes(self) -> np.ndarray:
        return np.abs(self.determinant) / 6.0

    def map(self, lam: np.ndarray) -> np.ndarray:
        """Physical points for barycentric lam of shape (P, 4) or (t, P, 4)."""
        if lam.ndim == 2:
            return np.einsum("pv,tvd->tpd", lam, self.coordinates)
        return np.einsum("tpv,tvd->tpd", lam, self.coordinates)

    def barycentric(self, points: np.ndarray) -> np.ndarray:
        """Barycentric coordinates (t, P, 4) of physical points (t, P, 3)."""
        local = np.einsum("tkd,tpd->tpk", self.grads[:, 1:], points - self.coordinates[:, None, 0])
        return np.concatenate([1.0 - local.sum(axis=2, keepdims=True), local], axis=2)

    def weights(self, rule: QuadratureRule) -> np.ndarray:
        """(t, P) physical quadrature weights."""
        return self.volumes[:, None] * rule.weights[None, :]

    def broadcast(self, lam: np.ndarray) -> np.ndarray:
        """Barycentric points as (t, P, 4)."""
        if lam.ndim == 3:
            return lam
        return np.broadcast_to(lam, (self.size, *lam.shape))


def cell_batch(mesh: TetMesh, cells: np.ndarray) -> CellBatch:
    """
    Compute Jacobians and barycentric gradients for the given cells.

    Raises:
        DegenerateCellError: If a Jacobian is numerically singular
    """
    coordinates = mesh.vertices[mesh.sorted_cells[cells]]
    jacobian = np.transpose(coordinates[:, 1:] - coordinates[:, :1], (0, 2, 1))
    determinant = np.linalg.det(jacobian)
    degenerate = np.abs(determinant) <= 1e-12 * mesh.h**3
    if np.any(degenerate):
        raise DegenerateCellError(cells[degenerate].tolist())

    inverse = np.linalg.inv(jacobian)  # rows are grad(lambda_1..3)
    grads = np.empty((len(cells), 4, 3))
    grads[:, 1:] = inverse
    grads[:, 0] = -inverse.sum(axis=1)
    return CellBatch(
        cells=cells,
        coordinates=coordinates,
        jacobian=jacobian,
        determinant=determinant,
        grads=grads,
    )


def iter_batches(mesh: TetMesh, chunk_size: int | None = None) -> Iterator[CellBatch]:
    """Yield the mesh cells in chunks of at most chunk_size."""
    chunk_size = chunk_size or settings.assembly_chunk_size
    for start in range(0, mesh.n_cells, chunk_size):
        cells = np.arange(start, min(start + chunk_size, mesh.n_cells))
        yield cell_batch(mesh, cells)


def integrate(
    mesh: TetMesh,
    integrand: Callable[[CellBatch, np.ndarray], np.ndarray],
    degree: int | None = None,
) -> float:
    """
    Integrate a cellwise integrand over the whole mesh.

    Args:
        mesh: mesh to integrate over
        integrand: maps (batch, lam) to (t, P) values at the quadrature points
        degree: quadrature exactness, defaults to settings.quadrature_degree

    Returns:
        The integral as a float
    """
    rule = grundmann_moeller(3, degree or settings.quadrature_degree)
    total = 0.0
    for batch in iter_batches(mesh):
        values = integrand(batch, rule.points)
        total += float(np.sum(batch.weights(rule) * values))
    return total
