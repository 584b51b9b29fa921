import logging
from collections.abc import Callable
from dataclasses import dataclass
from functools import cached_property

import numpy as np
import scipy.sparse as sp

from mhdkin.core.config import settings
from mhdkin.core.exceptions import DimensionMismatchError, MeshMismatchError
from mhdkin.fem.geometry import CellBatch, iter_batches
from mhdkin.fem.quadrature import gauss_legendre_01, grundmann_moeller
from mhdkin.fem.reference import REFERENCE_ELEMENTS, ReferenceElement, SpaceKind
from mhdkin.mesh import TetMesh

logger = logging.getLogger(__name__)

# Maps (N, 3) points to (N, 3) vectors or (N,) scalars
SmoothField = Callable[[np.ndarray], np.ndarray]


@dataclass(frozen=True, eq=False)
class FeSpace:
    """
    Conforming finite element space on a mesh.

    ``cell_dofs[t, i]`` is the global degree of freedom of local basis
    function i on cell t. Local functions are written in the ascending
    vertex order of the cell, so a shared entity carries the same
    functionals, with the same sign, in every cell that sees it.
    """

    kind: SpaceKind
    mesh: TetMesh
    cell_dofs: np.ndarray
    n_dofs: int
    constrained_dofs: np.ndarray

    @property
    def element(self) -> ReferenceElement:
        return REFERENCE_ELEMENTS[self.kind]

    @cached_property
    def free_dofs(self) -> np.ndarray:
        mask = np.ones(self.n_dofs, dtype=bool)
        mask[self.constrained_dofs] = False
        return np.flatnonzero(mask)

    @property
    def n_free(self) -> int:
        return len(self.free_dofs)


@dataclass(frozen=True)
class BasisValues:
    values: np.ndarray  # (t, P, n_local) or (t, P, n_local, 3)
    derivative: np.ndarray | None  # gradient, curl, divergence or None


def build_space(mesh: TetMesh, kind: SpaceKind | str) -> FeSpace:
    """
    Build the global degree-of-freedom map of one space.

    Args:
        mesh: mesh the space lives on
        kind: V0 (P2), V1 (full P1 edge), V2 (BDM1) or V3 (P0)

    Returns:
        FeSpace with cell-to-dof map and constrained (essential boundary) dofs
    """
    kind = SpaceKind(kind)
    edges = mesh.sorted_cell_edges
    faces = mesh.sorted_cell_faces
    boundary_edges = np.flatnonzero(mesh.boundary_edges)

    if kind is SpaceKind.V0:
        cell_dofs = np.concatenate([mesh.sorted_cells, mesh.n_vertices + edges], axis=1)
        n_dofs = mesh.n_vertices + mesh.n_edges
        constrained = np.concatenate(
            [np.flatnonzero(mesh.boundary_vertices), mesh.n_vertices + boundary_edges]
        )
    elif kind is SpaceKind.V1:
        cell_dofs = (2 * edges[:, :, None] + np.arange(2)).reshape(mesh.n_cells, 12)
        n_dofs = 2 * mesh.n_edges
        constrained = (2 * boundary_edges[:, None] + np.arange(2)).ravel()
    elif kind is SpaceKind.V2:
        cell_dofs = (3 * faces[:, :, None] + np.arange(3)).reshape(mesh.n_cells, 12)
        n_dofs = 3 * mesh.n_faces
        constrained = np.empty(0, dtype=np.int64)
    else:
        cell_dofs = np.arange(mesh.n_cells)[:, None]
        n_dofs = mesh.n_cells
        constrained = np.empty(0, dtype=np.int64)

    space = FeSpace(
        kind=kind,
        mesh=mesh,
        cell_dofs=cell_dofs,
        n_dofs=int(n_dofs),
        constrained_dofs=np.sort(constrained),
    )
    logger.debug(
        "Space %s: %d dofs, %d constrained", kind, space.n_dofs, len(constrained)
    )
    return space


@dataclass(frozen=True, eq=False)
class MixedSpaces:
    """The four spaces of the (J, phi, A, r) formulation on one mesh."""

    v0: FeSpace
    v1: FeSpace
    v2: FeSpace
    v3: FeSpace

    def __post_init__(self):
        meshes = {id(space.mesh) for space in (self.v0, self.v1, self.v2, self.v3)}
        if len(meshes) != 1:
            raise MeshMismatchError()

    @property
    def mesh(self) -> TetMesh:
        return self.v2.mesh

    @classmethod
    def build(cls, mesh: TetMesh) -> "MixedSpaces":
        return cls(
            v0=build_space(mesh, SpaceKind.V0),
            v1=build_space(mesh, SpaceKind.V1),
            v2=build_space(mesh, SpaceKind.V2),
            v3=build_space(mesh, SpaceKind.V3),
        )


def eval_basis(space: FeSpace, batch: CellBatch, lam: np.ndarray) -> BasisValues:
    """
    Evaluate the physical basis of a space on a batch of cells.

    Args:
        space: the finite element space
        batch: cells to evaluate on
        lam: barycentric points, (P, 4) shared or (t, P, 4) per cell

    Returns:
        BasisValues with local functions on axis 2
    """
    values, derivative = space.element.basis(batch.broadcast(lam), batch.grads)
    return BasisValues(values=values, derivative=derivative)


@dataclass(frozen=True, eq=False)
class FeFunction:
    space: FeSpace
    coefficients: np.ndarray

    def __post_init__(self):
        if len(self.coefficients) != self.space.n_dofs:
            raise DimensionMismatchError(self.space.n_dofs, len(self.coefficients))

    def _local(self, batch: CellBatch) -> np.ndarray:
        return self.coefficients[self.space.cell_dofs[batch.cells]]

    def evaluate(self, batch: CellBatch, lam: np.ndarray) -> np.ndarray:
        basis = eval_basis(self.space, batch, lam)
        return _combine(basis.values, self._local(batch))

    def derivative(self, batch: CellBatch, lam: np.ndarray) -> np.ndarray:
        """Gradient (V0), curl (V1) or divergence (V2) at the given points."""
        basis = eval_basis(self.space, batch, lam)
        if basis.derivative is None:
            return np.zeros(basis.values.shape[:2])
        return _combine(basis.derivative, self._local(batch))


def interpolate(space: FeSpace, field: SmoothField, degree: int | None = None) -> np.ndarray:
    """
    Canonical interpolant: apply every global functional to a smooth field.

    Args:
        space: target space
        field: vector field for V1 and V2, scalar field for V0 and V3
        degree: quadrature exactness for the moments

    Returns:
        Coefficient vector of length space.n_dofs
    """
    mesh = space.mesh
    degree = degree or settings.quadrature_degree
    vertices = mesh.vertices

    if space.kind is SpaceKind.V0:
        midpoints = 0.5 * (vertices[mesh.edges[:, 0]] + vertices[mesh.edges[:, 1]])
        return np.concatenate([field(vertices), field(midpoints)])

    if space.kind is SpaceKind.V1:
        s, w = gauss_legendre_01(max(3, (degree + 2) // 2))
        start = vertices[mesh.edges[:, 0]]
        tangent = vertices[mesh.edges[:, 1]] - start
        points = start[:, None] + s[None, :, None] * tangent[:, None]
        values = evaluate_field(field, points)
        tangential = np.einsum("epd,ed->ep", values, tangent)
        moments = np.stack([tangential @ w, tangential @ (w * s)], axis=1)
        return moments.ravel()

    if space.kind is SpaceKind.V2:
        rule = grundmann_moeller(2, degree)
        corners = vertices[mesh.faces]
        normal = np.cross(corners[:, 1] - corners[:, 0], corners[:, 2] - corners[:, 0])
        points = np.einsum("pk,fkd->fpd", rule.points, corners)
        fluxes = np.einsum("fpd,fd->fp", evaluate_field(field, points), normal)
        weights = 0.5 * rule.weights
        moments = fluxes @ (weights[:, None] * np.stack(
            [np.ones(rule.size), rule.points[:, 1], rule.points[:, 2]], axis=1
        ))
        return moments.ravel()

    rule = grundmann_moeller(3, degree)
    means = np.empty(mesh.n_cells)
    for batch in iter_batches(mesh):
        means[batch.cells] = evaluate_field(field, batch.map(rule.points)) @ rule.weights
    return means


def discrete_gradient(mesh: TetMesh) -> sp.csr_matrix:
    """
    Interpolation of gradients, V0 -> V1.

    Gradients of P2 functions are P1 and are reproduced exactly, so the
    edge moments follow from the vertex and midpoint values alone:
    the constant moment is u_b - u_a and the linear one is
    u_b - (u_a + 4 u_m + u_b) / 6.
    """
    n_edges = mesh.n_edges
    a, b = mesh.edges[:, 0], mesh.edges[:, 1]
    m = mesh.n_vertices + np.arange(n_edges)
    rows = np.concatenate([2 * np.arange(n_edges)] * 2 + [2 * np.arange(n_edges) + 1] * 3)
    cols = np.concatenate([b, a, b, a, m])
    vals = np.concatenate(
        [np.full(n_edges, value) for value in (1.0, -1.0, 5 / 6, -1 / 6, -4 / 6)]
    )
    return sp.csr_matrix((vals, (rows, cols)), shape=(2 * n_edges, mesh.n_vertices + n_edges))


def discrete_curl(mesh: TetMesh) -> sp.csr_matrix:
    """
    Interpolation of curls, V1 -> V2.

    The curl of a P1 field is constant, so all three face moments are fixed
    by the circulation around the face: the constant moment equals it and
    the two linear moments are a third of it.
    """
    faces = mesh.faces
    ab = mesh.edge_index(faces[:, 0], faces[:, 1])
    bc = mesh.edge_index(faces[:, 1], faces[:, 2])
    ac = mesh.edge_index(faces[:, 0], faces[:, 2])
    rows, cols, vals = [], [], []
    for q, scale in enumerate((1.0, 1.0 / 3.0, 1.0 / 3.0)):
        for edge, sign in ((ab, 1.0), (bc, 1.0), (ac, -1.0)):
            rows.append(3 * np.arange(mesh.n_faces) + q)
            cols.append(2 * edge)
            vals.append(np.full(mesh.n_faces, sign * scale))
    return sp.csr_matrix(
        (np.concatenate(vals), (np.concatenate(rows), np.concatenate(cols))),
        shape=(3 * mesh.n_faces, 2 * mesh.n_edges),
    )


def discrete_divergence(mesh: TetMesh) -> sp.csr_matrix:
    """Cellwise divergence V2 -> V3: outward face fluxes over the cell volume."""
    rows = np.repeat(np.arange(mesh.n_cells), 4)
    cols = 3 * mesh.cell_to_faces.ravel()
    vals = (mesh.face_signs / np.abs(mesh.volumes)[:, None]).ravel()
    return sp.csr_matrix((vals, (rows, cols)), shape=(mesh.n_cells, 3 * mesh.n_faces))


def complex_inclusion_check(
    mesh: TetMesh,
    samples: int = 20,
    seed: int = 0,
    tol: float = 1e-10,
) -> dict[str, bool]:
    """
    Check grad V0 in V1, curl V1 in V2, div V2 in V3 and the sequence property.

    Random members of each space are differentiated pointwise and compared
    with the interpolant of the derivative in the next space at quadrature
    points; curl(grad) and div(curl) are checked on the coefficient level.

    Returns:
        Mapping check name -> passed
    """
    spaces = MixedSpaces.build(mesh)
    gradient, curl, divergence = (
        discrete_gradient(mesh),
        discrete_curl(mesh),
        discrete_divergence(mesh),
    )
    rng = np.random.default_rng(seed)
    rule = grundmann_moeller(3, 4)
    worst = {"grad": 0.0, "curl": 0.0, "div": 0.0, "curl_grad": 0.0, "div_curl": 0.0}

    for _ in range(samples):
        s = rng.uniform(-1.0, 1.0, spaces.v0.n_dofs)
        a = rng.uniform(-1.0, 1.0, spaces.v1.n_dofs)
        v = rng.uniform(-1.0, 1.0, spaces.v2.n_dofs)
        pairs = {
            "grad": (FeFunction(spaces.v0, s), FeFunction(spaces.v1, gradient @ s)),
            "curl": (FeFunction(spaces.v1, a), FeFunction(spaces.v2, curl @ a)),
            "div": (FeFunction(spaces.v2, v), FeFunction(spaces.v3, divergence @ v)),
        }
        for batch in iter_batches(mesh):
            for name, (source, image) in pairs.items():
                exact = source.derivative(batch, rule.points)
                scale = max(1.0, float(np.max(np.abs(exact))))
                deviation = np.max(np.abs(exact - image.evaluate(batch, rule.points)))
                worst[name] = max(worst[name], deviation / scale)
        curl_grad = np.abs(curl @ (gradient @ s))
        div_curl = np.abs(divergence @ (curl @ a)) * np.abs(mesh.volumes)
        worst["curl_grad"] = max(worst["curl_grad"], float(np.max(curl_grad)))
        worst["div_curl"] = max(worst["div_curl"], float(np.max(div_curl)))

    logger.debug("Complex inclusion deviations: %s", worst)
    return {name: bool(value <= tol) for name, value in worst.items()}


def evaluate_field(field: SmoothField, points: np.ndarray) -> np.ndarray:
    """Evaluate a field on points of any leading shape (..., 3)."""
    flat = field(points.reshape(-1, 3))
    return np.asarray(flat, dtype=float).reshape(*points.shape[:-1], *np.shape(flat)[1:])


def _combine(basis: np.ndarray, local: np.ndarray) -> np.ndarray:
    if basis.ndim == 3:
        return np.einsum("tpi,ti->tp", basis, local)
    return np.einsum("tpid,ti->tpd", basis, local)
