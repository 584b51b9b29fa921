"""
Reference elements of the discrete de Rham sequence on tetrahedra.

Each element is described by a prebasis written in barycentric coordinates
and their gradients, plus its degrees of freedom. The nodal basis is the
prebasis contracted with the inverse of the matrix of functionals applied
to the prebasis. Because the prebasis transforms with the same Piola map as
the functionals, that matrix is the same on every cell and is computed once
on the reference tetrahedron.
"""

from abc import ABC, abstractmethod
from enum import StrEnum
from functools import cached_property

import numpy as np

from mhdkin.fem.quadrature import gauss_legendre_01, grundmann_moeller
from mhdkin.mesh import LOCAL_EDGES, LOCAL_FACES

REFERENCE_VERTICES = np.array(
    [[0.0, 0.0, 0.0], [1.0, 0.0, 0.0], [0.0, 1.0, 0.0], [0.0, 0.0, 1.0]]
)
REFERENCE_GRADS = np.array(
    [[[-1.0, -1.0, -1.0], [1.0, 0.0, 0.0], [0.0, 1.0, 0.0], [0.0, 0.0, 1.0]]]
)

# (i, j, k) with prebasis lambda_i grad(lambda_j) x grad(lambda_k), three per face
FACE_TRIPLES = np.array(
    [
        triple
        for a, b, c in LOCAL_FACES
        for triple in ((a, b, c), (b, c, a), (c, a, b))
    ]
)


class SpaceKind(StrEnum):
    V0 = "V0"  # continuous P2
    V1 = "V1"  # full P1 Nedelec, H(curl)
    V2 = "V2"  # BDM1, H(div)
    V3 = "V3"  # discontinuous P0


class ReferenceElement(ABC):
    kind: SpaceKind
    n_local: int
    vector_valued: bool

    @abstractmethod
    def prebasis(
        self, lam: np.ndarray, grads: np.ndarray
    ) -> tuple[np.ndarray, np.ndarray | None]:
        """
        Evaluate the prebasis and its exterior derivative.

        Args:
            lam: (t, P, 4) barycentric coordinates
            grads: (t, 4, 3) barycentric gradients

        Returns:
            (values, derivative); derivative is the gradient, curl or
            divergence for V0, V1 and V2 and None for V3
        """

    @abstractmethod
    def functional_matrix(self) -> np.ndarray:
        """D[j, k] = degree of freedom j applied to prebasis function k."""

    @cached_property
    def dual(self) -> np.ndarray:
        return np.linalg.inv(self.functional_matrix())

    def basis(
        self, lam: np.ndarray, grads: np.ndarray
    ) -> tuple[np.ndarray, np.ndarray | None]:
        """Nodal basis and derivative, local functions on axis 2."""
        values, derivative = self.prebasis(lam, grads)
        values = _contract(values, self.dual)
        if derivative is not None:
            derivative = _contract(derivative, self.dual)
        return values, derivative

    def _reference_prebasis(self, lam: np.ndarray) -> np.ndarray:
        values, _ = self.prebasis(lam[None], REFERENCE_GRADS)
        return values[0]


class LagrangeP2(ReferenceElement):
    kind = SpaceKind.V0
    n_local = 10
    vector_valued = False

    def prebasis(self, lam, grads):
        a, b = LOCAL_EDGES.T
        vertex_values = lam * (2.0 * lam - 1.0)
        edge_values = 4.0 * lam[..., a] * lam[..., b]
        values = np.concatenate([vertex_values, edge_values], axis=-1)

        vertex_grads = (4.0 * lam - 1.0)[..., None] * grads[:, None]
        edge_grads = 4.0 * (
            lam[..., a, None] * grads[:, None, b] + lam[..., b, None] * grads[:, None, a]
        )
        return values, np.concatenate([vertex_grads, edge_grads], axis=2)

    def functional_matrix(self):
        vertices = np.eye(4)
        midpoints = 0.5 * (vertices[LOCAL_EDGES[:, 0]] + vertices[LOCAL_EDGES[:, 1]])
        return self._reference_prebasis(np.concatenate([vertices, midpoints]))


class NedelecSecondKind(ReferenceElement):
    """Full P1 edge element: two tangential moments per edge."""

    kind = SpaceKind.V1
    n_local = 12
    vector_valued = True

    def prebasis(self, lam, grads):
        a, b = LOCAL_EDGES.T
        la = lam[..., a, None]
        lb = lam[..., b, None]
        ga = grads[:, None, a]
        gb = grads[:, None, b]
        whitney = la * gb - lb * ga
        bubble = la * gb + lb * ga
        values = np.concatenate([whitney, bubble], axis=2)

        whitney_curl = 2.0 * np.cross(grads[:, a], grads[:, b])
        curls = np.concatenate([whitney_curl, np.zeros_like(whitney_curl)], axis=1)
        curls = np.broadcast_to(curls[:, None], values.shape)
        return values, curls

    def functional_matrix(self):
        s, w = gauss_legendre_01(3)
        matrix = np.empty((self.n_local, self.n_local))
        for le, (a, b) in enumerate(LOCAL_EDGES):
            points = np.outer(1.0 - s, np.eye(4)[a]) + np.outer(s, np.eye(4)[b])
            tangent = REFERENCE_VERTICES[b] - REFERENCE_VERTICES[a]
            tangential = self._reference_prebasis(points) @ tangent  # (P, 12)
            for q in range(2):
                matrix[2 * le + q] = (w * s**q) @ tangential
        return matrix


class BrezziDouglasMarini(ReferenceElement):
    """BDM1 face element: normal moments against 1, xi and eta per face."""

    kind = SpaceKind.V2
    n_local = 12
    vector_valued = True

    def prebasis(self, lam, grads):
        i, j, k = FACE_TRIPLES.T
        crosses = np.cross(grads[:, j], grads[:, k])  # (t, 12, 3)
        values = lam[..., i, None] * crosses[:, None]
        divergence = np.einsum("tbd,tbd->tb", grads[:, i], crosses)
        return values, np.broadcast_to(divergence[:, None], values.shape[:3])

    def functional_matrix(self):
        rule = grundmann_moeller(2, 3)
        weights = 0.5 * rule.weights
        xi, eta = rule.points[:, 1], rule.points[:, 2]
        moments = np.stack([np.ones_like(xi), xi, eta])
        matrix = np.empty((self.n_local, self.n_local))
        for lf, (a, b, c) in enumerate(LOCAL_FACES):
            points = rule.points @ np.eye(4)[[a, b, c]]
            normal = np.cross(
                REFERENCE_VERTICES[b] - REFERENCE_VERTICES[a],
                REFERENCE_VERTICES[c] - REFERENCE_VERTICES[a],
            )
            fluxes = self._reference_prebasis(points) @ normal  # (P, 12)
            matrix[3 * lf : 3 * lf + 3] = (moments * weights) @ fluxes
        return matrix


class PiecewiseConstant(ReferenceElement):
    kind = SpaceKind.V3
    n_local = 1
    vector_valued = False

    def prebasis(self, lam, grads):
        return np.ones((*lam.shape[:2], 1)), None

    def functional_matrix(self):
        return np.ones((1, 1))


REFERENCE_ELEMENTS: dict[SpaceKind, ReferenceElement] = {
    SpaceKind.V0: LagrangeP2(),
    SpaceKind.V1: NedelecSecondKind(),
    SpaceKind.V2: BrezziDouglasMarini(),
    SpaceKind.V3: PiecewiseConstant(),
}


def _contract(values: np.ndarray, dual: np.ndarray) -> np.ndarray:
    if values.ndim == 3:
        return np.einsum("tpk,ki->tpi", values, dual)
    return np.einsum("tpkd,ki->tpid", values, dual)
