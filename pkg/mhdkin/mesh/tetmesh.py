import itertools
import logging
import math
from dataclasses import dataclass
from functools import cached_property
from pathlib import Path

import numpy as np

from mhdkin.core.exceptions import DegenerateCellError, MeshLevelError, OutputError

logger = logging.getLogger(__name__)

# Faces are keyed as (a * V + b) * V + c in int64, so V**3 must stay below 2**63.
# Level 5 (n = 64, V = 65**3) is the last level that fits; level 6 overflows.
MAX_LEVEL = 5

# Local entities of a cell in terms of its four local vertices.
LOCAL_EDGES = np.array([[0, 1], [0, 2], [0, 3], [1, 2], [1, 3], [2, 3]])
LOCAL_FACES = np.array([[1, 2, 3], [0, 2, 3], [0, 1, 3], [0, 1, 2]])  # face i omits vertex i


@dataclass(frozen=True, eq=False)
class TetMesh:
    """
    Tetrahedral mesh with fully enumerated entities.

    Cells are stored positively oriented. Edges are stored low vertex first
    and faces with ascending vertex indices; this is the global orientation
    every finite element degree of freedom refers to.
    """

    level: int | None
    n: int
    vertices: np.ndarray
    edges: np.ndarray
    faces: np.ndarray
    cells: np.ndarray
    cell_to_edges: np.ndarray
    edge_signs: np.ndarray
    cell_to_faces: np.ndarray
    face_signs: np.ndarray
    boundary_vertices: np.ndarray
    boundary_edges: np.ndarray
    boundary_faces: np.ndarray

    @classmethod
    def from_cells(
        cls,
        vertices: np.ndarray,
        cells: np.ndarray,
        level: int | None = None,
        n: int = 0,
    ) -> "TetMesh":
        """
        Build the entity topology of a tetrahedral mesh.

        Args:
            vertices: (V, 3) vertex coordinates
            cells: (T, 4) vertex indices per cell, any orientation
            level: refinement level when the mesh belongs to the cube family
            n: cubes per axis when the mesh belongs to the cube family

        Returns:
            TetMesh with oriented cells, edges, faces and boundary flags

        Raises:
            DegenerateCellError: If a cell has zero volume
        """
        vertices = np.array(vertices, dtype=float)
        cells = np.array(cells, dtype=np.int64)
        n_vertices = len(vertices)

        volumes = _signed_volumes(vertices, cells)
        scale = np.max(np.ptp(vertices, axis=0)) ** 3
        degenerate = np.flatnonzero(np.abs(volumes) <= 1e-14 * scale)
        if degenerate.size:
            raise DegenerateCellError(degenerate.tolist())
        flip = volumes < 0
        cells[flip, 2], cells[flip, 3] = cells[flip, 3], cells[flip, 2].copy()

        # Edges
        local_edges = cells[:, LOCAL_EDGES]
        low = local_edges.min(axis=2)
        high = local_edges.max(axis=2)
        edge_keys, cell_to_edges = np.unique(
            low * n_vertices + high, return_inverse=True
        )
        cell_to_edges = cell_to_edges.reshape(-1, 6)
        edges = np.stack(np.divmod(edge_keys, n_vertices), axis=1)
        edge_signs = np.where(local_edges[:, :, 0] < local_edges[:, :, 1], 1, -1)

        # Faces
        local_faces = np.sort(cells[:, LOCAL_FACES], axis=2)
        face_keys, cell_to_faces = np.unique(
            _face_key(local_faces, n_vertices), return_inverse=True
        )
        cell_to_faces = cell_to_faces.reshape(-1, 4)
        ab, c = np.divmod(face_keys, n_vertices)
        a, b = np.divmod(ab, n_vertices)
        faces = np.stack([a, b, c], axis=1)

        # A face normal (x_b - x_a) x (x_c - x_a) is outward for a cell when
        # it points away from the vertex the face omits.
        face_xyz = vertices[local_faces]
        normals = np.cross(
            face_xyz[:, :, 1] - face_xyz[:, :, 0], face_xyz[:, :, 2] - face_xyz[:, :, 0]
        )
        to_face = face_xyz[:, :, 0] - vertices[cells]
        face_signs = np.where(np.einsum("tfd,tfd->tf", normals, to_face) > 0, 1, -1)

        # Boundary: faces seen by exactly one cell and everything on them
        adjacency = np.bincount(cell_to_faces.ravel(), minlength=len(faces))
        boundary_faces = adjacency == 1
        boundary_vertices = np.zeros(n_vertices, dtype=bool)
        boundary_vertices[faces[boundary_faces].ravel()] = True
        face_edge_pairs = faces[boundary_faces][:, [[0, 1], [0, 2], [1, 2]]].reshape(-1, 2)
        boundary_edges = np.zeros(len(edges), dtype=bool)
        boundary_edges[
            np.searchsorted(
                edge_keys, face_edge_pairs[:, 0] * n_vertices + face_edge_pairs[:, 1]
            )
        ] = True

        mesh = cls(
            level=level,
            n=n,
            vertices=vertices,
            edges=edges,
            faces=faces,
            cells=cells,
            cell_to_edges=cell_to_edges,
            edge_signs=edge_signs,
            cell_to_faces=cell_to_faces,
            face_signs=face_signs,
            boundary_vertices=boundary_vertices,
            boundary_edges=boundary_edges,
            boundary_faces=boundary_faces,
        )
        for array in (
            vertices, edges, faces, cells, cell_to_edges, edge_signs,
            cell_to_faces, face_signs, boundary_vertices, boundary_edges,
            boundary_faces,
        ):
            array.flags.writeable = False
        logger.debug("Built mesh with entity counts %s", entity_counts(mesh))
        return mesh

    @property
    def n_vertices(self) -> int:
        return len(self.vertices)

    @property
    def n_edges(self) -> int:
        return len(self.edges)

    @property
    def n_faces(self) -> int:
        return len(self.faces)

    @property
    def n_cells(self) -> int:
        return len(self.cells)

    @cached_property
    def h(self) -> float:
        return mesh_size(self)

    @cached_property
    def volumes(self) -> np.ndarray:
        return _signed_volumes(self.vertices, self.cells)

    @cached_property
    def sorted_cells(self) -> np.ndarray:
        """Cell vertices in ascending global order (finite element local order)."""
        return np.sort(self.cells, axis=1)

    @cached_property
    def sorted_cell_edges(self) -> np.ndarray:
        """(T, 6) global edge per local edge of the sorted cell."""
        pairs = self.sorted_cells[:, LOCAL_EDGES]
        return self.edge_index(pairs[..., 0], pairs[..., 1])

    @cached_property
    def sorted_cell_faces(self) -> np.ndarray:
        """(T, 4) global face per local face of the sorted cell."""
        triples = self.sorted_cells[:, LOCAL_FACES]
        return self.face_index(triples[..., 0], triples[..., 1], triples[..., 2])

    @cached_property
    def _edge_keys(self) -> np.ndarray:
        return self.edges[:, 0] * self.n_vertices + self.edges[:, 1]

    @cached_property
    def _face_keys(self) -> np.ndarray:
        return _face_key(self.faces, self.n_vertices)

    def edge_index(self, a: np.ndarray, b: np.ndarray) -> np.ndarray:
        """Global index of the edges (a, b) with a < b."""
        return np.searchsorted(self._edge_keys, a * self.n_vertices + b)

    def face_index(self, a: np.ndarray, b: np.ndarray, c: np.ndarray) -> np.ndarray:
        """Global index of the faces (a, b, c) with a < b < c."""
        keys = _face_key(np.stack([a, b, c], axis=-1), self.n_vertices)
        return np.searchsorted(self._face_keys, keys)

    @cached_property
    def face_cells(self) -> np.ndarray:
        """(F, 2) adjacent cells per face, -1 in the second slot on the boundary."""
        owners = np.full((self.n_faces, 2), -1, dtype=np.int64)
        flat_faces = self.cell_to_faces.ravel()
        flat_cells = np.repeat(np.arange(self.n_cells), 4)
        order = np.argsort(flat_faces, kind="stable")
        sorted_faces = flat_faces[order]
        first = np.ones(len(order), dtype=bool)
        first[1:] = sorted_faces[1:] != sorted_faces[:-1]
        owners[sorted_faces[first], 0] = flat_cells[order][first]
        owners[sorted_faces[~first], 1] = flat_cells[order][~first]
        return owners


def build_mesh(level: int) -> TetMesh:
    """
    Build the structured Kuhn mesh T_{level+1} of the unit cube.

    Each of the n^3 sub-cubes (n = 2^(level+1)) is split into six
    tetrahedra along its (0,0,0)-(1,1,1) diagonal, so faces of neighbouring
    cubes match.

    Raises:
        MeshLevelError: If level is negative or beyond MAX_LEVEL
    """
    if level < 0 or level > MAX_LEVEL:
        raise MeshLevelError(level, MAX_LEVEL)
    n = 2 ** (level + 1)
    axis = np.linspace(0.0, 1.0, n + 1)
    z, y, x = np.meshgrid(axis, axis, axis, indexing="ij")
    vertices = np.stack([x.ravel(), y.ravel(), z.ravel()], axis=1)

    stride = np.array([1, n + 1, (n + 1) ** 2])
    i, j, k = np.meshgrid(np.arange(n), np.arange(n), np.arange(n), indexing="ij")
    base = (i * stride[0] + j * stride[1] + k * stride[2]).ravel()

    cells = []
    for perm in itertools.permutations(range(3)):
        path = np.cumsum([0, *stride[list(perm)]])
        cells.append(base[:, None] + path[None, :])
    cells = np.concatenate(cells)

    mesh = TetMesh.from_cells(vertices, cells, level=level, n=n)
    logger.debug("Mesh T%d: n=%d, h=%.5f", level + 1, n, mesh.h)
    return mesh


def entity_counts(mesh: TetMesh) -> tuple[int, int, int, int]:
    """Return (V, E, F, T)."""
    return mesh.n_vertices, mesh.n_edges, mesh.n_faces, mesh.n_cells


def classify_boundary(mesh: TetMesh) -> dict[str, np.ndarray]:
    """Boundary flags per vertex, edge and face."""
    return {
        "vertices": mesh.boundary_vertices,
        "edges": mesh.boundary_edges,
        "faces": mesh.boundary_faces,
    }


def mesh_size(mesh: TetMesh) -> float:
    """Largest edge length."""
    vectors = mesh.vertices[mesh.edges[:, 1]] - mesh.vertices[mesh.edges[:, 0]]
    return float(np.max(np.linalg.norm(vectors, axis=1)))


def expected_counts(n: int) -> tuple[int, int, int, int]:
    """Closed-form (V, E, F, T) of the Kuhn mesh with n cubes per axis."""
    vertices = (n + 1) ** 3
    edges = 3 * n * (n + 1) ** 2 + 3 * n**2 * (n + 1) + n**3
    cells = 6 * n**3
    faces = edges + cells + 1 - vertices
    return vertices, edges, faces, cells


def cube_mesh_size(n: int) -> float:
    return math.sqrt(3.0) / n


def write_mesh_text(mesh: TetMesh, path: Path) -> Path:
    """
    Dump the mesh as plain text, one section per entity kind.

    Raises:
        OutputError: If the file cannot be written
    """
    sections = [
        ("vertices", mesh.vertices, "%.17g"),
        ("edges", mesh.edges, "%d"),
        ("faces", mesh.faces, "%d"),
        ("cells", mesh.cells, "%d"),
    ]
    try:
        with open(path, "w") as handle:
            for name, rows, fmt in sections:
                handle.write(f"{name} {len(rows)}\n")
                np.savetxt(handle, rows, fmt=fmt)
    except OSError as exc:
        raise OutputError(str(path), str(exc)) from exc
    return path


def _signed_volumes(vertices: np.ndarray, cells: np.ndarray) -> np.ndarray:
    xyz = vertices[cells]
    return np.linalg.det(xyz[:, 1:] - xyz[:, :1]) / 6.0


def _face_key(triples: np.ndarray, n_vertices: int) -> np.ndarray:
    return (triples[..., 0] * n_vertices + triples[..., 1]) * n_vertices + triples[..., 2]
