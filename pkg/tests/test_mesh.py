import numpy as np
import pytest

from mhdkin.core.exceptions import DegenerateCellError, MeshLevelError, OutputError
from mhdkin.fem import MixedSpaces
from mhdkin.mesh import (
    MAX_LEVEL,
    TetMesh,
    build_mesh,
    classify_boundary,
    entity_counts,
    mesh_size,
    write_mesh_text,
)
from mhdkin.mesh.tetmesh import cube_mesh_size, expected_counts

UNIT_TET = np.array([[0.0, 0.0, 0.0], [1.0, 0.0, 0.0], [0.0, 1.0, 0.0], [0.0, 0.0, 1.0]])


@pytest.mark.parametrize("level", [0, 1, 2])
def test_entity_counts_match_closed_form(level):
    mesh = build_mesh(level)
    assert entity_counts(mesh) == expected_counts(mesh.n)


@pytest.mark.parametrize("level", [0, 1, 2])
def test_euler_characteristic_of_the_cube(level):
    vertices, edges, faces, cells = entity_counts(build_mesh(level))
    assert vertices - edges + faces - cells == 1


@pytest.mark.parametrize(
    "level, h", [(0, 0.86603), (1, 0.43301), (2, 0.21651)]
)
def test_mesh_size_halves_per_level(level, h):
    mesh = build_mesh(level)
    assert mesh.h == pytest.approx(h, abs=1e-5)
    assert mesh_size(mesh) == pytest.approx(cube_mesh_size(mesh.n))


@pytest.mark.parametrize(
    "level, counts",
    [
        (0, (360, 48, 196, 125)),
        (1, (2592, 384, 1208, 729)),
    ],
)
def test_dof_counts_per_field(level, counts):
    spaces = MixedSpaces.build(build_mesh(level))
    actual = (spaces.v2.n_dofs, spaces.v3.n_dofs, spaces.v1.n_dofs, spaces.v0.n_dofs)
    assert actual == counts


@pytest.mark.slow
def test_dof_counts_on_t4():
    spaces = MixedSpaces.build(build_mesh(3))
    actual = (spaces.v2.n_dofs, spaces.v3.n_dofs, spaces.v1.n_dofs, spaces.v0.n_dofs)
    assert actual == (152064, 24576, 62048, 35937)


def test_cells_are_positive_and_fill_the_cube(mesh_t1):
    assert np.all(mesh_t1.volumes > 0)
    assert mesh_t1.volumes.sum() == pytest.approx(1.0)


def test_boundary_classification(mesh_t1):
    n = mesh_t1.n
    boundary = classify_boundary(mesh_t1)
    assert boundary["faces"].sum() == 12 * n**2
    assert boundary["vertices"].sum() == (n + 1) ** 3 - (n - 1) ** 3
    # a closed triangulated surface has 3/2 edges per face
    assert boundary["edges"].sum() == 3 * boundary["faces"].sum() // 2

    on_boundary = np.any((mesh_t1.vertices == 0.0) | (mesh_t1.vertices == 1.0), axis=1)
    np.testing.assert_array_equal(boundary["vertices"], on_boundary)


def test_interior_faces_have_opposite_orientations(mesh_t1):
    totals = np.zeros(mesh_t1.n_faces, dtype=int)
    np.add.at(totals, mesh_t1.cell_to_faces.ravel(), mesh_t1.face_signs.ravel())
    assert np.all(totals[~mesh_t1.boundary_faces] == 0)
    assert np.all(np.abs(totals[mesh_t1.boundary_faces]) == 1)


def boundary_face_centroids(mesh):
    centroids = mesh.vertices[mesh.faces[mesh.boundary_faces]].mean(axis=1)
    return centroids[np.lexsort(np.round(centroids, 12).T)]


@pytest.mark.parametrize("level", [0, pytest.param(2, marks=pytest.mark.slow)])
def test_orientation_is_stable_under_relabelling(level):
    mesh = build_mesh(level)
    rng = np.random.default_rng(level)
    relabel = rng.permutation(mesh.n_vertices)
    vertices = np.empty_like(mesh.vertices)
    vertices[relabel] = mesh.vertices
    # shuffle the cube traversal and the vertex order inside every cell
    cells = relabel[mesh.cells[rng.permutation(mesh.n_cells)]]
    cells = np.take_along_axis(cells, rng.permuted(np.tile(np.arange(4), (len(cells), 1)), axis=1), axis=1)

    shuffled = TetMesh.from_cells(vertices, cells, level=level, n=mesh.n)
    assert np.all(shuffled.volumes > 0)
    assert entity_counts(shuffled) == entity_counts(mesh)
    for key, flags in classify_boundary(shuffled).items():
        assert flags.sum() == classify_boundary(mesh)[key].sum(), key
    np.testing.assert_array_equal(shuffled.boundary_vertices[relabel], mesh.boundary_vertices)
    np.testing.assert_allclose(boundary_face_centroids(shuffled), boundary_face_centroids(mesh))

    totals = np.zeros(shuffled.n_faces, dtype=int)
    np.add.at(totals, shuffled.cell_to_faces.ravel(), shuffled.face_signs.ravel())
    assert np.all(totals[~shuffled.boundary_faces] == 0)


def test_face_cells(mesh_t1):
    owners = mesh_t1.face_cells
    assert np.all(owners[:, 0] >= 0)
    np.testing.assert_array_equal(owners[:, 1] < 0, mesh_t1.boundary_faces)


def test_edge_and_face_lookup(mesh_t1):
    edges = mesh_t1.edges
    np.testing.assert_array_equal(
        mesh_t1.edge_index(edges[:, 0], edges[:, 1]), np.arange(mesh_t1.n_edges)
    )
    faces = mesh_t1.faces
    np.testing.assert_array_equal(
        mesh_t1.face_index(faces[:, 0], faces[:, 1], faces[:, 2]),
        np.arange(mesh_t1.n_faces),
    )


def test_mesh_arrays_are_read_only(mesh_t1):
    with pytest.raises(ValueError):
        mesh_t1.vertices[0, 0] = 0.5


@pytest.mark.parametrize("level", [-1, MAX_LEVEL + 1])
def test_level_out_of_range(level):
    with pytest.raises(MeshLevelError):
        build_mesh(level)


def test_negative_cells_are_flipped():
    mesh = TetMesh.from_cells(UNIT_TET, [[0, 2, 1, 3]])
    assert mesh.volumes[0] == pytest.approx(1.0 / 6.0)


def test_degenerate_cell():
    flat = UNIT_TET.copy()
    flat[3] = [1.0, 1.0, 0.0]
    with pytest.raises(DegenerateCellError) as excinfo:
        TetMesh.from_cells(flat, [[0, 1, 2, 3]])
    assert excinfo.value.details["cells"] == [0]


def test_single_cell_is_all_boundary():
    mesh = TetMesh.from_cells(UNIT_TET, [[0, 1, 2, 3]])
    assert entity_counts(mesh) == (4, 6, 4, 1)
    assert mesh.boundary_faces.all()
    assert mesh.boundary_edges.all()


def test_write_mesh_text(tmp_path, mesh_t1):
    path = write_mesh_text(mesh_t1, tmp_path / "t1.txt")
    lines = path.read_text().splitlines()
    assert lines[0] == f"vertices {mesh_t1.n_vertices}"
    assert f"cells {mesh_t1.n_cells}" in lines


def test_write_mesh_text_to_directory_fails(tmp_path, mesh_t1):
    with pytest.raises(OutputError):
        write_mesh_text(mesh_t1, tmp_path)
