import pytest
from typer.testing import CliRunner

from mhdkin.assembly import (
    assemble_system,
    benchmark_case_example2,
    manufactured_case_example1,
)
from mhdkin.fem import MixedSpaces
from mhdkin.mesh import build_mesh


@pytest.fixture(name="mesh_t1", scope="session")
def mesh_t1_fixture():
    """The coarsest Kuhn mesh, 2 cubes per axis."""
    return build_mesh(0)


@pytest.fixture(name="spaces_t1", scope="session")
def spaces_t1_fixture(mesh_t1):
    return MixedSpaces.build(mesh_t1)


@pytest.fixture(name="example1", scope="session")
def example1_fixture():
    return manufactured_case_example1()


@pytest.fixture(name="example2", scope="session")
def example2_fixture():
    return benchmark_case_example2(rm=50.0)


@pytest.fixture(name="system_example1", scope="session")
def system_example1_fixture(spaces_t1, example1):
    """Assembled manufactured system on T1, preconditioner blocks included."""
    return assemble_system(spaces_t1, example1)


@pytest.fixture(name="system_example2", scope="session")
def system_example2_fixture(spaces_t1, example2):
    return assemble_system(spaces_t1, example2)


@pytest.fixture(name="runner")
def runner_fixture():
    """Create a CLI runner."""
    return CliRunner()
