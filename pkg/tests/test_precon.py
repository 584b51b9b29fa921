import numpy as np
import pytest
import scipy.sparse as sp

from mhdkin.assembly import FieldName
from mhdkin.core.exceptions import (
    DenseSizeError,
    DimensionMismatchError,
    InnerSolveError,
    InvalidBlockStructureError,
    RankDeficientConstraintError,
)
from mhdkin.core.config import settings
from mhdkin.linalg import KrylovConfig, PreconditionerKind, direct_solve, fgmres
from mhdkin.precon import (
    DIRECT_INNER,
    KRYLOV_PRECONDITIONERS,
    BlockPreconditioner,
    ConstraintSystem,
    Coupling,
    InnerSolver,
    build_constraint_preconditioner_dense,
    verify_unit_eigenvalue_multiplicity,
)

FIELDS = (FieldName.J, FieldName.PHI, FieldName.A, FieldName.R)


def small_layout(couplings, diagonal=None):
    sizes = dict.fromkeys(FIELDS, 2)
    identity = sp.identity(2, format="csr")
    return BlockPreconditioner(
        sizes=sizes,
        diagonal=diagonal or dict.fromkeys(FIELDS, identity),
        signs=dict.fromkeys(FIELDS, 1.0),
        couplings={pair: Coupling(identity) for pair in couplings},
        inner=DIRECT_INNER,
    )


class TestBlockPreconditioner:
    def test_step_order(self, system_example1):
        preconditioner = BlockPreconditioner.from_system(system_example1, inner=DIRECT_INNER)
        assert preconditioner.steps == [FieldName.R, FieldName.A, FieldName.PHI, FieldName.J]

    def test_back_substitution_inverts_the_block_matrix(self, system_example2):
        preconditioner = BlockPreconditioner.from_system(system_example2, inner=DIRECT_INNER)
        r = np.random.default_rng(3).standard_normal(preconditioner.size)
        e = preconditioner(r)
        np.testing.assert_allclose(preconditioner.matrix() @ e, r, atol=1e-9 * np.linalg.norm(r))
        assert preconditioner.applications == 1

    def test_krylov_inner_solvers_approximate_direct_ones(self, system_example2):
        r = np.random.default_rng(4).standard_normal(system_example2.size)
        direct = BlockPreconditioner.from_system(system_example2, inner=DIRECT_INNER)(r)
        krylov = BlockPreconditioner.from_system(system_example2, inner_tol=1e-10)(r)
        np.testing.assert_allclose(krylov, direct, atol=1e-6 * np.linalg.norm(direct))

    def test_fixed_iterations_for_the_projection_block(self, system_example1):
        preconditioner = BlockPreconditioner.from_system(system_example1, q_hat_iterations=5)
        assert preconditioner.inner[FieldName.PHI] is InnerSolver.FIXED_CG
        preconditioner(np.ones(preconditioner.size))
        assert preconditioner.inner_iterations[FieldName.PHI] <= 5

    def test_default_inner_preconditioners(self, system_example1):
        preconditioner = BlockPreconditioner.from_system(system_example1)
        assert preconditioner.preconditioners == KRYLOV_PRECONDITIONERS
        assert preconditioner.preconditioners[FieldName.A] is PreconditionerKind.ILU
        assert preconditioner.preconditioners[FieldName.J] is PreconditionerKind.AMG
        assert preconditioner.preconditioners[FieldName.R] is PreconditionerKind.AMG

    def test_jacobi_inner_preconditioners_still_available(self, system_example2):
        r = np.random.default_rng(5).standard_normal(system_example2.size)
        direct = BlockPreconditioner.from_system(system_example2, inner=DIRECT_INNER)(r)
        jacobi_only = BlockPreconditioner.from_system(
            system_example2,
            inner_tol=1e-10,
            preconditioners=dict.fromkeys(FIELDS, PreconditionerKind.JACOBI),
        )
        assert set(jacobi_only.preconditioners.values()) == {PreconditionerKind.JACOBI}
        np.testing.assert_allclose(jacobi_only(r), direct, atol=1e-6 * np.linalg.norm(direct))

    def test_unconverged_inner_solve_names_its_step(self, monkeypatch):
        monkeypatch.setattr(settings, "inner_max_iterations", 1)
        diagonal = dict.fromkeys(FIELDS, sp.identity(2, format="csr"))
        diagonal[FieldName.A] = sp.csr_matrix(np.array([[1.0, 2.0], [-3.0, 1.0]]))
        preconditioner = BlockPreconditioner(
            sizes=dict.fromkeys(FIELDS, 2),
            diagonal=diagonal,
            signs=dict.fromkeys(FIELDS, 1.0),
            couplings={},
            inner={**DIRECT_INNER, FieldName.A: InnerSolver.GMRES},
            preconditioners={FieldName.A: PreconditionerKind.JACOBI},
        )
        r = np.zeros(8)
        r[4] = 1.0
        with pytest.raises(InnerSolveError) as excinfo:
            preconditioner(r)
        assert excinfo.value.step == 2
        assert excinfo.value.details["block"] == "A"
        assert "No convergence" in excinfo.value.message

    def test_circular_coupling(self):
        with pytest.raises(InvalidBlockStructureError):
            small_layout([(FieldName.J, FieldName.A), (FieldName.A, FieldName.J)])

    def test_self_coupling(self):
        with pytest.raises(InvalidBlockStructureError):
            small_layout([(FieldName.A, FieldName.A)])

    def test_singular_block_names_its_step(self):
        diagonal = dict.fromkeys(FIELDS, sp.identity(2, format="csr"))
        diagonal[FieldName.R] = sp.csr_matrix((2, 2))
        with pytest.raises(InnerSolveError) as excinfo:
            small_layout([(FieldName.A, FieldName.R)], diagonal)
        assert excinfo.value.step == 1

    def test_input_length_is_checked(self):
        preconditioner = small_layout([])
        with pytest.raises(DimensionMismatchError):
            preconditioner(np.ones(3))

    @pytest.mark.parametrize("system_name", ["system_example1", "system_example2"])
    def test_preconditioned_fgmres_matches_direct_solve(self, request, system_name):
        system = request.getfixturevalue(system_name)
        matrix, b = system.matrix(), system.rhs_vector()
        preconditioner = BlockPreconditioner.from_system(system)
        result = fgmres(matrix, preconditioner, b, KrylovConfig(tol=1e-10))
        assert result.converged
        assert result.iterations <= 60
        reference = direct_solve(matrix, b)
        for name, part in system.split(result.x - reference).items():
            scale = max(1.0, float(np.linalg.norm(system.split(reference)[name])))
            assert np.linalg.norm(part) <= 1e-6 * scale, name


class TestConstraintPreconditioning:
    def test_exact_primal_block_gives_identity(self, system_example2):
        constraint = build_constraint_preconditioner_dense(system_example2, exact_z=True)
        report = verify_unit_eigenvalue_multiplicity(constraint)
        assert report.unit_count == constraint.A_tilde.shape[0]
        assert report.cluster_count == constraint.A_tilde.shape[0]
        assert report.reduced_unit_count == constraint.n_primal - constraint.n_constraints
        assert report.null_space_residual < 1e-10

    def test_permutation_groups_primal_and_constraint_unknowns(self, system_example2):
        constraint = build_constraint_preconditioner_dense(system_example2)
        sizes = system_example2.sizes
        assert constraint.n_primal == sizes[FieldName.J] + sizes[FieldName.A]
        assert constraint.n_constraints == sizes[FieldName.PHI] + sizes[FieldName.R]
        assert sorted(constraint.permutation) == list(range(system_example2.size))
        np.testing.assert_array_equal(
            constraint.P_tilde[constraint.n_primal :], constraint.A_tilde[constraint.n_primal :]
        )

    @pytest.mark.slow
    def test_unit_eigenvalues_on_coarse_mesh(self, system_example2):
        constraint = build_constraint_preconditioner_dense(system_example2)
        report = verify_unit_eigenvalue_multiplicity(constraint, tol=1e-6)
        assert report.unit_count >= 2 * constraint.n_constraints
        assert report.max_mismatch <= 1e-6
        assert report.cluster_count == 2 * constraint.n_constraints + report.reduced_unit_count
        assert report.reduced_unit_count > 0
        off_cluster = np.abs(report.eigenvalues - 1.0) > settings.unit_cluster_tol
        expected = constraint.n_primal - constraint.n_constraints - report.reduced_unit_count
        assert np.sum(off_cluster) == expected

    def test_size_cap(self, system_example2):
        with pytest.raises(DenseSizeError):
            build_constraint_preconditioner_dense(system_example2, size_cap=10)

    def test_reduced_unit_eigenvalues_join_the_cluster(self):
        # ker N is spanned by the last two unknowns, where Z acts as diag(1, 3)
        Z = np.diag([5.0, 1.0, 3.0])
        N = np.array([[1.0, 0.0, 0.0]])
        A_tilde = np.block([[Z, N.T], [N, np.zeros((1, 1))]])
        P_tilde = np.block([[np.eye(3), N.T], [N, np.zeros((1, 1))]])
        constraint = ConstraintSystem(
            A_tilde=A_tilde,
            P_tilde=P_tilde,
            Z=Z,
            Z_tilde=np.eye(3),
            N=N,
            permutation=np.arange(4),
        )
        report = verify_unit_eigenvalue_multiplicity(constraint)
        assert report.reduced_unit_count == 1
        assert report.cluster_count == 3
        assert report.unit_count >= 2
        assert report.max_mismatch <= 1e-10
        np.testing.assert_allclose(np.sort(report.reduced_eigenvalues.real), [1.0, 3.0], atol=1e-12)

    def test_rank_deficient_constraints(self):
        Z = np.eye(2)
        N = np.array([[1.0, 0.0], [2.0, 0.0]])
        A_tilde = np.block([[Z, N.T], [N, np.zeros((2, 2))]])
        constraint = ConstraintSystem(
            A_tilde=A_tilde,
            P_tilde=A_tilde.copy(),
            Z=Z,
            Z_tilde=Z.copy(),
            N=N,
            permutation=np.arange(4),
        )
        with pytest.raises(RankDeficientConstraintError):
            verify_unit_eigenvalue_multiplicity(constraint)


def test_explicit_matrix_matches_layout(system_example1):
    preconditioner = BlockPreconditioner.from_system(system_example1, inner=DIRECT_INNER)
    P = preconditioner.matrix()
    offsets, sizes = preconditioner.offsets, preconditioner.sizes
    phi = slice(offsets[FieldName.PHI], offsets[FieldName.PHI] + sizes[FieldName.PHI])
    J = slice(offsets[FieldName.J], offsets[FieldName.J] + sizes[FieldName.J])
    # lower triangle is empty and the phi block is -Q_hat
    assert abs(P[phi, J]).max() == 0.0
    assert np.all(P[phi, phi].diagonal() < 0)
