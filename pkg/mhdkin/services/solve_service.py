import logging
import time
from dataclasses import dataclass
from enum import StrEnum

import numpy as np

from mhdkin.analysis import (
    MixedSolution,
    divergence_norm,
    electric_field_norm,
    error_norms,
    helicity,
    magnetic_divergence_norm,
    multiplier_norm,
)
from mhdkin.assembly import BlockSystem, FieldName, assemble_system
from mhdkin.core.exceptions import InnerSolveError, SingularMatrixError
from mhdkin.fem import MixedSpaces
from mhdkin.linalg import KrylovConfig, KrylovResult, direct_solve, dump_system, fgmres
from mhdkin.mesh import build_mesh
from mhdkin.models import InnerMode, PhysicsCase, SolveReport, StudyConfig
from mhdkin.precon import DIRECT_INNER, KRYLOV_INNER, BlockPreconditioner

logger = logging.getLogger(__name__)


class OuterSolver(StrEnum):
    FGMRES = "fgmres"
    DIRECT = "direct"


@dataclass(eq=False)
class SolveOutcome:
    """A solved system with its discrete fields and report."""

    system: BlockSystem
    result: KrylovResult
    solution: MixedSolution | None
    report: SolveReport
    preconditioner: BlockPreconditioner | None = None


class SolveService:
    """Service for assembling and solving one case on one mesh level."""

    def __init__(self, config: StudyConfig | None = None):
        self.config = config or StudyConfig()

    def solve(
        self,
        case: PhysicsCase,
        level: int,
        outer: OuterSolver = OuterSolver.FGMRES,
    ) -> SolveOutcome:
        """
        Assemble and solve the reduced system, then post-process the solution.

        A failed inner solve or a singular factorization does not raise: the
        outcome is marked as not converged and carries the error message.

        Args:
            case: physics case
            level: mesh level, T_{level+1}
            outer: preconditioned FGMRES or a sparse direct solve

        Returns:
            SolveOutcome with the report filled in

        Raises:
            MeshLevelError: If the level is out of range
        """
        start = time.perf_counter()
        mesh = build_mesh(level)
        spaces = MixedSpaces.build(mesh)
        system = assemble_system(
            spaces, case, with_preconditioner=outer is OuterSolver.FGMRES
        )
        if self.config.dump_system is not None:
            dump_system(
                system,
                self.config.dump_system / f"{case.name}-T{level + 1}-rm{case.rm:g}",
            )

        preconditioner = None
        error = None
        try:
            if outer is OuterSolver.DIRECT:
                result = self._direct(system)
            else:
                inner = DIRECT_INNER if self.config.inner is InnerMode.DIRECT else KRYLOV_INNER
                preconditioner = BlockPreconditioner.from_system(
                    system, inner=inner, inner_tol=self.config.inner_tol
                )
                result = self._fgmres(system, preconditioner)
        except (InnerSolveError, SingularMatrixError) as exc:
            logger.warning("%s on T%d failed: %s", case.name, level + 1, exc.message)
            error = exc.message
            result = KrylovResult(np.zeros(system.size), 0, False, float("nan"))

        counts = system.dof_counts()
        report = SolveReport(
            case=case.name,
            level=level,
            h=mesh.h,
            rm=case.rm,
            sigma=case.sigma,
            dofs_J=counts[FieldName.J],
            dofs_phi=counts[FieldName.PHI],
            dofs_A=counts[FieldName.A],
            dofs_r=counts[FieldName.R],
            converged=result.converged,
            iterations=result.iterations,
            residual=result.residual,
            residual_history=list(result.residuals),
            error=error,
        )
        solution = None
        if error is None:
            solution = MixedSolution.from_system(system, result.x)
            self._analyse(report, solution, case)
        report.wall_time = time.perf_counter() - start

        logger.info(
            "%s T%d Rm=%g: %s after %d iterations, residual %.2e, %.1fs",
            case.name,
            level + 1,
            case.rm,
            "converged" if report.converged else "NOT converged",
            report.iterations,
            report.residual,
            report.wall_time,
        )
        return SolveOutcome(
            system=system,
            result=result,
            solution=solution,
            report=report,
            preconditioner=preconditioner,
        )

    def _fgmres(self, system: BlockSystem, preconditioner: BlockPreconditioner) -> KrylovResult:
        config = KrylovConfig(
            tol=self.config.tol,
            max_iterations=self.config.max_iterations,
            restart=self.config.restart,
        )
        return fgmres(system.matrix(), preconditioner, system.rhs_vector(), config)

    def _direct(self, system: BlockSystem) -> KrylovResult:
        matrix, b = system.matrix(), system.rhs_vector()
        x = direct_solve(matrix, b)
        b_norm = float(np.linalg.norm(b))
        residual = float(np.linalg.norm(b - matrix @ x)) / b_norm if b_norm else 0.0
        return KrylovResult(x, 0, True, residual, [residual])

    @staticmethod
    def _analyse(report: SolveReport, solution: MixedSolution, case: PhysicsCase) -> None:
        if case.exact is not None:
            errors = error_norms(solution, case.exact)
            report.err_J_hdiv = errors.j_hdiv
            report.err_phi_l2 = errors.phi_l2
            report.err_A_hcurl = errors.a_hcurl
        report.div_J_l2 = divergence_norm(solution.J)
        report.div_B_l2 = magnetic_divergence_norm(solution.A)
        report.helicity = helicity(solution.J, solution.A)
        report.r_norm = multiplier_norm(solution.r)
        report.e_norm = electric_field_norm(solution, case)
