import logging
import math
from concurrent.futures import ThreadPoolExecutor

from mhdkin.analysis import convergence_orders
from mhdkin.assembly import CASES
from mhdkin.core.exceptions import ConfigurationError
from mhdkin.models import (
    CaseName,
    PhysicsCase,
    SolveReport,
    StudyConfig,
    StudyKind,
    StudyReport,
)
from mhdkin.services.solve_service import OuterSolver, SolveService

logger = logging.getLogger(__name__)


def build_case(name: CaseName, sigma: float, rm: float) -> PhysicsCase:
    return CASES[name](sigma=sigma, rm=rm)


class StudyService:
    """Service for running the level and Rm sweeps of a study."""

    def __init__(self, config: StudyConfig, solver: SolveService | None = None):
        self.config = config
        self.solver = solver or SolveService(config)

    def run(self) -> StudyReport:
        """Run the study named by ``config.kind``."""
        match self.config.kind:
            case StudyKind.CONVERGENCE:
                return self.run_convergence_study()
            case StudyKind.BENCHMARK:
                return self.run_precon_benchmark()
            case StudyKind.SINGLE_SOLVE:
                row = self.run_single_solve()
                return StudyReport(kind=StudyKind.SINGLE_SOLVE, config=self.config, rows=[row])

    def run_convergence_study(self) -> StudyReport:
        """
        Solve the manufactured case on every configured level and fill in
        the observed orders between consecutive levels.

        Raises:
            ConfigurationError: If the case has no exact solution
        """
        rm = self.config.rm_values[0]
        case = build_case(self.config.case, self.config.sigma, rm)
        if case.exact is None:
            raise ConfigurationError(f"case '{case.name}' has no exact solution")

        rows = self._solve_all([(case, level) for level in self.config.levels])
        h = [row.h for row in rows]
        for error, order in (
            ("err_J_hdiv", "order_J"),
            ("err_phi_l2", "order_phi"),
            ("err_A_hcurl", "order_A"),
        ):
            values = [_finite(getattr(row, error)) for row in rows]
            for row, value in zip(rows, convergence_orders(values, h), strict=True):
                setattr(row, order, value)
        return StudyReport(kind=StudyKind.CONVERGENCE, config=self.config, rows=rows)

    def run_precon_benchmark(self) -> StudyReport:
        """Outer iteration counts over the grid of levels and Rm values."""
        tasks = [
            (build_case(self.config.case, self.config.sigma, rm), level)
            for level in self.config.levels
            for rm in self.config.rm_values
        ]
        rows = self._solve_all(tasks)
        return StudyReport(kind=StudyKind.BENCHMARK, config=self.config, rows=rows)

    def run_single_solve(
        self,
        case: PhysicsCase | None = None,
        outer: OuterSolver = OuterSolver.FGMRES,
    ) -> SolveReport:
        """Solve on the first configured level with the first Rm value."""
        case = case or build_case(self.config.case, self.config.sigma, self.config.rm_values[0])
        return self.solver.solve(case, self.config.levels[0], outer=outer).report

    def _solve_row(self, task: tuple[PhysicsCase, int]) -> SolveReport:
        case, level = task
        return self.solver.solve(case, level).report

    def _solve_all(self, tasks: list[tuple[PhysicsCase, int]]) -> list[SolveReport]:
        # Rows come back in task order whatever the completion order
        if self.config.workers > 1 and len(tasks) > 1:
            with ThreadPoolExecutor(max_workers=self.config.workers) as pool:
                rows = list(pool.map(self._solve_row, tasks))
        else:
            rows = [self._solve_row(task) for task in tasks]
        failed = sum(not row.converged for row in rows)
        if failed:
            logger.warning("%d of %d solves did not converge", failed, len(rows))
        return rows


def _finite(value: float | None) -> float:
    return value if value is not None and math.isfinite(value) else math.nan
