import logging
from collections.abc import Callable
from dataclasses import dataclass
from enum import StrEnum

import numpy as np
import scipy.sparse as sp

from mhdkin.assembly import FIELD_ORDER, BlockName, BlockSystem, FieldName
from mhdkin.core.config import settings
from mhdkin.core.exceptions import (
    ConvergenceError,
    DimensionMismatchError,
    IndefiniteOperatorError,
    InnerSolveError,
    SingularMatrixError,
)
from mhdkin.linalg import (
    DirectSolver,
    KrylovConfig,
    PreconditionerKind,
    build_preconditioner,
    cg,
    gmres,
)
from mhdkin.utils.topological_sort import topological_sort, validate_dependencies

logger = logging.getLogger(__name__)

# Among blocks that are ready together, solve the multiplier blocks first
STEP_PRIORITY = (FieldName.R, FieldName.A, FieldName.PHI, FieldName.J)


class InnerSolver(StrEnum):
    DIRECT = "direct"
    CG = "cg"
    GMRES = "gmres"
    FIXED_CG = "fixed_cg"


KRYLOV_INNER = {
    FieldName.J: InnerSolver.CG,
    FieldName.PHI: InnerSolver.FIXED_CG,
    FieldName.A: InnerSolver.GMRES,
    FieldName.R: InnerSolver.CG,
}
DIRECT_INNER = dict.fromkeys(FIELD_ORDER, InnerSolver.DIRECT)

# CG blocks need a symmetric preconditioner; ILU is for the GMRES block only
KRYLOV_PRECONDITIONERS = {
    FieldName.J: PreconditionerKind.AMG,
    FieldName.PHI: PreconditionerKind.JACOBI,
    FieldName.A: PreconditionerKind.ILU,
    FieldName.R: PreconditionerKind.AMG,
}


@dataclass
class Coupling:
    matrix: sp.csr_matrix
    scale: float = 1.0


class BlockPreconditioner:
    """
    Block upper-triangular preconditioner applied by back substitution.

    Each field has a diagonal block D (used with a sign) and the rows carry
    scaled off-diagonal couplings. The order of the solves follows from the
    couplings: a row is solved once every column it couples to is known.
    """

    def __init__(
        self,
        sizes: dict[FieldName, int],
        diagonal: dict[FieldName, sp.csr_matrix],
        signs: dict[FieldName, float],
        couplings: dict[tuple[FieldName, FieldName], Coupling],
        inner: dict[FieldName, InnerSolver] | None = None,
        inner_tol: float | None = None,
        q_hat_iterations: int | None = None,
        preconditioners: dict[FieldName, PreconditionerKind] | None = None,
    ):
        self.sizes = dict(sizes)
        self.diagonal = diagonal
        self.signs = signs
        self.couplings = couplings
        self.inner = {**KRYLOV_INNER, **(inner or {})}
        self.preconditioners = {**KRYLOV_PRECONDITIONERS, **(preconditioners or {})}
        self.inner_tol = inner_tol or settings.inner_tol
        self.q_hat_iterations = q_hat_iterations or settings.q_hat_iterations

        dependencies = validate_dependencies(list(couplings))
        for name in sizes:
            dependencies.setdefault(name, [])
        self.steps: list[FieldName] = topological_sort(dependencies, STEP_PRIORITY)

        self.offsets: dict[FieldName, int] = {}
        start = 0
        for name in FIELD_ORDER:
            self.offsets[name] = start
            start += self.sizes[name]
        self.size = start

        self._solvers = {name: self._make_solver(name) for name in self.steps}
        self.applications = 0
        self.inner_iterations = dict.fromkeys(self.steps, 0)
        logger.debug(
            "Block preconditioner steps %s with inner solvers %s and preconditioners %s",
            [str(name) for name in self.steps],
            {str(name): str(kind) for name, kind in self.inner.items()},
            {str(name): str(kind) for name, kind in self.preconditioners.items()},
        )

    @classmethod
    def from_system(
        cls,
        system: BlockSystem,
        inner: dict[FieldName, InnerSolver] | None = None,
        inner_tol: float | None = None,
        q_hat_iterations: int | None = None,
        preconditioners: dict[FieldName, PreconditionerKind] | None = None,
    ) -> "BlockPreconditioner":
        """
        The preconditioner of the (J, phi, A, r) system:

            [ M_hat  2 G^T   K       0    ]
            [ 0      -Q_hat  0       0    ]
            [ 0      0       F_hat_w 2 B^T]
            [ 0      0       0       -L   ]
        """
        b = system.blocks
        return cls(
            sizes=system.sizes,
            diagonal={
                FieldName.J: b[BlockName.M_HAT],
                FieldName.PHI: b[BlockName.Q_HAT],
                FieldName.A: b[BlockName.F_HAT_W],
                FieldName.R: b[BlockName.L],
            },
            signs={FieldName.J: 1.0, FieldName.PHI: -1.0, FieldName.A: 1.0, FieldName.R: -1.0},
            couplings={
                (FieldName.J, FieldName.PHI): Coupling(b[BlockName.G].T.tocsr(), 2.0),
                (FieldName.J, FieldName.A): Coupling(b[BlockName.K], 1.0),
                (FieldName.A, FieldName.R): Coupling(b[BlockName.B].T.tocsr(), 2.0),
            },
            inner=inner,
            inner_tol=inner_tol,
            q_hat_iterations=q_hat_iterations,
            preconditioners=preconditioners,
        )

    def _make_solver(self, name: FieldName) -> Callable[[np.ndarray], tuple[np.ndarray, int]]:
        matrix = self.diagonal[name]
        kind = self.inner[name]
        step = self.steps.index(name) + 1

        if kind is InnerSolver.DIRECT:
            try:
                direct = DirectSolver(matrix)
            except SingularMatrixError as exc:
                raise InnerSolveError(step, str(name), exc.message) from exc
            return lambda rhs: (direct.solve(rhs), 1)

        preconditioner = build_preconditioner(self.preconditioners[name], matrix)
        if kind is InnerSolver.GMRES:
            config = KrylovConfig(
                tol=self.inner_tol,
                max_iterations=settings.inner_max_iterations,
                restart=settings.inner_restart,
            )

            def solve(rhs):
                result = gmres(matrix, rhs, config, preconditioner=preconditioner)
                return self._checked(result, step, name)

            return solve

        if kind is InnerSolver.FIXED_CG:
            config = KrylovConfig(tol=self.inner_tol, fixed_iterations=self.q_hat_iterations)
        else:
            config = KrylovConfig(tol=self.inner_tol, max_iterations=settings.inner_max_iterations)

        def solve(rhs):
            try:
                result = cg(matrix, preconditioner, rhs, config)
            except IndefiniteOperatorError as exc:
                logger.warning("Inner solve of step %d (%s): %s", step, name, exc.message)
                raise InnerSolveError(step, str(name), exc.message) from exc
            return self._checked(result, step, name)

        return solve

    def _checked(self, result, step: int, name: FieldName) -> tuple[np.ndarray, int]:
        try:
            result.check(self.inner_tol)
        except ConvergenceError as exc:
            logger.warning("Inner solve of step %d (%s) failed: %s", step, name, exc.message)
            raise InnerSolveError(step, str(name), exc.message) from exc
        return result.x, result.iterations

    def split(self, r: np.ndarray) -> dict[FieldName, np.ndarray]:
        if len(r) != self.size:
            raise DimensionMismatchError(self.size, len(r))
        return {
            name: r[self.offsets[name] : self.offsets[name] + self.sizes[name]]
            for name in FIELD_ORDER
        }

    def apply(self, r: np.ndarray) -> np.ndarray:
        """
        Solve P e = r by back substitution over the steps.

        Raises:
            InnerSolveError: If a block solve fails, carrying the step number
        """
        parts = self.split(np.asarray(r, dtype=float))
        solution: dict[FieldName, np.ndarray] = {}
        for name in self.steps:
            rhs = parts[name].copy()
            for (row, column), coupling in self.couplings.items():
                if row == name:
                    rhs -= coupling.scale * (coupling.matrix @ solution[column])
            x, iterations = self._solvers[name](self.signs[name] * rhs)
            solution[name] = x
            self.inner_iterations[name] += iterations
        self.applications += 1
        return np.concatenate([solution[name] for name in FIELD_ORDER])

    __call__ = apply

    def matrix(self) -> sp.csr_matrix:
        """The preconditioner as an explicit sparse block matrix."""
        rows = []
        for row in FIELD_ORDER:
            blocks = []
            for column in FIELD_ORDER:
                if row == column:
                    blocks.append(self.signs[row] * self.diagonal[row])
                elif (row, column) in self.couplings:
                    coupling = self.couplings[(row, column)]
                    blocks.append(coupling.scale * coupling.matrix)
                else:
                    blocks.append(None)
            rows.append(blocks)
        return sp.block_array(rows, format="csr")
