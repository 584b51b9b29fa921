from mhdkin.precon.block import (
    DIRECT_INNER,
    KRYLOV_INNER,
    KRYLOV_PRECONDITIONERS,
    STEP_PRIORITY,
    BlockPreconditioner,
    Coupling,
    InnerSolver,
)
from mhdkin.precon.constraint import (
    ConstraintSystem,
    SpectrumReport,
    build_constraint_preconditioner_dense,
    verify_unit_eigenvalue_multiplicity,
)

__all__ = [
    "DIRECT_INNER",
    "KRYLOV_INNER",
    "KRYLOV_PRECONDITIONERS",
    "STEP_PRIORITY",
    "BlockPreconditioner",
    "ConstraintSystem",
    "Coupling",
    "InnerSolver",
    "SpectrumReport",
    "build_constraint_preconditioner_dense",
    "verify_unit_eigenvalue_multiplicity",
]
