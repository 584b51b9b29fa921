from mhdkin.linalg.io import (
    dump_system,
    read_matrix,
    read_vector,
    write_matrix,
    write_vector,
)
from mhdkin.linalg.krylov import KrylovConfig, KrylovResult, cg, fgmres, gmres
from mhdkin.linalg.preconditioners import (
    Preconditioner,
    PreconditionerKind,
    amg,
    build_preconditioner,
    ilu,
    jacobi,
)
from mhdkin.linalg.sparse import (
    DirectSolver,
    Operator,
    as_csr,
    as_operator,
    direct_solve,
    spmv,
)

__all__ = [
    "DirectSolver",
    "KrylovConfig",
    "KrylovResult",
    "Operator",
    "Preconditioner",
    "PreconditionerKind",
    "as_csr",
    "amg",
    "as_operator",
    "build_preconditioner",
    "cg",
    "direct_solve",
    "dump_system",
    "fgmres",
    "gmres",
    "ilu",
    "jacobi",
    "read_matrix",
    "read_vector",
    "spmv",
    "write_matrix",
    "write_vector",
]
