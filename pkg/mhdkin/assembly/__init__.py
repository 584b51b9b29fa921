from mhdkin.assembly.blocks import (
    FIELD_ORDER,
    BlockName,
    FieldName,
    assemble_block,
    field_spaces,
    reduce_block,
)
from mhdkin.assembly.cases import (
    CASES,
    benchmark_case_example2,
    benchmark_velocity,
    eddy_current_case,
    manufactured_case_example1,
)
from mhdkin.assembly.rhs import assemble_rhs, boundary_flux_vector, load_vector
from mhdkin.assembly.system import (
    PRECONDITIONER_BLOCKS,
    SYSTEM_BLOCKS,
    BlockSystem,
    assemble_system,
)

__all__ = [
    "CASES",
    "FIELD_ORDER",
    "PRECONDITIONER_BLOCKS",
    "SYSTEM_BLOCKS",
    "BlockName",
    "BlockSystem",
    "FieldName",
    "assemble_block",
    "assemble_rhs",
    "assemble_system",
    "benchmark_case_example2",
    "benchmark_velocity",
    "boundary_flux_vector",
    "eddy_current_case",
    "field_spaces",
    "load_vector",
    "manufactured_case_example1",
    "reduce_block",
]
