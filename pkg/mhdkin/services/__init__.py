from mhdkin.services.solve_service import OuterSolver, SolveOutcome, SolveService
from mhdkin.services.study_service import StudyService, build_case
from mhdkin.services.table_service import (
    COLUMNS,
    emit_tables,
    format_value,
    render_csv,
    render_markdown,
    table_rows,
)

__all__ = [
    "COLUMNS",
    "OuterSolver",
    "SolveOutcome",
    "SolveService",
    "StudyService",
    "build_case",
    "emit_tables",
    "format_value",
    "render_csv",
    "render_markdown",
    "table_rows",
]
