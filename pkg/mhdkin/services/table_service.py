import csv
import io
import logging
import math
from pathlib import Path

from mhdkin.core.exceptions import OutputError
from mhdkin.models import OutputFormat, SolveReport, StudyKind, StudyReport

logger = logging.getLogger(__name__)

COLUMNS: dict[StudyKind, tuple[str, ...]] = {
    StudyKind.CONVERGENCE: (
        "level",
        "h",
        "err_J_hdiv",
        "order_J",
        "err_phi_l2",
        "order_phi",
        "err_A_hcurl",
        "order_A",
        "div_J_l2",
        "iters",
    ),
    StudyKind.BENCHMARK: (
        "level",
        "h",
        "dofs_J",
        "dofs_phi",
        "dofs_A",
        "dofs_r",
        "rm",
        "iters",
        "helicity",
        "r_norm",
    ),
    StudyKind.SINGLE_SOLVE: (
        "case",
        "level",
        "h",
        "dofs_J",
        "dofs_phi",
        "dofs_A",
        "dofs_r",
        "rm",
        "converged",
        "iters",
        "residual",
        "div_J_l2",
        "div_B_l2",
        "helicity",
        "r_norm",
        "e_norm",
        "wall_time",
    ),
}

# Plain five significant digits; the rest in scientific notation
_FIXED = {"h", "rm", "order_J", "order_phi", "order_A", "wall_time"}
_ALIASES = {"iters": "iterations"}
MISSING = "---"


def format_value(column: str, value) -> str:
    if value is None:
        return MISSING
    if isinstance(value, bool):
        return "yes" if value else "no"
    if isinstance(value, int):
        return str(value)
    if isinstance(value, float):
        if not math.isfinite(value):
            return str(value)
        return f"{value:.5g}" if column in _FIXED else f"{value:.4e}"
    return str(value)


def table_rows(report: StudyReport) -> tuple[tuple[str, ...], list[list[str]]]:
    """Header and formatted cells of a study, in level order."""
    columns = COLUMNS[report.kind]
    rows = [
        [format_value(column, _cell(row, column)) for column in columns]
        for row in report.rows
    ]
    return columns, rows


def _cell(row: SolveReport, column: str):
    return getattr(row, _ALIASES.get(column, column))


def render_csv(report: StudyReport) -> str:
    columns, rows = table_rows(report)
    buffer = io.StringIO()
    writer = csv.writer(buffer, lineterminator="\n")
    writer.writerow(columns)
    writer.writerows(rows)
    return buffer.getvalue()


def render_markdown(report: StudyReport) -> str:
    columns, rows = table_rows(report)
    lines = [
        "| " + " | ".join(columns) + " |",
        "|" + "|".join("---" for _ in columns) + "|",
    ]
    lines += ["| " + " | ".join(cells) + " |" for cells in rows]
    return "\n".join(lines) + "\n"


def emit_tables(
    report: StudyReport,
    output_format: OutputFormat = OutputFormat.CSV,
    path: Path | None = None,
) -> str:
    """
    Render a study as CSV or markdown and optionally write it to a file.

    Args:
        report: study with at least one row
        output_format: csv or markdown
        path: file to write, nothing is written when None

    Returns:
        The rendered table

    Raises:
        ValueError: If the report has no rows
        OutputError: If the file cannot be written
    """
    if not report.rows:
        raise ValueError("Cannot emit a table for a study without rows")
    text = render_csv(report) if output_format is OutputFormat.CSV else render_markdown(report)
    if path is not None:
        path = Path(path)
        try:
            path.parent.mkdir(parents=True, exist_ok=True)
            path.write_text(text)
        except OSError as exc:
            raise OutputError(str(path), str(exc)) from exc
        logger.info("Wrote %s table with %d rows to %s", output_format, len(report.rows), path)
    return text
