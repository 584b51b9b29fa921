import functools
import logging
from pathlib import Path

import typer
from rich.console import Console
from rich.table import Table

from mhdkin.core.config import settings
from mhdkin.core.exceptions import ConfigurationError, MhdkinError
from mhdkin.core.logging import configure_logging
from mhdkin.models import (
    CaseName,
    InnerMode,
    OutputFormat,
    StudyConfig,
    StudyKind,
    StudyReport,
)
from mhdkin.services import OuterSolver, StudyService, emit_tables, table_rows

logger = logging.getLogger(__name__)
console = Console()

app = typer.Typer(
    name="mhdkin",
    help="Mixed finite element solver for MHD kinematics with a divergence-free current.",
    no_args_is_help=True,
)

BENCHMARK_DEFAULTS = {"case": CaseName.EXAMPLE2, "rm_values": [50.0, 100.0, 200.0]}

ConfigOption = typer.Option(None, "--config", help="JSON file with StudyConfig fields")
LevelsOption = typer.Option(None, "--levels", help="Comma separated mesh levels, e.g. 0,1,2")
RmOption = typer.Option(None, "--rm", help="Comma separated magnetic Reynolds numbers")
SigmaOption = typer.Option(None, "--sigma", help="Electric conductivity")
TolOption = typer.Option(None, "--tol", help="Relative tolerance of the outer FGMRES")
InnerTolOption = typer.Option(None, "--inner-tol", help="Relative tolerance of the block solves")
InnerOption = typer.Option(None, "--inner", help="Block solvers of the preconditioner")
OutOption = typer.Option(None, "--out", help="File to write the table to")
FormatOption = typer.Option(None, "--format", help="Table format")
DumpOption = typer.Option(None, "--dump-system", help="Directory for Matrix Market dumps")
FineLevelsOption = typer.Option(
    False, "--allow-fine-levels", help="Allow levels above the desk-scale cap"
)


def parse_list(value: str | None, cast=int) -> list | None:
    if value is None:
        return None
    try:
        return [cast(item) for item in value.split(",") if item.strip()]
    except ValueError as exc:
        raise ConfigurationError(f"cannot parse '{value}': {exc}") from exc


def handle_errors(command):
    """Log mhdkin errors with their details and exit with their code."""

    @functools.wraps(command)
    def wrapper(*args, **kwargs):
        try:
            return command(*args, **kwargs)
        except MhdkinError as exc:
            logger.error(exc.message)
            if exc.details:
                logger.debug("Details: %s", exc.details)
            raise typer.Exit(code=exc.exit_code) from exc

    return wrapper


def show(report: StudyReport) -> None:
    columns, rows = table_rows(report)
    table = Table(title=f"{report.kind} study")
    for column in columns:
        table.add_column(column, justify="right")
    for cells in rows:
        table.add_row(*cells)
    console.print(table)


def finish(report: StudyReport) -> None:
    show(report)
    config = report.config
    if config.output is not None:
        emit_tables(report, config.format, config.output)
    if not report.converged:
        failed = [row for row in report.rows if not row.converged]
        for row in failed:
            logger.error(
                "T%d Rm=%g did not converge: %s",
                row.level + 1,
                row.rm,
                row.error or f"residual {row.residual:.3e} after {row.iterations} iterations",
            )
        raise typer.Exit(code=1)


def load_config(
    kind: StudyKind,
    config: Path | None,
    defaults: dict | None = None,
    **overrides,
) -> StudyConfig:
    overrides["levels"] = parse_list(overrides.get("levels"), int)
    overrides["rm_values"] = parse_list(overrides.pop("rm", None), float)
    return StudyConfig.load(config, defaults, kind=kind, **overrides)


@app.callback()
def main(debug: bool = typer.Option(False, "--debug", help="Verbose logging")):
    configure_logging(debug or settings.debug)


@app.command()
@handle_errors
def convergence(
    config: Path | None = ConfigOption,
    levels: str | None = LevelsOption,
    rm: str | None = RmOption,
    sigma: float | None = SigmaOption,
    tol: float | None = TolOption,
    inner_tol: float | None = InnerTolOption,
    inner: InnerMode | None = InnerOption,
    out: Path | None = OutOption,
    format: OutputFormat | None = FormatOption,
    dump_system: Path | None = DumpOption,
    allow_fine_levels: bool = FineLevelsOption,
):
    """Errors and observed orders of the manufactured case over mesh levels."""
    study = load_config(
        StudyKind.CONVERGENCE,
        config,
        levels=levels,
        rm=rm,
        sigma=sigma,
        tol=tol,
        inner_tol=inner_tol,
        inner=inner,
        output=out,
        format=format,
        dump_system=dump_system,
        allow_fine_levels=allow_fine_levels or None,
    )
    finish(StudyService(study).run_convergence_study())


@app.command()
@handle_errors
def benchmark(
    config: Path | None = ConfigOption,
    levels: str | None = LevelsOption,
    rm: str | None = RmOption,
    sigma: float | None = SigmaOption,
    tol: float | None = TolOption,
    inner_tol: float | None = InnerTolOption,
    inner: InnerMode | None = InnerOption,
    out: Path | None = OutOption,
    format: OutputFormat | None = FormatOption,
    dump_system: Path | None = DumpOption,
    allow_fine_levels: bool = FineLevelsOption,
):
    """Outer iteration counts of the block preconditioner over levels and Rm."""
    study = load_config(
        StudyKind.BENCHMARK,
        config,
        BENCHMARK_DEFAULTS,
        levels=levels,
        rm=rm,
        sigma=sigma,
        tol=tol,
        inner_tol=inner_tol,
        inner=inner,
        output=out,
        format=format,
        dump_system=dump_system,
        allow_fine_levels=allow_fine_levels or None,
    )
    finish(StudyService(study).run_precon_benchmark())


@app.command()
@handle_errors
def solve(
    config: Path | None = ConfigOption,
    case: CaseName | None = typer.Option(None, "--case", help="Physics case"),
    levels: str | None = LevelsOption,
    rm: str | None = RmOption,
    sigma: float | None = SigmaOption,
    tol: float | None = TolOption,
    inner_tol: float | None = InnerTolOption,
    inner: InnerMode | None = InnerOption,
    outer: OuterSolver = typer.Option(OuterSolver.FGMRES, "--outer", help="Outer solver"),
    out: Path | None = OutOption,
    format: OutputFormat | None = FormatOption,
    dump_system: Path | None = DumpOption,
    allow_fine_levels: bool = FineLevelsOption,
):
    """Solve one case on the first configured level and report every measure."""
    study = load_config(
        StudyKind.SINGLE_SOLVE,
        config,
        case=case,
        levels=levels,
        rm=rm,
        sigma=sigma,
        tol=tol,
        inner_tol=inner_tol,
        inner=inner,
        output=out,
        format=format,
        dump_system=dump_system,
        allow_fine_levels=allow_fine_levels or None,
    )
    row = StudyService(study).run_single_solve(outer=outer)
    finish(StudyReport(kind=StudyKind.SINGLE_SOLVE, config=study, rows=[row]))


@app.command()
def version():
    """Print the version."""
    console.print(f"{settings.app_name} {settings.version}")


if __name__ == "__main__":
    app()
