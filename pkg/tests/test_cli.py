import csv
import json

from typer.testing import CliRunner

from mhdkin.core.config import settings
from mhdkin.main import app


def test_version(runner: CliRunner):
    """Test version command."""
    result = runner.invoke(app, ["version"])
    assert result.exit_code == 0
    assert settings.version in result.stdout


def test_help_lists_commands(runner: CliRunner):
    result = runner.invoke(app, ["--help"])
    assert result.exit_code == 0
    for command in ("convergence", "benchmark", "solve"):
        assert command in result.stdout


def test_solve_writes_table(runner: CliRunner, tmp_path):
    out = tmp_path / "solve.csv"
    result = runner.invoke(
        app, ["solve", "--case", "example2", "--levels", "0", "--rm", "50", "--out", str(out)]
    )
    assert result.exit_code == 0, result.stdout
    header, row = list(csv.reader(out.open()))
    assert header[0] == "case"
    assert row[0] == "example2"
    assert row[header.index("converged")] == "yes"


def test_solve_with_direct_outer_solver(runner: CliRunner):
    result = runner.invoke(app, ["solve", "--levels", "0", "--outer", "direct"])
    assert result.exit_code == 0


def test_convergence_markdown(runner: CliRunner, tmp_path):
    out = tmp_path / "table1.md"
    result = runner.invoke(
        app,
        ["convergence", "--levels", "0,1", "--inner", "direct", "--format", "markdown", "--out", str(out)],
    )
    assert result.exit_code == 0
    lines = out.read_text().splitlines()
    assert len(lines) == 4
    assert "| --- |" in lines[2]


def test_benchmark_with_config_file(runner: CliRunner, tmp_path):
    config = tmp_path / "benchmark.json"
    config.write_text(json.dumps({"case": "example2", "levels": [0], "rm_values": [200]}))
    out = tmp_path / "table4.csv"
    result = runner.invoke(app, ["benchmark", "--config", str(config), "--out", str(out)])
    assert result.exit_code == 0
    header, row = list(csv.reader(out.open()))
    assert row[header.index("rm")] == "200"
    assert row[header.index("dofs_J")] == "360"


def test_decreasing_levels_are_rejected(runner: CliRunner):
    result = runner.invoke(app, ["convergence", "--levels", "2,1"])
    assert result.exit_code == 2


def test_unparsable_levels(runner: CliRunner):
    result = runner.invoke(app, ["convergence", "--levels", "one,two"])
    assert result.exit_code == 2


def test_missing_config_file(runner: CliRunner, tmp_path):
    result = runner.invoke(app, ["solve", "--config", str(tmp_path / "missing.json")])
    assert result.exit_code == 2


def test_non_convergence_sets_exit_status(runner: CliRunner, tmp_path):
    config = tmp_path / "capped.json"
    config.write_text(json.dumps({"levels": [0], "max_iterations": 1, "tol": 1e-12}))
    result = runner.invoke(app, ["solve", "--config", str(config)])
    assert result.exit_code == 1


def test_fine_levels_are_rejected_without_flag(runner: CliRunner):
    result = runner.invoke(app, ["benchmark", "--levels", "0,4"])
    assert result.exit_code == 2


def test_fine_levels_flag_is_offered(runner: CliRunner):
    result = runner.invoke(app, ["convergence", "--help"])
    assert result.exit_code == 0
    assert "--allow-fine-levels" in result.stdout
