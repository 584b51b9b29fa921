import csv
import io
import json
import math

import pytest
from pydantic import ValidationError

from mhdkin.assembly import manufactured_case_example1
from mhdkin.core.exceptions import ConfigurationError, OutputError
from mhdkin.models import (
    CaseName,
    InnerMode,
    OutputFormat,
    SolveReport,
    StudyConfig,
    StudyKind,
    StudyReport,
)
from mhdkin.services import (
    OuterSolver,
    SolveService,
    StudyService,
    emit_tables,
    table_rows,
)


# H(div), L2 and H(curl) errors of the manufactured case on levels 0..3
MANUFACTURED_ERRORS = {
    0: (5.9811e-2, 1.0208e-1, 9.8060e-2),
    1: (2.6438e-2, 5.1034e-2, 4.8104e-2),
    2: (1.2527e-2, 2.5516e-2, 2.3780e-2),
    3: (6.1235e-3, 1.2758e-2, 1.1821e-2),
}

# Outer iterations of the two-vortex case with AMG-type inner solvers, by level and Rm
BENCHMARK_ITERATIONS = {
    0: {50.0: 21, 100.0: 23, 200.0: 30},
    1: {50.0: 19, 100.0: 22, 200.0: 30},
    2: {50.0: 16, 100.0: 18, 200.0: 25},
    3: {50.0: 14, 100.0: 16, 200.0: 20},
}


def make_row(level, **values):
    defaults = {
        "case": "example1",
        "level": level,
        "h": math.sqrt(3.0) / 2 ** (level + 1),
        "rm": 1.0,
        "sigma": 1.0,
        "dofs_J": 360,
        "dofs_phi": 48,
        "dofs_A": 196,
        "dofs_r": 125,
        "converged": True,
        "iterations": 12,
        "residual": 5e-11,
        "div_J_l2": 4.0087e-12,
    }
    return SolveReport(**{**defaults, **values})


@pytest.fixture(name="convergence_report")
def convergence_report_fixture():
    rows = [
        make_row(0, err_J_hdiv=0.059811, err_phi_l2=0.1, err_A_hcurl=0.05),
        make_row(
            1,
            err_J_hdiv=0.026438,
            err_phi_l2=0.05,
            err_A_hcurl=0.025,
            order_J=1.1778,
            order_phi=1.0,
            order_A=1.0,
        ),
    ]
    return StudyReport(kind=StudyKind.CONVERGENCE, config=StudyConfig(), rows=rows)


class TestStudyConfig:
    def test_defaults(self):
        config = StudyConfig()
        assert config.levels == [0, 1, 2]
        assert config.tol == 1e-10
        assert config.inner_tol == 1e-3
        assert config.case is CaseName.EXAMPLE1
        assert config.inner is InnerMode.KRYLOV

    @pytest.mark.parametrize(
        "values",
        [
            {"levels": []},
            {"levels": [1, 0]},
            {"levels": [0, 0]},
            {"levels": [0, 9]},
            {"tol": 1.5},
            {"inner_tol": 0.0},
            {"rm_values": [-1.0]},
            {"sigma": 0.0},
        ],
    )
    def test_invalid_values(self, values):
        with pytest.raises(ValidationError):
            StudyConfig(**values)

    def test_load_file_and_overrides(self, tmp_path):
        path = tmp_path / "study.json"
        path.write_text(json.dumps({"levels": [0, 1], "rm_values": [50, 100], "tol": 1e-8}))
        config = StudyConfig.load(path, tol=None, inner=InnerMode.DIRECT)
        assert config.levels == [0, 1]
        assert config.rm_values == [50.0, 100.0]
        assert config.tol == 1e-8
        assert config.inner is InnerMode.DIRECT

    def test_defaults_under_the_file(self, tmp_path):
        path = tmp_path / "study.json"
        path.write_text(json.dumps({"case": "example1"}))
        config = StudyConfig.load(path, {"case": "example2", "rm_values": [200.0]})
        assert config.case is CaseName.EXAMPLE1
        assert config.rm_values == [200.0]

    def test_empty_file(self, tmp_path):
        path = tmp_path / "empty.json"
        path.write_text("{}")
        assert StudyConfig.load(path) == StudyConfig.load()

    def test_unreadable_file(self, tmp_path):
        with pytest.raises(ConfigurationError):
            StudyConfig.load(tmp_path / "missing.json")

    def test_invalid_json(self, tmp_path):
        path = tmp_path / "broken.json"
        path.write_text("[1, 2")
        with pytest.raises(ConfigurationError):
            StudyConfig.load(path)

    def test_invalid_value_becomes_configuration_error(self):
        with pytest.raises(ConfigurationError) as excinfo:
            StudyConfig.load(levels=[2, 1])
        assert "levels" in excinfo.value.message

    def test_fine_levels_need_opt_in(self):
        with pytest.raises(ValidationError):
            StudyConfig(levels=[0, 4])
        assert StudyConfig(levels=[0, 4], allow_fine_levels=True).levels == [0, 4]
        assert StudyConfig(levels=[0, 3]).levels == [0, 3]

    def test_fine_levels_from_the_file(self, tmp_path):
        path = tmp_path / "study.json"
        path.write_text(json.dumps({"levels": [4]}))
        with pytest.raises(ConfigurationError) as excinfo:
            StudyConfig.load(path)
        assert "allow_fine_levels" in excinfo.value.message
        assert StudyConfig.load(path, allow_fine_levels=True).levels == [4]


class TestSolveService:
    def test_manufactured_case_on_coarsest_mesh(self):
        config = StudyConfig(levels=[0])
        outcome = SolveService(config).solve(manufactured_case_example1(), 0)
        report = outcome.report
        assert report.converged
        assert report.residual <= 1e-10
        assert report.dofs == (360, 48, 196, 125)
        assert report.h == pytest.approx(0.86603, abs=1e-5)
        assert report.div_J_l2 <= 1e-8
        assert report.div_B_l2 <= 1e-10
        assert report.err_J_hdiv is not None and report.err_J_hdiv > 0
        assert report.residual_history[0] == pytest.approx(1.0)
        assert outcome.preconditioner.applications >= report.iterations

    def test_loose_tolerance(self):
        config = StudyConfig(levels=[0], tol=0.5)
        report = SolveService(config).solve(manufactured_case_example1(), 0).report
        assert report.converged
        assert report.iterations <= 3

    def test_outer_direct_solve_agrees(self):
        service = SolveService(StudyConfig(levels=[0]))
        case = manufactured_case_example1()
        iterative = service.solve(case, 0)
        direct = service.solve(case, 0, outer=OuterSolver.DIRECT)
        assert direct.preconditioner is None
        assert direct.report.err_A_hcurl == pytest.approx(iterative.report.err_A_hcurl, abs=1e-6)
        assert direct.report.err_J_hdiv == pytest.approx(iterative.report.err_J_hdiv, abs=1e-6)
        assert direct.report.err_phi_l2 == pytest.approx(iterative.report.err_phi_l2, abs=1e-6)

    def test_direct_and_krylov_inner_solvers_agree(self):
        case = manufactured_case_example1()
        krylov = SolveService(StudyConfig(levels=[0])).solve(case, 0).result.x
        direct = SolveService(StudyConfig(levels=[0], inner=InnerMode.DIRECT)).solve(case, 0).result.x
        assert abs(krylov - direct).max() <= 1e-6 * max(1.0, abs(direct).max())

    def test_iteration_cap_is_reported(self):
        config = StudyConfig(levels=[0], tol=1e-12, max_iterations=1)
        report = SolveService(config).solve(manufactured_case_example1(), 0).report
        assert not report.converged
        assert report.iterations == 1

    def test_dump_system(self, tmp_path):
        config = StudyConfig(levels=[0], dump_system=tmp_path)
        SolveService(config).solve(manufactured_case_example1(), 0, outer=OuterSolver.DIRECT)
        dumped = tmp_path / "example1-T1-rm1"
        assert (dumped / "M.mtx").exists()
        assert (dumped / "rhs_J.mtx").exists()


class TestStudyService:
    def test_convergence_study_on_two_levels(self):
        report = StudyService(StudyConfig(levels=[0, 1])).run_convergence_study()
        assert [row.level for row in report.rows] == [0, 1]
        assert [row.h for row in report.rows] == pytest.approx([0.86603, 0.43301], abs=1e-5)
        first, second = report.rows
        assert first.order_J is None and first.order_phi is None
        assert second.order_J is not None and second.order_J > 0.5
        assert report.converged

    def test_benchmark_grid(self):
        config = StudyConfig(
            kind=StudyKind.BENCHMARK, case=CaseName.EXAMPLE2, levels=[0], rm_values=[50, 100]
        )
        report = StudyService(config).run()
        assert [(row.level, row.rm) for row in report.rows] == [(0, 50.0), (0, 100.0)]
        for row in report.rows:
            assert row.dofs == (360, 48, 196, 125)
            assert row.converged
            assert row.iterations <= 42
            assert abs(row.helicity) <= 1e-8
            assert row.r_norm <= 1e-8

    def test_concurrent_levels_keep_order(self):
        config = StudyConfig(
            kind=StudyKind.BENCHMARK, case=CaseName.EXAMPLE2, levels=[0], rm_values=[50, 200], workers=2
        )
        report = StudyService(config).run_precon_benchmark()
        assert [row.rm for row in report.rows] == [50.0, 200.0]

    def test_convergence_needs_an_exact_solution(self):
        with pytest.raises(ConfigurationError):
            StudyService(StudyConfig(case=CaseName.EXAMPLE2)).run_convergence_study()

    def test_single_solve(self):
        config = StudyConfig(kind=StudyKind.SINGLE_SOLVE, levels=[0])
        report = StudyService(config).run()
        assert len(report.rows) == 1
        assert report.rows[0].case == "example1"

    @pytest.mark.slow
    def test_convergence_orders_approach_one(self):
        report = StudyService(StudyConfig(levels=[0, 1, 2])).run_convergence_study()
        assert report.rows[-1].order_phi == pytest.approx(1.0, abs=0.05)
        for row in report.rows:
            assert row.div_J_l2 <= 1e-8

    @pytest.mark.slow
    def test_benchmark_iterations_on_finer_mesh(self):
        config = StudyConfig(
            kind=StudyKind.BENCHMARK, case=CaseName.EXAMPLE2, levels=[0, 2], rm_values=[100]
        )
        coarse, fine = StudyService(config).run().rows
        assert coarse.converged and fine.converged
        assert fine.iterations <= 36
        assert fine.iterations <= coarse.iterations + 2

    @pytest.mark.slow
    def test_convergence_table_on_four_levels(self):
        report = StudyService(StudyConfig(levels=[0, 1, 2, 3])).run_convergence_study()
        assert report.converged
        for row in report.rows:
            errors = (row.err_J_hdiv, row.err_phi_l2, row.err_A_hcurl)
            for error, reference in zip(errors, MANUFACTURED_ERRORS[row.level], strict=True):
                assert reference / 2 <= error <= 2 * reference, (row.level, reference)
        finest = report.rows[-1]
        for order in (finest.order_J, finest.order_phi, finest.order_A):
            assert order == pytest.approx(1.0, abs=0.15)

    @pytest.mark.slow
    def test_helicity_and_multiplier_vanish_on_finer_meshes(self):
        config = StudyConfig(
            kind=StudyKind.BENCHMARK, case=CaseName.EXAMPLE2, levels=[1, 2], rm_values=[200]
        )
        report = StudyService(config).run()
        for row in report.rows:
            assert row.converged
            assert abs(row.helicity) <= 1e-8
            assert row.r_norm <= 1e-8

    @pytest.mark.slow
    def test_benchmark_grid_on_four_levels(self):
        config = StudyConfig(
            kind=StudyKind.BENCHMARK,
            case=CaseName.EXAMPLE2,
            levels=[0, 1, 2, 3],
            rm_values=[50, 100, 200],
        )
        report = StudyService(config).run()
        iterations = {}
        for row in report.rows:
            assert row.converged, (row.level, row.rm, row.error)
            assert row.iterations <= 2 * BENCHMARK_ITERATIONS[row.level][row.rm]
            assert abs(row.helicity) <= 1e-8
            assert row.r_norm <= 1e-8
            iterations[(row.level, row.rm)] = row.iterations
        for rm in (50.0, 100.0, 200.0):
            assert iterations[(3, rm)] <= iterations[(0, rm)] + 2


class TestTables:
    def test_convergence_columns(self, convergence_report):
        columns, rows = table_rows(convergence_report)
        assert columns[:4] == ("level", "h", "err_J_hdiv", "order_J")
        assert columns[-1] == "iters"
        assert rows[0][:4] == ["0", "0.86603", "5.9811e-02", "---"]
        assert rows[1][3] == "1.1778"

    def test_markdown_marks_missing_orders(self, convergence_report):
        text = emit_tables(convergence_report, OutputFormat.MARKDOWN)
        lines = text.splitlines()
        assert lines[0].startswith("| level | h | err_J_hdiv")
        assert len(lines) == 4
        assert "| --- |" in lines[2]

    def test_csv_reads_back(self, convergence_report):
        text = emit_tables(convergence_report, OutputFormat.CSV)
        parsed = list(csv.reader(io.StringIO(text)))
        columns, rows = table_rows(convergence_report)
        assert parsed == [list(columns), *rows]

    def test_single_row(self):
        report = StudyReport(kind=StudyKind.BENCHMARK, config=StudyConfig(), rows=[make_row(0, rm=50.0, helicity=1e-14, r_norm=0.0)])
        lines = emit_tables(report).splitlines()
        assert len(lines) == 2
        assert lines[1].split(",")[2:7] == ["360", "48", "196", "125", "50"]

    def test_write_file(self, tmp_path, convergence_report):
        path = tmp_path / "out" / "table1.md"
        text = emit_tables(convergence_report, OutputFormat.MARKDOWN, path)
        assert path.read_text() == text

    def test_unwritable_path(self, tmp_path, convergence_report):
        with pytest.raises(OutputError):
            emit_tables(convergence_report, OutputFormat.CSV, tmp_path)

    def test_empty_report(self):
        with pytest.raises(ValueError):
            emit_tables(StudyReport(kind=StudyKind.CONVERGENCE, config=StudyConfig()))
