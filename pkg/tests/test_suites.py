import pytest

from conftest import pt
from geometry.errors import CubicError
from geometry.projective import proj_equal
from suites.lemma_suites import LemmaSuiteRunner, entry_for, known_rational_point
from suites.report import CheckRecord, SuiteReport, exit_code_of
from utils.serialization import dumps


@pytest.fixture(scope="module")
def fermat_entry(fermat):
    return entry_for(fermat)


def run(entry, suite, trials, seed=9):
    return LemmaSuiteRunner([entry], seed=seed, trials=trials).run(suite)


def assert_all_passed(report):
    failures = [(r.check, r.detail) for r in report.records if not r.passed]
    assert not failures
    assert report.exit_code == 0


class TestReport:
    def test_totals_and_exit_code(self):
        report = SuiteReport(suite="demo", backend="rational", seed=0, trials=2)
        report.add(CheckRecord("demo", "a", 0, 1, True, inputs={"p": 1}))
        report.add(CheckRecord("demo", "a", 1, 2, False, inputs={"p": 2}, detail="boom"))
        report.add(CheckRecord("demo", "b", 0, 3, True))
        doc = report.to_json()
        assert doc["totals"] == {"a": {"total": 2, "passed": 1, "failed": 1}, "b": {"total": 1, "passed": 1, "failed": 0}}
        assert doc["passed"] == 2 and doc["failed"] == 1
        assert exit_code_of(doc) == report.exit_code == 1

    def test_failures_carry_reproduction_data(self):
        passed = CheckRecord("demo", "a", 0, 1, True, inputs={"p": 1}).to_json()
        failed = CheckRecord("demo", "a", 0, 1, False, inputs={"p": 1}).to_json()
        assert "inputs" not in passed
        assert failed["inputs"] == {"p": 1}
        assert passed["inputs_digest"] == failed["inputs_digest"]

    def test_records_are_sorted_by_trial(self):
        report = SuiteReport(suite="demo", backend="rational", seed=0, trials=2)
        report.add(CheckRecord("demo", "a", 1, 1, True))
        report.add(CheckRecord("demo", "a", 0, 1, True))
        assert [r["trial"] for r in report.to_json()["records"]] == [0, 1]


class TestRunner:
    def test_known_point_of_the_fermat_cubic(self, fermat):
        assert proj_equal(known_rational_point(fermat), pt(3, 4, 5, -6, 0))

    def test_vacuous_run(self, fermat_entry):
        report = run(fermat_entry, "all", 0)
        assert report.records == []
        assert report.exit_code == 0

    def test_unknown_suite(self, fermat_entry):
        with pytest.raises(CubicError):
            run(fermat_entry, "moduli", 1)

    def test_involution(self, fermat_entry):
        report = run(fermat_entry, "involution", 6)
        assert len(report.records) == 6
        assert_all_passed(report)

    def test_fixed_points(self, fermat_entry):
        report = run(fermat_entry, "fixed-points", 4)
        assert_all_passed(report)
        totals = report.totals()
        for check in ("S*_u is fixed", "S_u maps to u", "generic points move"):
            assert totals[check]["total"] == 4

    def test_bitangency(self, fermat_entry):
        assert_all_passed(run(fermat_entry, "bitangency", 2))

    def test_lines(self, fermat_entry):
        report = run(fermat_entry, "lines", 3)
        assert len(report.records) == 3
        assert_all_passed(report)

    def test_eckardt_census(self, fermat_entry):
        report = run(fermat_entry, "eckardt", 2)
        totals = report.totals()
        assert totals["candidate is Eckardt"] == {"total": 30, "passed": 30, "failed": 0}
        assert totals["random point is not Eckardt"]["passed"] == 2

    def test_divisor(self, fermat_entry):
        assert_all_passed(run(fermat_entry, "divisor", 10))

    def test_numerics(self, fermat_entry):
        assert_all_passed(run(fermat_entry, "numerics", 10))

    def test_spray(self, fermat_entry):
        assert_all_passed(run(fermat_entry, "spray", 1))

    def test_conic(self, fermat_entry):
        assert_all_passed(run(fermat_entry, "conic", 1))

    def test_rational_reports_are_byte_stable(self, fermat_entry):
        assert dumps(run(fermat_entry, "involution", 3).to_json()) == dumps(run(fermat_entry, "involution", 3).to_json())

    def test_timing_is_opt_in(self, fermat_entry):
        assert "wall_clock" not in run(fermat_entry, "numerics", 1).to_json()
        timed = LemmaSuiteRunner([fermat_entry], trials=1, timing=True).run("numerics").to_json()
        assert timed["wall_clock"] >= 0
