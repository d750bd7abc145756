import json
import math

import pytest

from fptlab.validation import SUITES, Check, ValidationReport, run_suite


@pytest.fixture(scope="module")
def algebra_report():
    return run_suite("algebra", seed=3)


class TestReport:
    def test_algebra_suite_passes(self, algebra_report):
        assert algebra_report.passed
        assert all(c.status == "pass" for c in algebra_report.checks)

    def test_every_check_names_its_oracle(self, algebra_report):
        assert all(c.oracle for c in algebra_report.checks)

    def test_environment(self, algebra_report):
        env = algebra_report.environment
        assert env["seed"] == 3 and env["suite"] == "algebra" and env["version"]

    def test_json_is_deterministic(self, algebra_report):
        again = run_suite("algebra", seed=3)
        assert again.to_json() == algebra_report.to_json()

    def test_runtime_only_with_timings(self, algebra_report):
        plain = json.loads(algebra_report.to_json())
        timed = json.loads(algebra_report.to_json(timings=True))
        assert all("runtime" not in c for c in plain["checks"])
        assert all("runtime" in c for c in timed["checks"])

    def test_text_lists_every_check(self, algebra_report):
        text = algebra_report.to_text()
        for c in algebra_report.checks:
            assert c.name in text

    def test_nonfinite_values_serialise(self):
        rep = ValidationReport([Check("x", "o", "informational", math.nan, math.inf, 0.0, "")], {})
        data = json.loads(rep.to_json())
        assert data["checks"][0]["statistic"] == "nan"
        assert data["checks"][0]["tolerance"] == "inf"
        assert rep.passed

    def test_failure_marks_report(self):
        rep = ValidationReport([Check("x", "o", "fail", 1.0, 0.5, 0.0, "")], {})
        assert not rep.passed


class TestRunSuite:
    def test_unknown_suite(self):
        with pytest.raises(ValueError):
            run_suite("nope")

    @pytest.mark.parametrize("budget", [0.0, -1.0, 1.5])
    def test_budget_bounds(self, budget):
        with pytest.raises(ValueError):
            run_suite("algebra", budget=budget)

    def test_suite_names(self):
        assert SUITES == ("algebra", "ode", "density", "mc", "gm", "pde")

    def test_ode_suite_passes(self):
        assert run_suite("ode", seed=1).passed

    def test_density_suite_low_budget(self):
        rep = run_suite("density", seed=7, budget=0.05)
        assert rep.passed, [c for c in rep.checks if c.status == "fail"]
        names = {c.name: c for c in rep.checks}
        assert names["h_kappa_over_girsanov_at_t1"].status == "informational"


def test_subset_reproduces_full_run():
    full = {c.name: c.statistic for c in run_suite("ode", seed=2).checks}
    sub = run_suite("ode", seed=2, only={"s_image_residual"})
    assert [c.name for c in sub.checks] == ["s_image_residual"]
    assert sub.checks[0].statistic == full["s_image_residual"]


def test_subset_reproduces_monte_carlo_statistics():
    full = {c.name: c.statistic for c in run_suite("gm", seed=1, budget=0.02).checks}
    sub = run_suite("gm", seed=1, budget=0.02, only={"ou_covariance"})
    assert sub.checks[0].statistic == full["ou_covariance"]
