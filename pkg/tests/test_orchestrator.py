# tests/test_orchestrator.py - v0.1.0
import pytest

from core.orchestrator import SUITES, CheckResult, Orchestrator, random_vector
from persistence.store import dumps
from utils.helpers import make_rng


def test_unknown_suite():
    with pytest.raises(ValueError):
        Orchestrator(seed=1).checks_for("bogus")


def test_all_covers_every_suite():
    orchestrator = Orchestrator(seed=1, order=4)
    suites = {check[0] for check in orchestrator.checks_for("all")}
    assert suites == set(SUITES)


def test_checks_have_distinct_offsets():
    orchestrator = Orchestrator(seed=1)
    offsets = [check[-1] for check in orchestrator.checks_for("all")]
    assert len(offsets) == len(set(offsets))


def test_order_override_limits_slope_checks():
    names = [check[1].__name__ for check in Orchestrator(seed=1, order=5).checks_for("chi")]
    assert names.count("_slope") == 2
    assert Orchestrator(seed=1).checks_for("chi")[-1][3:] == (6, 113)


def test_random_vector_is_never_empty():
    rng = make_rng(0)
    for _ in range(50):
        vector = random_vector(rng, 3)
        assert vector
        assert all(c != 0 for c in vector.values())


def test_failing_check_is_reported_not_raised():
    def broken(offset):
        raise RuntimeError("boom")
    orchestrator = Orchestrator(seed=1)
    results = orchestrator.run_checks([("chi", broken, 7)])
    assert results[0].passed is False
    assert results[0].name == "broken/7"
    assert results[0].detail == {"error": "RuntimeError: boom"}


def test_results_keep_declaration_order():
    def passing(label):
        return CheckResult("star", label, True, 0.0, 1.0)
    orchestrator = Orchestrator(seed=1, threads=4)
    results = orchestrator.run_checks([("star", passing, str(k)) for k in range(8)])
    assert [r.name for r in results] == [str(k) for k in range(8)]


def test_star_suite_passes():
    report = Orchestrator(seed=42, threads=2).verify("star")
    assert report["passed"], report
    assert len(report["checks"]) == 2


def test_star_suite_is_deterministic():
    first = Orchestrator(seed=9, threads=2).verify("star")
    second = Orchestrator(seed=9, threads=1).verify("star")
    assert dumps(first) == dumps(second)


def test_postlie_suite_passes():
    report = Orchestrator(seed=42, threads=2).verify("postlie")
    failures = [c["name"] for c in report["checks"] if not c["passed"]]
    assert not failures
    assert len(report["checks"]) == 22


def test_chi_suite_passes():
    report = Orchestrator(seed=42, threads=2).verify("chi")
    failures = [c["name"] for c in report["checks"] if not c["passed"]]
    assert not failures


def test_magnus_suite_passes():
    report = Orchestrator(seed=42, threads=2).verify("magnus")
    failures = [c["name"] for c in report["checks"] if not c["passed"]]
    assert not failures


def test_hopf_suite_passes_at_low_degree():
    report = Orchestrator(seed=42, threads=2, degree=4).verify("hopf")
    failures = [c["name"] for c in report["checks"] if not c["passed"]]
    assert not failures
    hypotheses = [c["detail"]["hypothesis"] for c in report["checks"] if c["name"].startswith("star_factorization")]
    assert hypotheses == ["projector", "projector", "non-projector"]
