# tests/test_solver.py - v0.1.0
import numpy as np
import pytest

from core.orchestrator import preset_problem, uniform_grid
from flow.diagnostics import summarize
from flow.solver import (
    FACTORIZED,
    MAGNUS_SERIES,
    RK4,
    FlowError,
    FlowProblem,
    FlowTolerances,
    ProblemValidationError,
    compare_trajectories,
    solve,
)
from lie.algebra import EXACT, NUMERIC, LieElement, bracket
from lie.splitting import SplittingSpec


@pytest.mark.parametrize("kwargs", [{"chi_tol": 0.0}, {"rk4_step": float("inf")}, {"magnus_order": 0}])
def test_tolerances_validated(kwargs):
    with pytest.raises(ProblemValidationError):
        FlowTolerances(**kwargs)


def test_problem_collects_every_error():
    a0 = LieElement(np.eye(2), NUMERIC)
    with pytest.raises(ProblemValidationError) as info:
        FlowProblem(SplittingSpec.qr_skew(3), a0, (0.1, 0.05), "euler")
    errors = info.value.errors
    assert len(errors) == 4
    assert any("start at 0" in e for e in errors)
    assert any("increasing" in e for e in errors)
    assert any("euler" in e for e in errors)


def test_problem_rejects_exact_and_non_finite_states():
    spec = SplittingSpec.lower_triangular(2)
    with pytest.raises(ProblemValidationError):
        FlowProblem(spec, LieElement.zeros(2, EXACT), (0.0, 1.0))
    with pytest.raises(ProblemValidationError):
        FlowProblem(spec, LieElement([[np.nan, 0.0], [0.0, 1.0]], NUMERIC), (0.0, 1.0))
    with pytest.raises(ProblemValidationError):
        FlowProblem(spec, LieElement(np.eye(2), NUMERIC), ())


def test_with_method_keeps_other_tolerances():
    problem = preset_problem("triangular3", seed=3)
    variant = problem.with_method(RK4, rk4_step=1e-3)
    assert variant.method == RK4
    assert variant.tolerances.rk4_step == 1e-3
    assert variant.tolerances.chi_tol == problem.tolerances.chi_tol
    assert variant.t_grid == problem.t_grid


def test_presets():
    assert len(preset_problem("toda5").t_grid) == 21
    assert preset_problem("qrflow4", seed=1).a0.frobenius_norm() == pytest.approx(1.5)
    with pytest.raises(ValueError):
        preset_problem("toda7")


def test_toda_flow_is_isospectral_and_symmetric():
    problem = preset_problem("toda5")
    trajectory = solve(problem)
    summary = summarize(trajectory)
    assert trajectory.times == list(problem.t_grid)
    assert summary["max_drift"] <= 1e-10
    assert summary["max_symmetry_defect"] <= 1e-11
    assert summary["max_conjugation_defect"] <= 1e-12


def test_toda_flow_matches_rk4():
    problem = preset_problem("toda5")
    gap = compare_trajectories(solve(problem), solve(problem.with_method(RK4, rk4_step=1e-4)))
    assert gap <= 1e-7


def test_qr_skew_transporters_stay_orthogonal():
    trajectory = solve(preset_problem("qrflow4", seed=5))
    for sample in trajectory.samples:
        g = sample.transporter.entries
        assert np.linalg.norm(g.T @ g - np.eye(4)) <= 1e-10


def test_magnus_series_tracks_factorized_solve():
    problem = preset_problem("triangular3", seed=11)
    series = solve(problem.with_method(MAGNUS_SERIES, substep_norm_cap=0.1, magnus_order=8))
    assert compare_trajectories(solve(problem), series) <= 1e-6


def test_substeps_respect_norm_cap():
    problem = preset_problem("toda5").with_method(FACTORIZED, substep_norm_cap=0.05)
    trajectory = solve(problem)
    assert trajectory.metadata["substeps"] >= 20 * int(np.ceil(0.1 * 1.7 / 0.05))


def test_grids_must_match():
    problem = preset_problem("triangular3", seed=2)
    coarse = FlowProblem(problem.spec, problem.a0, uniform_grid(2.0, 0.5))
    with pytest.raises(FlowError):
        compare_trajectories(solve(problem), solve(coarse))


@pytest.mark.parametrize("method", [FACTORIZED, RK4])
def test_stationary_flow_with_negative_trace(method):
    a0 = LieElement(-5.0 * np.eye(3), NUMERIC)
    problem = FlowProblem(SplittingSpec.lower_triangular(3), a0, uniform_grid(2.0, 0.1), method)
    trajectory = solve(problem)
    assert len(trajectory) == 21
    for sample in trajectory.samples:
        assert sample.a.equals(a0, tol=1e-12)


def test_rk4_is_fourth_order():
    problem = preset_problem("toda5")
    reference = solve(problem)
    coarse = compare_trajectories(reference, solve(problem.with_method(RK4, rk4_step=0.1)))
    fine = compare_trajectories(reference, solve(problem.with_method(RK4, rk4_step=0.05)))
    assert 12.0 <= coarse / fine <= 20.0


def test_coarse_rk4_drifts_more_than_factorized():
    problem = preset_problem("toda5")
    factorized = summarize(solve(problem))["max_drift"]
    coarse = summarize(solve(problem.with_method(RK4, rk4_step=0.1)))["max_drift"]
    assert factorized <= 1e-10
    assert coarse > 1e-9


def test_result_does_not_depend_on_substep_cap():
    problem = preset_problem("toda5")
    wide = solve(problem.with_method(FACTORIZED, substep_norm_cap=0.2))
    narrow = solve(problem.with_method(FACTORIZED, substep_norm_cap=0.1))
    assert compare_trajectories(wide, narrow) <= 1e-9


def test_qr_skew_gl2_flow_diagonalizes():
    spec = SplittingSpec.qr_skew(2)
    a0 = LieElement([[0.0, 1.0], [1.0, 0.0]], NUMERIC)
    assert bracket(a0, spec.plus(a0)).equals(LieElement([[2.0, 0.0], [0.0, -2.0]], NUMERIC), tol=1e-15)

    h = 1e-5
    early = solve(FlowProblem(spec, a0, (0.0, h)))
    derivative = (early.samples[-1].a - a0) * (1.0 / h)
    assert derivative.equals(LieElement([[2.0, 0.0], [0.0, -2.0]], NUMERIC), tol=1e-3)

    late = solve(FlowProblem(spec, a0, uniform_grid(15.0, 1.0)))
    assert late.samples[-1].a.equals(LieElement([[1.0, 0.0], [0.0, -1.0]], NUMERIC), tol=1e-8)
