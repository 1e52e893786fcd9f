# flow/solver.py - v0.1.0
import logging
import math
from dataclasses import dataclass, field

import numpy as np
import scipy.linalg

from config import settings
from lie.algebra import NUMERIC, BranchError, GroupElement, LieAlgebraError, LieElement, expm
from lie.splitting import QR_SKEW, SplittingSpec
from magnus.bch_recursion import ChiConvergenceError, chi_fixed_point
from magnus.expansion import magnus_coefficients

logger = logging.getLogger(__name__)

FACTORIZED = "factorized"
RK4 = "rk4"
MAGNUS_SERIES = "magnus_series"
METHODS = (FACTORIZED, RK4, MAGNUS_SERIES)


class FlowError(Exception):
    """Base exception for Lax-flow solving."""
    def __init__(self, message, errors=None):
        super().__init__(message)
        self.errors = errors if errors is not None else []


class ProblemValidationError(FlowError):
    pass


class FlowBlowUpError(FlowError):
    def __init__(self, message, time: float, errors=None):
        super().__init__(message, errors)
        self.time = time


class FlowStepError(FlowError):
    """A sub-step failed; carries (index, start time, step size)."""
    def __init__(self, message, substep: tuple, errors=None):
        super().__init__(message, errors)
        self.substep = substep


@dataclass(frozen=True)
class FlowTolerances:
    chi_tol: float = field(default_factory=lambda: settings.CHI_TOL)
    substep_norm_cap: float = field(default_factory=lambda: settings.SUBSTEP_CAP)
    rk4_step: float = field(default_factory=lambda: settings.RK4_STEP)
    magnus_order: int = field(default_factory=lambda: settings.MAGNUS_ORDER)

    def __post_init__(self):
        for name in ("chi_tol", "substep_norm_cap", "rk4_step"):
            value = getattr(self, name)
            if not (value > 0 and math.isfinite(value)):
                raise ProblemValidationError(f"Tolerance {name} must be positive and finite, got {value}.")
        if self.magnus_order < 1:
            raise ProblemValidationError(f"magnus_order must be at least 1, got {self.magnus_order}.")

    def to_dict(self) -> dict:
        return {
            "chi_tol": self.chi_tol,
            "substep_norm_cap": self.substep_norm_cap,
            "rk4_step": self.rk4_step,
            "magnus_order": self.magnus_order,
        }


@dataclass(frozen=True, eq=False)
class FlowProblem:
    """da/dt = [a, pi_+(a)], a(0) = a0, sampled on t_grid."""
    spec: SplittingSpec
    a0: LieElement
    t_grid: tuple
    method: str = FACTORIZED
    tolerances: FlowTolerances = field(default_factory=FlowTolerances)

    def __post_init__(self):
        errors = []
        grid = tuple(float(t) for t in self.t_grid)
        if not grid:
            errors.append("t_grid is empty")
        elif grid[0] != 0.0:
            errors.append(f"t_grid must start at 0, starts at {grid[0]}")
        if any(b <= a for a, b in zip(grid, grid[1:])):
            errors.append("t_grid must be strictly increasing")
        if not all(math.isfinite(t) for t in grid):
            errors.append("t_grid has non-finite times")
        if self.a0.mode != NUMERIC:
            errors.append("a0 must be numeric")
        elif not np.all(np.isfinite(self.a0.entries)):
            errors.append("a0 has non-finite entries")
        if self.a0.dim != self.spec.dim:
            errors.append(f"a0 is {self.a0.dim}x{self.a0.dim}, splitting acts on gl({self.spec.dim})")
        if self.method not in METHODS:
            errors.append(f"unknown method '{self.method}'")
        if errors:
            raise ProblemValidationError(f"Invalid flow problem: {'; '.join(errors)}.", errors=errors)
        object.__setattr__(self, "t_grid", grid)

    def with_method(self, method: str, **tolerances) -> "FlowProblem":
        tol = self.tolerances.to_dict()
        tol.update(tolerances)
        return FlowProblem(self.spec, self.a0, self.t_grid, method, FlowTolerances(**tol))


@dataclass(frozen=True, eq=False)
class FlowSample:
    t: float
    a: LieElement
    transporter: GroupElement


@dataclass(frozen=True, eq=False)
class FlowTrajectory:
    problem: FlowProblem
    samples: tuple
    metadata: dict = field(default_factory=dict)

    @property
    def method(self) -> str:
        return self.problem.method

    @property
    def times(self) -> list[float]:
        return [s.t for s in self.samples]

    @property
    def states(self) -> list[LieElement]:
        return [s.a for s in self.samples]

    def __len__(self) -> int:
        return len(self.samples)


def _orthogonality_defect(g: GroupElement) -> float:
    return float(np.linalg.norm(g.entries.T @ g.entries - np.eye(g.dim), "fro"))


def _advance(problem: FlowProblem, a: LieElement, g: GroupElement, span: float, t_start: float,
             step_generator, counters: dict) -> tuple[LieElement, GroupElement]:
    """Composes sub-steps with ||h a||_F <= cap over one grid interval."""
    spec, a0 = problem.spec, problem.a0
    cap = problem.tolerances.substep_norm_cap
    elapsed = 0.0
    while span - elapsed > 1e-15 * max(1.0, span):
        remaining = span - elapsed
        norm = a.frobenius_norm()
        h = remaining if norm * remaining <= cap else cap / norm
        substep = (counters["substeps"], t_start + elapsed, h)
        try:
            g = g @ expm(spec.plus(step_generator(a, h)))
        except (ChiConvergenceError, BranchError) as e:
            raise FlowStepError(f"Sub-step {substep[0]} at t={substep[1]:.6g} (h={h:.3e}) failed: {e}",
                                substep=substep, errors=[str(e)]) from e
        except LieAlgebraError as e:
            raise FlowStepError(f"Sub-step {substep[0]} failed: {e}", substep=substep, errors=[str(e)]) from e
        if spec.kind == QR_SKEW and _orthogonality_defect(g) > settings.ORTHO_TOL:
            unitary, _ = scipy.linalg.polar(g.entries)
            g = GroupElement(unitary, NUMERIC)
            counters["reorthogonalizations"] += 1
        a = g.conjugate(a0)
        if not np.all(np.isfinite(a.entries)):
            raise FlowBlowUpError(f"State became non-finite at t={t_start + elapsed + h:.6g}.", time=t_start + elapsed + h)
        counters["substeps"] += 1
        elapsed += h
    return a, g


def _solve_by_substeps(problem: FlowProblem, step_generator, label: str) -> FlowTrajectory:
    a, g = problem.a0, GroupElement.identity(problem.a0.dim)
    samples = [FlowSample(0.0, a, g)]
    counters = {"substeps": 0, "reorthogonalizations": 0}
    grid = problem.t_grid
    for t_prev, t_next in zip(grid, grid[1:]):
        a, g = _advance(problem, a, g, t_next - t_prev, t_prev, step_generator, counters)
        samples.append(FlowSample(t_next, a, g))
    logger.info(f"{label} solve on gl({problem.a0.dim}): {len(samples)} samples, {counters['substeps']} sub-steps.")
    return FlowTrajectory(problem, tuple(samples), dict(counters))


def solve_factorized(problem: FlowProblem) -> FlowTrajectory:
    """a(t) = g_+(t)^{-1} a0 g_+(t), g_+ accumulated from exp(pi_+ chi(h a)) per sub-step."""
    spec, chi_tol = problem.spec, problem.tolerances.chi_tol

    def step(a, h):
        return chi_fixed_point(spec, a, h, tol=chi_tol)
    return _solve_by_substeps(problem, step, "Factorized")


def solve_magnus_series(problem: FlowProblem) -> FlowTrajectory:
    """Like solve_factorized, with chi(h a) replaced by the truncated Magnus series in h."""
    spec, order = problem.spec, problem.tolerances.magnus_order

    def step(a, h):
        return magnus_coefficients(spec, a, order).evaluate(h)
    return _solve_by_substeps(problem, step, f"Magnus (N={order})")


def _plus_operator(spec: SplittingSpec):
    n = spec.dim
    matrix = spec.coefficient_matrix(NUMERIC)

    def plus(m: np.ndarray) -> np.ndarray:
        return (matrix @ m.flatten(order="F")).reshape((n, n), order="F")
    return plus


def solve_rk4(problem: FlowProblem) -> FlowTrajectory:
    """Classical RK4 on (a, g) with a' = [a, pi_+ a] and g' = g pi_+(a)."""
    plus = _plus_operator(problem.spec)
    h_target = problem.tolerances.rk4_step

    def rhs(a, g):
        p = plus(a)
        return a @ p - p @ a, g @ p

    a = np.array(problem.a0.entries, dtype=float)
    g = np.eye(problem.a0.dim)
    samples = [FlowSample(0.0, problem.a0, GroupElement(g, NUMERIC))]
    steps = 0
    grid = problem.t_grid
    for t_prev, t_next in zip(grid, grid[1:]):
        span = t_next - t_prev
        count = max(1, math.ceil(span / h_target - 1e-9))
        h = span / count
        for k in range(count):
            k1a, k1g = rhs(a, g)
            k2a, k2g = rhs(a + 0.5 * h * k1a, g + 0.5 * h * k1g)
            k3a, k3g = rhs(a + 0.5 * h * k2a, g + 0.5 * h * k2g)
            k4a, k4g = rhs(a + h * k3a, g + h * k3g)
            a = a + (h / 6.0) * (k1a + 2.0 * k2a + 2.0 * k3a + k4a)
            g = g + (h / 6.0) * (k1g + 2.0 * k2g + 2.0 * k3g + k4g)
            if not (np.all(np.isfinite(a)) and np.all(np.isfinite(g))):
                t_fail = t_prev + (k + 1) * h
                raise FlowBlowUpError(f"RK4 state became non-finite at t={t_fail:.6g}.", time=t_fail)
        steps += count
        samples.append(FlowSample(t_next, LieElement(a, NUMERIC), GroupElement(g, NUMERIC)))
    logger.info(f"RK4 solve on gl({problem.a0.dim}): {len(samples)} samples, {steps} steps.")
    return FlowTrajectory(problem, tuple(samples), {"steps": steps})


SOLVERS = {
    FACTORIZED: solve_factorized,
    RK4: solve_rk4,
    MAGNUS_SERIES: solve_magnus_series,
}


def solve(problem: FlowProblem) -> FlowTrajectory:
    return SOLVERS[problem.method](problem)


def compare_trajectories(first: FlowTrajectory, second: FlowTrajectory) -> float:
    """Max Frobenius distance between states at shared sample times."""
    if first.times != second.times:
        raise FlowError("Trajectories are sampled on different grids.")
    return max((a.a - b.a).frobenius_norm() for a, b in zip(first.samples, second.samples))
