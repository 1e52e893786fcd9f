# core/orchestrator.py - v0.1.0
import asyncio
import logging
import threading
import time
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from fractions import Fraction

import numpy as np

from config import settings
from enveloping.pbw import antipode_axiom_residual, coproduct, is_coassociative
from enveloping.postlie import (
    PostLieAlgebra,
    ad_exp_residual,
    composition_residual,
    exp_star,
    f_exponential_residual,
    f_morphism_residual,
    hopf_residual,
    represent_residual,
    split_exponential,
    star_factorization_residual,
    star_product,
)
from enveloping.structure import RationalSplitting, catalog
from flow.diagnostics import summarize
from flow.identities import dexp_inverse_residual, star_identity_check
from flow.solver import FACTORIZED, MAGNUS_SERIES, RK4, FlowProblem, FlowTolerances, compare_trajectories, solve
from lie.algebra import EXACT, NUMERIC, LieElement, expm
from lie.splitting import (
    LOWER_TRIANGULAR,
    QR_SKEW,
    SplittingSpec,
    black_post_lie_residuals,
    double_jacobi_residual,
    half_diagonal_spec,
    post_lie,
    post_lie_axiom_residuals,
    random_pairs,
    random_samples,
    subalgebra_relation_residuals,
    succ_associator_residual,
    validate_splitting,
)
from magnus.bch_recursion import (
    alternate_factorization_residual,
    factorization_residual,
    series_error_slope,
    solve_chi,
    uniqueness_gap,
)
from magnus.expansion import chi_printed_terms, magnus_coefficients, projector_remark_residual
from utils.helpers import make_rng, random_rational

logger = logging.getLogger(__name__)

SUITES = ("postlie", "chi", "magnus", "hopf", "star")
PRESETS = ("toda5", "qrflow4", "triangular3")
HALF_DIAGONAL = "half_diagonal"

TODA_DIAGONAL = (0.4, -0.2, 0.1, 0.3, -0.5)
TODA_OFF_DIAGONAL = (0.6, 0.5, 0.4, 0.7)

SPLITTING_BUILDERS = {
    LOWER_TRIANGULAR: SplittingSpec.lower_triangular,
    QR_SKEW: SplittingSpec.qr_skew,
    HALF_DIAGONAL: half_diagonal_spec,
}


@dataclass(frozen=True)
class CheckResult:
    suite: str
    name: str
    passed: bool
    residual: float | None = None
    tol: float | None = None
    detail: dict = field(default_factory=dict)

    def to_dict(self) -> dict:
        return {
            "suite": self.suite,
            "name": self.name,
            "passed": self.passed,
            "residual": self.residual,
            "tol": self.tol,
            "detail": self.detail,
        }


def _scaled(a: LieElement, norm: float) -> LieElement:
    return a * (norm / a.frobenius_norm())


def random_element(rng, dim: int, norm: float | None = None) -> LieElement:
    """Uniform entries in [-1, 1], optionally rescaled to a Frobenius norm."""
    a = LieElement(rng.uniform(-1.0, 1.0, size=(dim, dim)), NUMERIC)
    return a if norm is None else _scaled(a, norm)


def random_vector(rng, dim: int, max_den: int = 4) -> dict:
    """Sparse rational coordinate vector, never empty."""
    vector = {k: random_rational(rng, -2, 2, max_den) for k in range(dim)}
    return {k: c for k, c in vector.items() if c != 0} or {0: Fraction(1)}


def uniform_grid(stop: float, step: float) -> tuple:
    count = int(round(stop / step))
    return tuple(k * step for k in range(count + 1))


def preset_problem(name: str, seed: int | None = None, method: str = FACTORIZED,
                   tolerances: FlowTolerances | None = None, step: float = 0.1) -> FlowProblem:
    """
    toda5:       symmetric tridiagonal 5x5 under qr_skew
    qrflow4:     seeded random symmetric gl(4) with norm 1.5 under qr_skew
    triangular3: seeded random gl(3) with norm 1 under lower_triangular
    All sampled on [0, 2].
    """
    seed = settings.SEED if seed is None else seed
    tolerances = tolerances or FlowTolerances()
    grid = uniform_grid(2.0, step)
    if name == "toda5":
        a0 = np.diag(TODA_DIAGONAL) + np.diag(TODA_OFF_DIAGONAL, 1) + np.diag(TODA_OFF_DIAGONAL, -1)
        return FlowProblem(SplittingSpec.qr_skew(5), LieElement(a0, NUMERIC), grid, method, tolerances)
    rng = make_rng(seed)
    if name == "qrflow4":
        m = rng.uniform(-1.0, 1.0, size=(4, 4))
        a0 = _scaled(LieElement((m + m.T) / 2.0, NUMERIC), 1.5)
        return FlowProblem(SplittingSpec.qr_skew(4), a0, grid, method, tolerances)
    if name == "triangular3":
        return FlowProblem(SplittingSpec.lower_triangular(3), random_element(rng, 3, 1.0), grid, method, tolerances)
    raise ValueError(f"Unknown preset '{name}'. Available: {', '.join(PRESETS)}")


class Orchestrator:
    """
    Builds the verification suites as independent checks and runs them on a
    thread pool; results come back in declaration order. Every check draws its
    random data from seed + a fixed per-check offset.
    """
    def __init__(self, seed: int | None = None, threads: int | None = None, tol: float | None = None,
                 order: int | None = None, degree: int | None = None, algebra: str | None = None):
        self.seed = settings.SEED if seed is None else seed
        self.threads = settings.THREADS if threads is None else max(1, threads)
        self.tol = tol
        self.order = order
        self.degree = degree
        self.algebra = algebra or "sl2"
        self._post_lie = {}
        self._lock = threading.Lock()
        logger.info(f"Orchestrator initialized (seed={self.seed}, threads={self.threads}).")

    def _rng(self, offset: int):
        return make_rng(self.seed + offset)

    def _tol(self, default: float) -> float:
        return default if self.tol is None else self.tol

    def post_lie_algebra(self, algebra: str, splitting: str) -> PostLieAlgebra:
        key = (algebra, splitting)
        with self._lock:
            if key not in self._post_lie:
                basis = catalog(algebra)
                spec = SPLITTING_BUILDERS[splitting](basis.matrix_dim)
                self._post_lie[key] = PostLieAlgebra(RationalSplitting.from_spec(spec, basis))
            return self._post_lie[key]

    # postlie

    def _certify(self, kind: str, n: int, offset: int) -> CheckResult:
        tol = self._tol(1e-12)
        spec = SPLITTING_BUILDERS[kind](n)
        report = validate_splitting(spec, random_pairs(n, 100, self._rng(offset)), tol=tol, seed=self.seed + offset)
        return CheckResult("postlie", f"r_matrix/{kind}/gl{n}", report.validated, max(report.residuals.values()),
                           tol, report.to_dict())

    def _axioms(self, kind: str, n: int, offset: int) -> CheckResult:
        tol = self._tol(1e-12)
        spec = SPLITTING_BUILDERS[kind](n)
        samples = random_samples(n, 300, self._rng(offset))
        triples = list(zip(samples[0::3], samples[1::3], samples[2::3]))
        worst = dict.fromkeys(("post_lie_1", "post_lie_2", "black_1", "black_2", "double_jacobi",
                               "subalgebra_minus", "subalgebra_plus", "succ_associator"), 0.0)
        for x, y, z in triples:
            values = dict(zip(("post_lie_1", "post_lie_2"), post_lie_axiom_residuals(spec, x, y, z)))
            values.update(zip(("black_1", "black_2"), black_post_lie_residuals(spec, x, y, z)))
            values["double_jacobi"] = double_jacobi_residual(spec, x, y, z)
            values.update(zip(("subalgebra_minus", "subalgebra_plus"), subalgebra_relation_residuals(spec, x, y)))
            values["succ_associator"] = succ_associator_residual(spec, x, y, z)
            for name, value in values.items():
                worst[name] = max(worst[name], value)
        residual = max(worst.values())
        return CheckResult("postlie", f"axioms/{kind}/gl{n}", residual <= tol, residual, tol,
                           {"triples": len(triples), "residuals": worst})

    def postlie_checks(self) -> list:
        checks = []
        offset = 0
        for kind in (LOWER_TRIANGULAR, QR_SKEW):
            for n in range(2, 7):
                checks.append(("postlie", self._certify, kind, n, offset))
                checks.append(("postlie", self._axioms, kind, n, offset + 1))
                offset += 2
        checks.append(("postlie", self._certify, HALF_DIAGONAL, 3, offset))
        checks.append(("postlie", self._axioms, HALF_DIAGONAL, 3, offset + 1))
        return checks

    # chi

    def _factorization(self, kind: str, offset: int) -> CheckResult:
        tol = self._tol(1e-10)
        spec = SplittingSpec(4, kind)
        x = random_element(self._rng(offset), 4, 1.0)
        solution = solve_chi(spec, x, 0.2, tol=1e-14)
        residual = factorization_residual(spec, x, 0.2, solution.value)
        alternate = alternate_factorization_residual(spec, x, 0.2, tol=1e-14)
        start = solution.value + random_element(self._rng(offset + 1000), 4, 0.01)
        gap = uniqueness_gap(spec, x, 0.2, start, tol=1e-14)
        worst = max(residual, alternate, gap)
        return CheckResult("chi", f"factorization/{kind}/gl4", worst <= tol and solution.iterations <= 30, worst, tol, {
            "iterations": solution.iterations,
            "factorization": residual,
            "alternate_factorization": alternate,
            "uniqueness_gap": gap,
        })

    def _printed_exact(self, offset: int) -> CheckResult:
        rng = self._rng(offset)
        spec = SplittingSpec.lower_triangular(2)
        p, q, r = (random_rational(rng, -2, 2, 3) for _ in range(3))
        a0 = LieElement([[p, q], [r, -p]], EXACT)
        series = magnus_coefficients(spec, a0, 3)
        printed = chi_printed_terms(spec, a0, 3)
        exact = all(series.coefficient(n).equals(printed[n - 1]) for n in (1, 2, 3))
        return CheckResult("chi", "printed_terms/exact/sl2", exact, 0.0 if exact else None, 0.0,
                           {"a0": [[str(v) for v in row] for row in a0.entries.tolist()]})

    def _printed_numeric(self, offset: int) -> CheckResult:
        tol = self._tol(1e-13)
        spec = SplittingSpec.lower_triangular(3)
        a0 = random_element(self._rng(offset), 3)
        series = magnus_coefficients(spec, a0, 3)
        printed = chi_printed_terms(spec, a0, 3)
        residual = max((series.coefficient(n) - printed[n - 1]).frobenius_norm() for n in (1, 2, 3))
        return CheckResult("chi", "printed_terms/numeric/gl3", residual <= tol, residual, tol)

    def _projector_remark(self, kind: str, offset: int) -> CheckResult:
        tol = self._tol(1e-12)
        spec = SplittingSpec(3, kind)
        series = magnus_coefficients(spec, random_element(self._rng(offset), 3), 4)
        words = [(1,), (2,), (1, 1), (2, 1), (1, 3), (2, 1, 1)]
        residual = max(projector_remark_residual(spec, series, ks) for ks in words)
        return CheckResult("chi", f"projector_remark/{kind}/gl3", residual <= tol, residual, tol)

    def _slope(self, kind: str, order: int, offset: int) -> CheckResult:
        tol = 0.3
        spec = SplittingSpec(3, kind)
        x = random_element(self._rng(offset), 3, 2.0 if order <= 4 else 3.0)
        slope = series_error_slope(spec, x, order, [2.0 ** -k for k in range(3, 9)])
        gap = abs(slope - (order + 1))
        return CheckResult("chi", f"omega_vs_chi/{kind}/order{order}", gap <= tol, gap, tol, {"slope": slope})

    def chi_checks(self) -> list:
        orders = (self.order,) if self.order else (4, 6)
        slopes = [(kind, order) for order in orders for kind in (LOWER_TRIANGULAR, QR_SKEW)]
        return [
            ("chi", self._factorization, LOWER_TRIANGULAR, 100),
            ("chi", self._factorization, QR_SKEW, 101),
            ("chi", self._printed_exact, 102),
            ("chi", self._printed_numeric, 103),
            ("chi", self._projector_remark, LOWER_TRIANGULAR, 104),
            ("chi", self._projector_remark, QR_SKEW, 105),
        ] + [("chi", self._slope, kind, order, 110 + k) for k, (kind, order) in enumerate(slopes)]

    # magnus

    def _omega_two(self, offset: int) -> CheckResult:
        rng = self._rng(offset)
        spec = SplittingSpec.qr_skew(3)
        a0 = LieElement([[random_rational(rng) for _ in range(3)] for _ in range(3)], EXACT)
        series = magnus_coefficients(spec, a0, 4)
        ok = series.coefficient(1).equals(a0) and series.coefficient(2).equals(post_lie(spec, a0, a0) * Fraction(1, 2))
        return CheckResult("magnus", "omega_1_2/exact/gl3", ok, 0.0 if ok else None, 0.0)

    def _dexp(self, kind: str, offset: int) -> CheckResult:
        tol = self._tol(1e-10)
        order = self.order or settings.MAGNUS_ORDER
        spec = SplittingSpec(3, kind)
        rng = self._rng(offset)
        x, y = random_element(rng, 3, 0.05), random_element(rng, 3, 1.0)
        residual = dexp_inverse_residual(spec, x, y, order)
        return CheckResult("magnus", f"dexp_inverse/{kind}/order{order}", residual <= tol, residual, tol)

    def _magnus_flow(self, offset: int) -> CheckResult:
        tol = self._tol(1e-6)
        problem = preset_problem("triangular3", self.seed + offset)
        reference = solve(problem)
        series = solve(problem.with_method(MAGNUS_SERIES, substep_norm_cap=0.1,
                                           magnus_order=self.order or settings.MAGNUS_ORDER))
        residual = compare_trajectories(reference, series)
        return CheckResult("magnus", "magnus_series_vs_factorized/triangular3", residual <= tol, residual, tol)

    def _toda(self, offset: int) -> CheckResult:
        tol = self._tol(1e-7)
        problem = preset_problem("toda5")
        trajectory = solve(problem)
        summary = summarize(trajectory)
        rk4_gap = compare_trajectories(trajectory, solve(problem.with_method(RK4, rk4_step=1e-4)))
        detail = {
            "max_drift": summary["max_drift"],
            "max_symmetry_defect": summary["max_symmetry_defect"],
            "max_lax_defect": summary["max_lax_defect"],
            "rk4_gap": rk4_gap,
        }
        passed = summary["max_drift"] <= 1e-10 and summary["max_symmetry_defect"] <= 1e-11 and rk4_gap <= tol
        return CheckResult("magnus", "toda5/factorized_vs_rk4", passed, rk4_gap, tol, detail)

    def magnus_checks(self) -> list:
        return [
            ("magnus", self._omega_two, 200),
            ("magnus", self._dexp, LOWER_TRIANGULAR, 201),
            ("magnus", self._dexp, QR_SKEW, 202),
            ("magnus", self._magnus_flow, 203),
            ("magnus", self._toda, 204),
        ]

    # hopf

    def _star_factorization(self, splitting: str, offset: int) -> CheckResult:
        degree = self.degree or 6
        post = self.post_lie_algebra(self.algebra, splitting)
        rng = self._rng(offset)
        failures = []
        for k in range(5):
            residual = star_factorization_residual(post, random_vector(rng, post.sc.dim), degree)
            if not residual.is_zero():
                failures.append({"sample": k, "degrees": sorted(residual.components)})
        hypothesis = "projector" if post.splitting.is_projector() else "non-projector"
        return CheckResult("hopf", f"star_factorization/{splitting}/{self.algebra}/deg{degree}", not failures,
                           0.0 if not failures else None, 0.0, {"hypothesis": hypothesis, "failures": failures})

    def _f_morphism(self, algebra: str, offset: int) -> CheckResult:
        post = self.post_lie_algebra(algebra, LOWER_TRIANGULAR)
        rng = self._rng(offset)
        failures = []
        for k in range(20):
            letters = [{int(rng.integers(0, post.sc.dim)): Fraction(1)} for _ in range(int(rng.integers(1, 5)))]
            if not f_morphism_residual(post, letters, 4).is_zero():
                failures.append(k)
        exponential = f_exponential_residual(post, random_vector(rng, post.sc.dim), min(self.degree or 5, 5)).is_zero()
        passed = not failures and exponential
        return CheckResult("hopf", f"f_morphism/{algebra}", passed, 0.0 if passed else None, 0.0,
                           {"failed_monomials": failures, "exponential": exponential})

    def _random_pbw(self, post: PostLieAlgebra, rng, cap: int):
        algebra = post.algebra
        out = algebra.lie_element(random_vector(rng, post.sc.dim, 3), cap)
        for _ in range(2):
            word = sorted(int(k) for k in rng.integers(0, post.sc.dim, size=2))
            out = out + algebra.monomial(word, cap, random_rational(rng, -2, 2, 3))
        return out

    def _hopf_structure(self, offset: int) -> CheckResult:
        post = self.post_lie_algebra(self.algebra, LOWER_TRIANGULAR)
        rng = self._rng(offset)
        a, b, c = (self._random_pbw(post, rng, 3) for _ in range(3))
        one = post.algebra.one(3)
        results = {
            "coproduct_star": hopf_residual(post, a, b).is_zero(),
            "star_associative": (star_product(post, star_product(post, a, b), c)
                                 - star_product(post, a, star_product(post, b, c))).is_zero(),
            "star_unit": star_product(post, one, a).equals(a) and star_product(post, a, one).equals(a),
            "composition": composition_residual(post, a, b, c).is_zero(),
            "antipode": all(r.is_zero() for r in antipode_axiom_residual(a)),
            "coassociative": is_coassociative(a),
            "cocommutative": coproduct(a).equals(coproduct(a).swap()),
        }
        passed = all(results.values())
        return CheckResult("hopf", f"hopf_structure/{self.algebra}/deg3", passed, 0.0 if passed else None, 0.0, results)

    def _representation(self, offset: int) -> CheckResult:
        tol = self._tol(1e-10)
        cap = 10
        post = self.post_lie_algebra(self.algebra, LOWER_TRIANGULAR)
        basis = catalog(self.algebra)
        rng = self._rng(offset)
        vector = {k: c / 8 for k, c in random_vector(rng, post.sc.dim, 2).items()}
        w = random_vector(rng, post.sc.dim, 2)
        minus = basis.element(post.splitting.minus(vector)).to_numeric()
        plus = basis.element(post.splitting.plus(vector)).to_numeric()
        target = (expm(minus) @ expm(plus)).entries
        residuals = {
            "exp_star": represent_residual(basis, exp_star(post, vector, cap), target),
            "split_exponential": represent_residual(basis, split_exponential(post, vector, cap), target),
            "ad_exp": ad_exp_residual(post, basis, vector, w, cap),
        }
        residual = max(residuals.values())
        return CheckResult("hopf", f"representation/{self.algebra}", residual <= tol, residual, tol, residuals)

    def hopf_checks(self) -> list:
        return [
            ("hopf", self._star_factorization, LOWER_TRIANGULAR, 300),
            ("hopf", self._star_factorization, QR_SKEW, 301),
            ("hopf", self._star_factorization, HALF_DIAGONAL, 302),
            ("hopf", self._f_morphism, "sl2", 303),
            ("hopf", self._f_morphism, "gl2", 304),
            ("hopf", self._hopf_structure, 305),
            ("hopf", self._representation, 306),
        ]

    # star

    def _star_identities(self, kind: str, offset: int) -> CheckResult:
        tol = self._tol(1e-10)
        spec = SplittingSpec(3, kind)
        rng = self._rng(offset)
        x = random_element(rng, 3, 1.0)
        y = random_element(rng, 3, 0.15)
        xi = random_element(rng, 3).entries
        report = star_identity_check(spec, x, y=y, xi=xi, t=0.1)
        residual = report.max_residual()
        return CheckResult("star", f"star_identities/{kind}/gl3", report.passed(tol), residual, tol, report.to_dict())

    def star_checks(self) -> list:
        return [("star", self._star_identities, LOWER_TRIANGULAR, 400), ("star", self._star_identities, QR_SKEW, 401)]

    # running

    def checks_for(self, suite: str) -> list:
        if suite == "all":
            return [check for name in SUITES for check in self.checks_for(name)]
        builders = {
            "postlie": self.postlie_checks,
            "chi": self.chi_checks,
            "magnus": self.magnus_checks,
            "hopf": self.hopf_checks,
            "star": self.star_checks,
        }
        if suite not in builders:
            raise ValueError(f"Unknown suite '{suite}'. Available: {', '.join(SUITES)}, all")
        return builders[suite]()

    def _guarded(self, check) -> CheckResult:
        suite, function, *args = check
        started = time.perf_counter()
        try:
            result = function(*args)
        except Exception as e:
            logger.exception(f"Check {function.__name__}{tuple(args)} raised: {e}")
            name = "/".join([function.__name__.lstrip("_")] + [str(a) for a in args])
            result = CheckResult(suite, name, False, None, None, {"error": f"{type(e).__name__}: {e}"})
        logger.info(f"{result.name}: {'pass' if result.passed else 'FAIL'} ({time.perf_counter() - started:.2f}s)")
        return result

    async def _run_async(self, checks: list) -> list[CheckResult]:
        loop = asyncio.get_running_loop()
        with ThreadPoolExecutor(max_workers=self.threads) as executor:
            futures = [loop.run_in_executor(executor, self._guarded, check) for check in checks]
            return list(await asyncio.gather(*futures))

    def run_checks(self, checks: list) -> list[CheckResult]:
        return asyncio.run(self._run_async(checks))

    def verify(self, suite: str) -> dict:
        results = self.run_checks(self.checks_for(suite))
        logger.info(f"Suite '{suite}': {sum(r.passed for r in results)}/{len(results)} checks passed.")
        return {
            "suite": suite,
            "seed": self.seed,
            "algebra": self.algebra,
            "order": self.order,
            "degree": self.degree,
            "passed": all(r.passed for r in results),
            "checks": [r.to_dict() for r in results],
        }
