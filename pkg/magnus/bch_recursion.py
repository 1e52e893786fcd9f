# magnus/bch_recursion.py - v0.1.0
import logging
from dataclasses import dataclass

from config import settings
from lie.algebra import (
    NUMERIC,
    BCHDomainError,
    LieAlgebraError,
    LieElement,
    ModeMismatchError,
    expm,
    logm,
)
from lie.splitting import SplittingSpec
from magnus.expansion import fit_slope, magnus_coefficients

logger = logging.getLogger(__name__)


class ChiConvergenceError(LieAlgebraError):
    """Fixed-point iteration for chi did not settle within max_iter."""
    def __init__(self, message, last_residual: float, iterations: int, errors=None):
        super().__init__(message, errors)
        self.last_residual = last_residual
        self.iterations = iterations


@dataclass(frozen=True, eq=False)
class ChiSolution:
    value: LieElement
    iterations: int
    step: float       # distance between the last two iterates
    residual: float   # ||c - (pi_+ c + log(exp(-pi_+ c) exp(tx)))||


def _update(spec: SplittingSpec, c: LieElement, target) -> LieElement:
    p = spec.plus(c)
    return p + logm(expm(-p) @ target)


def solve_chi(spec: SplittingSpec, x: LieElement, t: float = 1.0, tol: float | None = None,
              max_iter: int | None = None, initial: LieElement | None = None,
              radius: float | None = None) -> ChiSolution:
    """
    chi(tx) as the fixed point of c <- pi_+(c) + log(exp(-pi_+(c)) exp(tx)), started at tx.
    The limit gives exp(tx) = exp(pi_+ chi) exp(pi_- chi).
    """
    if x.mode != NUMERIC:
        raise ModeMismatchError("chi is computed in numeric mode only.")
    tol = settings.CHI_TOL if tol is None else tol
    max_iter = settings.CHI_MAX_ITER if max_iter is None else max_iter
    radius = settings.BCH_RADIUS if radius is None else radius

    tx = x * t
    size = tx.frobenius_norm()
    if size > radius:
        raise BCHDomainError(f"||tx||_F = {size:.3e} exceeds the BCH radius {radius:.3e}.")
    target = expm(tx)

    c = tx if initial is None else initial
    step = float("inf")
    for iteration in range(1, max_iter + 1):
        updated = _update(spec, c, target)
        step = (updated - c).frobenius_norm()
        c = updated
        if step <= tol:
            residual = (c - _update(spec, c, target)).frobenius_norm()
            logger.debug(f"chi converged after {iteration} iterations (step {step:.3e}).")
            return ChiSolution(c, iteration, step, residual)

    raise ChiConvergenceError(
        f"chi fixed point did not converge in {max_iter} iterations (last step {step:.3e}).",
        last_residual=step,
        iterations=max_iter,
    )


def chi_fixed_point(spec: SplittingSpec, x: LieElement, t: float = 1.0, tol: float | None = None,
                    max_iter: int | None = None) -> LieElement:
    return solve_chi(spec, x, t, tol=tol, max_iter=max_iter).value


def factorization_residual(spec: SplittingSpec, x: LieElement, t: float, chi_value: LieElement) -> float:
    """||exp(tx) - exp(pi_+ chi) exp(pi_- chi)||_F."""
    lhs = expm(x * t)
    rhs = expm(spec.plus(chi_value)) @ expm(spec.minus(chi_value))
    return lhs.distance(rhs)


def alternate_factorization_residual(spec: SplittingSpec, x: LieElement, t: float,
                                     tol: float | None = None) -> float:
    """||exp(tx) - exp(-pi_- chi(-tx)) exp(-pi_+ chi(-tx))||_F."""
    reverse = chi_fixed_point(spec, x, -t, tol=tol)
    rhs = expm(-spec.minus(reverse)) @ expm(-spec.plus(reverse))
    return expm(x * t).distance(rhs)


def uniqueness_gap(spec: SplittingSpec, x: LieElement, t: float, initial: LieElement,
                   tol: float | None = None) -> float:
    """Distance between the fixed points reached from tx and from another start guess."""
    first = solve_chi(spec, x, t, tol=tol).value
    second = solve_chi(spec, x, t, tol=tol, initial=initial).value
    return (first - second).frobenius_norm()


def series_errors(spec: SplittingSpec, x: LieElement, order: int, ts, tol: float | None = None) -> list[float]:
    """||sum_{n<=order} t^n Omega_n(x) - chi(tx)||_F for each t."""
    series = magnus_coefficients(spec, x, order)
    return [(series.evaluate(float(t)) - chi_fixed_point(spec, x, float(t), tol=tol)).frobenius_norm() for t in ts]


def series_error_slope(spec: SplittingSpec, x: LieElement, order: int, ts,
                       noise_floor: float = 5e-15, tol: float | None = None) -> float:
    """
    Log-log slope of the truncation error; expected order + 1.
    Points whose error sits below noise_floor are roundoff and left out of the fit.
    """
    ts = [float(t) for t in ts]
    errors = series_errors(spec, x, order, ts, tol=tol)
    kept = [(t, e) for t, e in zip(ts, errors) if e > noise_floor]
    if len(kept) < 3:
        raise LieAlgebraError(f"Only {len(kept)} error samples above the noise floor; cannot fit a slope.",
                              errors=errors)
    slope = fit_slope([t for t, _ in kept], [e for _, e in kept])
    logger.info(f"Magnus order {order}: error slope {slope:.3f} over {len(kept)} points.")
    return slope
