# tests/test_bch_recursion.py - v0.1.0
import numpy as np
import pytest

from lie.algebra import EXACT, NUMERIC, BCHDomainError, LieElement, ModeMismatchError
from lie.splitting import LOWER_TRIANGULAR, QR_SKEW, SplittingSpec
from magnus.bch_recursion import (
    ChiConvergenceError,
    alternate_factorization_residual,
    chi_fixed_point,
    factorization_residual,
    series_error_slope,
    series_errors,
    solve_chi,
    uniqueness_gap,
)


def test_chi_is_linear_on_plus_part():
    spec = SplittingSpec.lower_triangular(3)
    x = LieElement(np.tril(np.arange(1.0, 10.0).reshape(3, 3)) / 10.0, NUMERIC)
    solution = solve_chi(spec, x, 0.2)
    assert solution.iterations == 1
    assert solution.value.equals(x * 0.2, tol=1e-14)


def test_chi_is_linear_on_minus_part():
    spec = SplittingSpec.lower_triangular(3)
    x = LieElement(np.triu(np.ones((3, 3)), 1) / 4.0, NUMERIC)
    assert chi_fixed_point(spec, x, 0.3).equals(x * 0.3, tol=1e-14)


def test_chi_second_order_term_on_gl2():
    spec = SplittingSpec.lower_triangular(2)
    x = LieElement([[0.0, 1.0], [1.0, 0.0]], NUMERIC)
    t = 0.01
    expected = x * t + LieElement(np.diag([0.5, -0.5]), NUMERIC) * t ** 2
    assert (chi_fixed_point(spec, x, t) - expected).frobenius_norm() <= 1e-5


def test_factorization_on_gl4(kind, random_numeric):
    spec = SplittingSpec(4, kind)
    x = random_numeric(4, 1.0)
    solution = solve_chi(spec, x, 0.2, tol=1e-14)
    assert solution.iterations <= 30
    assert solution.residual <= 1e-12
    assert factorization_residual(spec, x, 0.2, solution.value) <= 1e-10


def test_alternate_factorization(kind, random_numeric):
    spec = SplittingSpec(4, kind)
    assert alternate_factorization_residual(spec, random_numeric(4, 1.0), 0.2) <= 1e-10


def test_fixed_point_is_unique_near_tx(kind, random_numeric):
    spec = SplittingSpec(3, kind)
    x = random_numeric(3, 1.0)
    start = chi_fixed_point(spec, x, 0.2) + random_numeric(3, 0.01)
    assert uniqueness_gap(spec, x, 0.2, start) <= 1e-12


def test_radius_violation(random_numeric):
    with pytest.raises(BCHDomainError):
        solve_chi(SplittingSpec.qr_skew(3), random_numeric(3, 2.0), 1.0)


def test_non_convergence_reports_last_step(random_numeric):
    with pytest.raises(ChiConvergenceError) as info:
        solve_chi(SplittingSpec.qr_skew(3), random_numeric(3, 1.0), 0.3, max_iter=1)
    assert info.value.iterations == 1
    assert info.value.last_residual > 0.0


def test_exact_input_rejected():
    with pytest.raises(ModeMismatchError):
        solve_chi(SplittingSpec.lower_triangular(2), LieElement.zeros(2, EXACT), 0.1)


def test_truncated_series_error_shrinks(random_numeric):
    spec = SplittingSpec.lower_triangular(3)
    errors = series_errors(spec, random_numeric(3, 1.0), 3, [0.2, 0.1])
    assert errors[1] < errors[0] / 8.0


@pytest.mark.parametrize("kind,order,norm", [
    (LOWER_TRIANGULAR, 4, 2.0),
    (QR_SKEW, 4, 2.0),
    (LOWER_TRIANGULAR, 6, 3.0),
    (QR_SKEW, 6, 3.0),
])
def test_series_error_slope_matches_order(kind, order, norm, random_numeric):
    spec = SplittingSpec(3, kind)
    ts = [2.0 ** -k for k in range(3, 9)]
    slope = series_error_slope(spec, random_numeric(3, norm), order, ts)
    assert slope == pytest.approx(order + 1, abs=0.3)
