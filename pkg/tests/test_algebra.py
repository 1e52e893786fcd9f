# tests/test_algebra.py - v0.1.0
from fractions import Fraction

import numpy as np
import pytest

from lie.algebra import (
    EXACT,
    NUMERIC,
    BCHDomainError,
    BranchError,
    DimensionMismatchError,
    GroupElement,
    LieElement,
    ModeMismatchError,
    SingularGroupElementError,
    ad_power,
    adjoint,
    bch,
    bch_series,
    bracket,
    expm,
    logm,
    unvectorize,
    vectorize,
)


def test_from_rows_detects_exact_mode():
    a = LieElement.from_rows([["1/2", 0], [3, "-2/3"]])
    assert a.mode == EXACT
    assert a.entries[0, 0] == Fraction(1, 2)
    assert a.entries[1, 1] == Fraction(-2, 3)


def test_from_rows_numeric_by_default():
    a = LieElement.from_rows([[0.5, 1.0], [2.0, 3.0]])
    assert a.mode == NUMERIC


def test_bracket_is_exact_and_antisymmetric(random_exact):
    a, b = random_exact(3), random_exact(3)
    assert (bracket(a, b) + bracket(b, a)).is_zero()
    assert bracket(a, a).is_zero()


def test_bracket_of_matrix_units():
    e12 = LieElement.matrix_unit(2, 0, 1, EXACT)
    e21 = LieElement.matrix_unit(2, 1, 0, EXACT)
    h = LieElement.from_rows([[1, 0], [0, -1]], EXACT)
    assert bracket(e12, e21).equals(h)


def test_ad_power_and_adjoint(random_exact):
    a, b = random_exact(3), random_exact(3)
    assert ad_power(a, b, 0).equals(b)
    assert ad_power(a, b, 2).equals(adjoint(a)(adjoint(a)(b)))


def test_mixing_modes_or_sizes_raises():
    a = LieElement.zeros(2, EXACT)
    with pytest.raises(ModeMismatchError):
        a + LieElement.zeros(2, NUMERIC)
    with pytest.raises(DimensionMismatchError):
        a + LieElement.zeros(3, EXACT)
    with pytest.raises(ModeMismatchError):
        a * 0.5


def test_non_square_entries_rejected():
    with pytest.raises(DimensionMismatchError):
        LieElement(np.zeros((2, 3)), NUMERIC)


def test_vectorize_is_column_major():
    a = LieElement([[1.0, 2.0], [3.0, 4.0]], NUMERIC)
    assert list(vectorize(a)) == [1.0, 3.0, 2.0, 4.0]
    assert unvectorize(vectorize(a), 2, NUMERIC).equals(a)


def test_exact_and_numeric_conversion(random_exact):
    a = random_exact(3)
    assert a.to_numeric().to_exact().equals(a)
    assert a.frobenius_norm() == pytest.approx(a.to_numeric().frobenius_norm())


@pytest.mark.parametrize("dim", [2, 3, 4, 5, 6])
def test_expm_logm_inverse_near_identity(random_numeric, dim):
    a = random_numeric(dim, 0.3)
    assert logm(expm(a)).equals(a, tol=1e-12)


def test_logm_refuses_negative_real_eigenvalues():
    with pytest.raises(BranchError):
        logm(GroupElement([[-1.0, 0.0], [0.0, 1.0]], NUMERIC))


def test_exponentials_are_numeric_only():
    with pytest.raises(ModeMismatchError):
        expm(LieElement.zeros(2, EXACT))


def test_singular_group_element_rejected():
    with pytest.raises(SingularGroupElementError):
        GroupElement([[1.0, 2.0], [2.0, 4.0]], NUMERIC)
    with pytest.raises(SingularGroupElementError):
        GroupElement([[1, 2], [2, 4]], EXACT)


def test_group_inverse_and_conjugation_exact():
    g = GroupElement([[1, 1], [0, 1]], EXACT)
    a = LieElement.from_rows([[0, 1], [1, 0]], EXACT)
    assert (g @ g.inverse()).distance(GroupElement.identity(2, EXACT)) == 0.0
    expected = LieElement.from_rows([[-1, 0], [1, 1]], EXACT)
    assert g.conjugate(a).equals(expected)


def test_bch_matches_truncated_series(random_numeric):
    a, b = random_numeric(3, 0.01), random_numeric(3, 0.01)
    assert bch(a, b).equals(bch_series(a, b, 4), tol=1e-9)


def test_bch_is_associative_through_the_exponential(random_numeric):
    a, b, c = random_numeric(3, 0.1), random_numeric(3, 0.1), random_numeric(3, 0.1)
    lhs = expm(bch(a, bch(b, c)))
    assert lhs.distance(expm(a) @ expm(b) @ expm(c)) <= 1e-12


def test_logm_is_reproducible(random_numeric):
    g = expm(random_numeric(5, 0.4))
    assert np.array_equal(logm(g).entries, logm(g).entries)


def test_shrinking_group_elements_are_not_singular():
    g = GroupElement(np.eye(3) * 1e-6, NUMERIC)
    assert (g @ g).dim == 3
    with pytest.raises(SingularGroupElementError):
        GroupElement([[1.0, 1.0], [1.0, 1.0 + 1e-14]], NUMERIC)


def test_bch_outside_radius_raises(random_numeric):
    a, b = random_numeric(3, 0.4), random_numeric(3, 0.4)
    with pytest.raises(BCHDomainError):
        bch(a, b)


def test_bch_series_rejects_high_order(random_numeric):
    with pytest.raises(ValueError):
        bch_series(random_numeric(2), random_numeric(2), 5)
