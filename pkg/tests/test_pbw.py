# tests/test_pbw.py - v0.1.0
from fractions import Fraction

import pytest

from enveloping.pbw import (
    EMPTY,
    U_G,
    U_GBAR,
    DegreeError,
    PBWAlgebra,
    PBWElement,
    TagMismatchError,
    antipode,
    antipode_axiom_residual,
    concat_product,
    coproduct,
    counit,
    exp_concat,
    exp_series,
    is_coassociative,
    pbw_normalize,
    power,
    split_positions,
)
from enveloping.structure import sl2_basis

E, H, F = 0, 1, 2


@pytest.fixture(scope="module")
def sl2():
    return PBWAlgebra(sl2_basis().structure_constants(), U_G)


def test_normalize_straightens_words(sl2):
    # f e = e f - h
    assert dict(sl2.normalize((F, E))) == {(E, F): 1, (H,): -1}
    # h e = e h + 2e
    assert dict(sl2.normalize((H, E))) == {(E, H): 1, (E,): 2}
    assert dict(sl2.normalize((E, H, F))) == {(E, H, F): 1}


def test_normalize_long_word(sl2):
    # f f e = e f f - h f - f h and f h = h f + 2f
    assert dict(sl2.normalize((F, F, E))) == {(E, F, F): 1, (H, F): -2, (F,): -2}


def test_split_positions_counts_subsets():
    pairs = list(split_positions((E, H, F)))
    assert len(pairs) == 8
    assert (EMPTY, (E, H, F)) in pairs
    assert ((E, F), (H,)) in pairs


def test_elements_track_filtration_degree(sl2):
    f, e = sl2.generator(F, 4), sl2.generator(E, 4)
    product = concat_product(f, e)
    assert set(product.components) == {2}
    assert product.degree_component(2) == {(E, F): 1, (H,): -1}
    assert product.max_degree() == 2
    assert product.term_count() == 2


def test_products_drop_terms_above_cap(sl2):
    x = sl2.monomial((E, F), 3)
    assert concat_product(x, x).is_zero()
    assert power(sl2.generator(H, 3), 3).equals(sl2.monomial((H, H, H), 3))
    assert power(sl2.generator(H, 3), 4).is_zero()


def test_invalid_components_rejected(sl2):
    with pytest.raises(DegreeError):
        PBWElement(sl2, 3, {1: {(F, E): Fraction(1)}})
    with pytest.raises(DegreeError):
        PBWElement(sl2, 3, {2: {(F, E): Fraction(1)}})
    with pytest.raises(DegreeError):
        pbw_normalize(sl2, (E, F, H), cap=2)
    with pytest.raises(DegreeError):
        sl2.monomial((E, F), 3, degree=1)


def test_algebras_do_not_mix(sl2):
    other = PBWAlgebra(sl2.sc, U_GBAR)
    with pytest.raises(TagMismatchError):
        sl2.one(2) + other.one(2)


def test_antipode_on_words(sl2):
    assert antipode(sl2.generator(E, 2)).equals(-sl2.generator(E, 2))
    # S(e f) = f e = e f - h
    expected = sl2.monomial((E, F), 2) - sl2.monomial((H,), 2, degree=2)
    assert antipode(sl2.monomial((E, F), 2)).equals(expected)


def test_counit_and_primitive_generators(sl2):
    x = sl2.one(3) * 5 + sl2.generator(H, 3)
    assert counit(x) == 5
    delta = coproduct(sl2.generator(H, 3))
    assert delta.components == {1: {(EMPTY, (H,)): 1, ((H,), EMPTY): 1}}


def test_hopf_axioms_on_random_element(sl2):
    x = (sl2.generator(E, 4) * Fraction(2, 3) + sl2.monomial((H, F), 4, -1)
         + sl2.monomial((E, H, F), 4, Fraction(1, 2)) + sl2.monomial((F, E, E), 4))
    left, right = antipode_axiom_residual(x)
    assert left.is_zero() and right.is_zero()
    assert is_coassociative(x)
    assert coproduct(x).equals(coproduct(x).swap())


def test_exp_concat_coefficients(sl2):
    x = exp_concat(sl2, {E: Fraction(2)}, 3)
    assert x.degree_component(0) == {EMPTY: 1}
    assert x.degree_component(1) == {(E,): 2}
    assert x.degree_component(2) == {(E, E): 2}
    assert x.degree_component(3) == {(E, E, E): Fraction(4, 3)}


def test_exp_concat_requires_lie_element(sl2):
    with pytest.raises(DegreeError):
        exp_series(sl2.monomial((E, F), 3), concat_product)


def test_to_dict_lists_labels(sl2):
    data = sl2.monomial((F, E), 2).to_dict()
    assert data["tag"] == U_G
    assert {"degree": 2, "word": ["e", "f"], "coeff": "1"} in data["terms"]
    assert {"degree": 2, "word": ["h"], "coeff": "-1"} in data["terms"]


def test_word_product_of_lie_vectors(sl2):
    product = sl2.word_product([{F: Fraction(1)}, {E: Fraction(1)}])
    assert product == {(E, F): 1, (H,): -1}
