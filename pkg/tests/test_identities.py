# tests/test_identities.py - v0.1.0
import numpy as np
import pytest

from flow.identities import (
    StarIdentityReport,
    dexp_inverse_residual,
    double_bch,
    embed_double,
    factor_pair,
    read_double,
    star_group_product,
    star_identity_check,
)
from lie.algebra import GroupElement, bracket
from lie.splitting import SplittingSpec, double_bracket


def test_embedding_is_a_lie_morphism(kind, random_numeric):
    spec = SplittingSpec(3, kind)
    x, y = random_numeric(3), random_numeric(3)
    lhs = bracket(embed_double(spec, x), embed_double(spec, y))
    assert lhs.equals(embed_double(spec, double_bracket(spec, x, y)), tol=1e-12)
    assert read_double(spec, embed_double(spec, x)).equals(x, tol=1e-15)


def test_double_bch_of_commuting_parts(random_numeric):
    spec = SplittingSpec.lower_triangular(3)
    x = random_numeric(3, 0.2)
    assert double_bch(spec, x, x * 0.5).equals(x * 1.5, tol=1e-12)


def test_star_identities_hold(kind, rng, random_numeric):
    spec = SplittingSpec(3, kind)
    x, y = random_numeric(3, 1.0), random_numeric(3, 0.15)
    report = star_identity_check(spec, x, y, xi=rng.uniform(-1.0, 1.0, size=(3, 3)), t=0.1)
    assert set(report.residuals) == {"exp_minus_chi", "star_action", "group_product",
                                     "star_inverse", "star_inverse_factorization"}
    assert report.max_residual() <= 1e-10
    assert report.passed(1e-10)


def test_report_without_group_product(random_numeric):
    report = star_identity_check(SplittingSpec.qr_skew(2), random_numeric(2, 0.5))
    assert "group_product" not in report.residuals
    assert report.to_dict()["t"] == 0.1


def test_report_threshold():
    report = StarIdentityReport(0.1, {"a": 1e-12, "b": 1e-8})
    assert report.max_residual() == 1e-8
    assert not report.passed(1e-10)


def test_star_group_product_with_unit(kind, random_numeric):
    spec = SplittingSpec(3, kind)
    pair = factor_pair(spec, random_numeric(3, 0.5))
    unit = (GroupElement.identity(3), GroupElement.identity(3))
    assert star_group_product(pair, unit).distance(pair[0] @ pair[1]) <= 1e-14
    assert star_group_product(unit, pair).distance(pair[0] @ pair[1]) <= 1e-14


@pytest.mark.parametrize("order", [8, 12])
def test_dexp_inverse_undoes_dexp(kind, random_numeric, order):
    spec = SplittingSpec(3, kind)
    assert dexp_inverse_residual(spec, random_numeric(3, 0.05), random_numeric(3, 1.0), order) <= 1e-10


def test_dexp_inverse_needs_enough_terms(random_numeric):
    spec = SplittingSpec.qr_skew(3)
    x, y = random_numeric(3, 0.5), random_numeric(3, 1.0)
    assert dexp_inverse_residual(spec, x, y, 1) > dexp_inverse_residual(spec, x, y, 10)
