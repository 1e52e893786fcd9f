# flow/identities.py - v0.1.0
import logging
from dataclasses import dataclass, field

import numpy as np
import scipy.linalg

from lie.algebra import NUMERIC, GroupElement, LieElement, bch, expm
from lie.splitting import SplittingSpec
from magnus.bch_recursion import chi_fixed_point
from magnus.expansion import dexp_star_inv

logger = logging.getLogger(__name__)


def embed_double(spec: SplittingSpec, x: LieElement) -> LieElement:
    """x -> diag(pi_- x, -pi_+ x), a Lie morphism from the double bracket into gl(2n)."""
    n = spec.dim
    block = np.zeros((2 * n, 2 * n))
    block[:n, :n] = spec.minus(x).entries
    block[n:, n:] = -spec.plus(x).entries
    return LieElement(block, NUMERIC)


def read_double(spec: SplittingSpec, block: LieElement) -> LieElement:
    n = spec.dim
    return LieElement(block.entries[:n, :n] - block.entries[n:, n:], NUMERIC)


def double_bch(spec: SplittingSpec, a: LieElement, b: LieElement, radius: float | None = None) -> LieElement:
    """BCH for the double bracket, computed through the block embedding."""
    return read_double(spec, bch(embed_double(spec, a), embed_double(spec, b), radius))


def factor_pair(spec: SplittingSpec, v: LieElement) -> tuple[GroupElement, GroupElement]:
    """(exp(pi_- v), exp(pi_+ v)): the factors of exp*(v) in the matrix representation."""
    return expm(spec.minus(v)), expm(spec.plus(v))


def star_group_product(first: tuple, second: tuple) -> GroupElement:
    """(g_-, g_+) * (h_-, h_+) -> g_- h_- h_+ g_+."""
    g_minus, g_plus = first
    h_minus, h_plus = second
    return g_minus @ h_minus @ h_plus @ g_plus


@dataclass(frozen=True)
class StarIdentityReport:
    t: float
    residuals: dict = field(default_factory=dict)

    def max_residual(self) -> float:
        return max(self.residuals.values())

    def passed(self, tol: float) -> bool:
        return all(value <= tol for value in self.residuals.values())

    def to_dict(self) -> dict:
        return {"t": self.t, "residuals": dict(self.residuals)}


def exp_inverse_chi_residual(spec: SplittingSpec, a: LieElement, t: float, tol: float | None = None) -> float:
    """exp(-ta) against exp(-pi_- chi(ta)) exp(-pi_+ chi(ta))."""
    chi = chi_fixed_point(spec, a, t, tol=tol)
    rhs = expm(-spec.minus(chi)) @ expm(-spec.plus(chi))
    return expm(a * -t).distance(rhs)


def star_action_residual(spec: SplittingSpec, x: LieElement, xi: np.ndarray, t: float,
                         tol: float | None = None) -> float:
    """
    exp(tx) * xi evaluated as exp(tx) (exp*(-chi(-tx)) |> xi), against
    exp(-pi_- chi(-tx)) xi exp(-pi_+ chi(-tx)).
    """
    chi = chi_fixed_point(spec, x, -t, tol=tol)
    plus, minus = spec.plus(chi), spec.minus(chi)
    acted = expm(plus).entries @ xi @ expm(-plus).entries
    lhs = expm(x * t).entries @ acted
    rhs = expm(-minus).entries @ xi @ expm(-plus).entries
    return float(np.linalg.norm(lhs - rhs, "fro"))


def group_product_residual(spec: SplittingSpec, x: LieElement, y: LieElement, t: float,
                           tol: float | None = None) -> float:
    """
    exp(tx) * exp(y) = F(exp(-chi(-tx)) . exp(-chi(-y))) = exp(pi_- c) exp(pi_+ c) with c the
    double-bracket BCH of -chi(-tx) and -chi(-y); against exp(-pi_- chi(-tx)) exp(y) exp(-pi_+ chi(-tx)).
    """
    chi_x = chi_fixed_point(spec, x, -t, tol=tol)
    chi_y = chi_fixed_point(spec, y, -1.0, tol=tol)
    c = double_bch(spec, -chi_x, -chi_y)
    lhs = expm(spec.minus(c)) @ expm(spec.plus(c))
    rhs = expm(-spec.minus(chi_x)) @ expm(y) @ expm(-spec.plus(chi_x))
    return lhs.distance(rhs)


def star_inverse_residuals(spec: SplittingSpec, x: LieElement, t: float, tol: float | None = None) -> tuple[float, float]:
    """
    With exp(tx) = A_- A_+, A_+- = exp(-pi_+- chi(-tx)), the star inverse is
    exp(pi_- chi(-tx)) exp(pi_+ chi(-tx)); returns the identity defect of the star
    product and the factorization defect ||A_- A_+ - exp(tx)||.
    """
    chi = chi_fixed_point(spec, x, -t, tol=tol)
    element = (expm(-spec.minus(chi)), expm(-spec.plus(chi)))
    inverse = (expm(spec.minus(chi)), expm(spec.plus(chi)))
    identity = GroupElement.identity(spec.dim)
    product = star_group_product(element, inverse)
    factorization = (element[0] @ element[1]).distance(expm(x * t))
    return product.distance(identity), factorization


def star_identity_check(spec: SplittingSpec, x: LieElement, y: LieElement | None = None,
                        xi: np.ndarray | None = None, t: float = 0.1, tol: float | None = None) -> StarIdentityReport:
    """Residuals of the exp(-ta), exp(tx) * xi, exp(tx) * exp(y) and star-inverse identities."""
    n = spec.dim
    xi = np.eye(n) if xi is None else np.asarray(xi, dtype=float)
    residuals = {
        "exp_minus_chi": exp_inverse_chi_residual(spec, x, t, tol),
        "star_action": star_action_residual(spec, x, xi, t, tol),
    }
    if y is not None:
        residuals["group_product"] = group_product_residual(spec, x, y, t, tol)
    inverse, factorization = star_inverse_residuals(spec, x, t, tol)
    residuals["star_inverse"] = inverse
    residuals["star_inverse_factorization"] = factorization
    logger.debug(f"Star identities at t={t}: {residuals}")
    return StarIdentityReport(t, residuals)


def dexp_inverse_residual(spec: SplittingSpec, x: LieElement, y: LieElement, order: int) -> float:
    """
    dexp*^{-1}_x undoes the double-bracket dexp_x(y) = sum ad*_x^n(y)/(n+1)!, the latter read off the
    Frechet derivative of expm in the block embedding. Returns ||dexp*^{-1}_x(dexp_x(y)) - y||_F.
    """
    block_x = embed_double(spec, x).entries
    derivative = scipy.linalg.expm_frechet(block_x, embed_double(spec, y).entries, compute_expm=False)
    forward = read_double(spec, LieElement(derivative @ scipy.linalg.expm(-block_x), NUMERIC))
    return (dexp_star_inv(spec, x, forward, order) - y).frobenius_norm()
