# magnus/expansion.py - v0.1.0
import logging
from dataclasses import dataclass
from fractions import Fraction
from math import factorial

import numpy as np
import sympy

from config import settings
from lie.algebra import EXACT, LieAlgebraError, LieElement, bracket
from lie.splitting import SplittingSpec, double_bracket, post_lie
from utils.helpers import format_sci

logger = logging.getLogger(__name__)


class SeriesOrderError(LieAlgebraError):
    pass


@dataclass(frozen=True)
class BernoulliTable:
    """B_0..B_N with B_1 = -1/2, the convention of ad/(exp(ad) - 1)."""
    values: tuple

    @classmethod
    def build(cls, order: int) -> "BernoulliTable":
        values = []
        for n in range(order + 1):
            if n == 1:
                values.append(Fraction(-1, 2))
                continue
            b = sympy.bernoulli(n)
            values.append(Fraction(int(b.p), int(b.q)))
        return cls(tuple(values))

    def __getitem__(self, n: int) -> Fraction:
        return self.values[n]

    def __len__(self) -> int:
        return len(self.values)


@dataclass(frozen=True, eq=False)
class GradedSeries:
    """Truncated series sum_{n=1}^{order} t^n c_n with Lie-algebra coefficients."""
    order: int
    coefficients: tuple
    base_point: LieElement
    spec: SplittingSpec

    def __post_init__(self):
        if len(self.coefficients) != self.order:
            raise SeriesOrderError(f"Expected {self.order} coefficients, got {len(self.coefficients)}.")

    def coefficient(self, n: int) -> LieElement:
        return self.coefficients[n - 1]

    def _terms(self, t):
        coefficients = self.coefficients
        if isinstance(t, float) and self.base_point.mode == EXACT:
            coefficients = tuple(c.to_numeric() for c in coefficients)
        return coefficients

    def evaluate(self, t) -> LieElement:
        coefficients = self._terms(t)
        out = LieElement.zeros(self.base_point.dim, coefficients[0].mode)
        power = t
        for c in coefficients:
            out = out + c * power
            power = power * t
        return out

    def derivative(self, t) -> LieElement:
        coefficients = self._terms(t)
        out = LieElement.zeros(self.base_point.dim, coefficients[0].mode)
        for n, c in enumerate(coefficients, start=1):
            out = out + c * (n * t ** (n - 1))
        return out

    def to_dict(self) -> dict:
        def rows(c):
            if c.mode == EXACT:
                return [[str(v) for v in row] for row in c.entries.tolist()]
            return [[format_sci(v) for v in row] for row in c.entries.tolist()]
        return {
            "order": self.order,
            "dim": self.base_point.dim,
            "splitting": self.spec.kind,
            "coefficients": [{"n": n, "rows": rows(c)} for n, c in enumerate(self.coefficients, start=1)],
        }


def compositions(total: int, parts: int):
    """Ordered tuples of `parts` positive integers summing to `total`."""
    if parts == 1:
        if total >= 1:
            yield (total,)
        return
    for first in range(1, total - parts + 2):
        for rest in compositions(total - first, parts - 1):
            yield (first,) + rest


def ad_star(spec: SplittingSpec, x: LieElement, y: LieElement) -> LieElement:
    """ad*_x(y) := [[x, y]]."""
    return double_bracket(spec, x, y)


def dexp_star_inv(spec: SplittingSpec, x: LieElement, y: LieElement, order: int) -> LieElement:
    """sum_{n<=order} B_n/n! ad*_x^n(y)."""
    if order < 0:
        raise SeriesOrderError(f"Truncation order must be non-negative, got {order}.")
    table = BernoulliTable.build(order)
    out = y
    term = y
    for n in range(1, order + 1):
        term = ad_star(spec, x, term)
        weight = table[n] / factorial(n)
        if weight != 0:
            out = out + term * weight
    return out


class _MagnusRecursion:
    """
    Omega_n from
      n Omega_n = E_{n-1} + D_{n-1}(a0) + sum_{j=2}^{n-1} D_{j-1}(E_{n-j})
    where E_m collects the |>-nestings of total weight m (with 1/u!) and D_s the
    Bernoulli-weighted ad*-words of total weight s.
    """

    def __init__(self, spec: SplittingSpec, a0: LieElement, order: int):
        self.spec = spec
        self.a0 = a0
        self.table = BernoulliTable.build(order)
        self.omegas = {1: a0}
        self._nestings = {(): a0}
        self._words = {}
        self._sums = {0: a0}

    def zero(self) -> LieElement:
        return LieElement.zeros(self.a0.dim, self.a0.mode)

    def nesting(self, ks: tuple) -> LieElement:
        if ks not in self._nestings:
            self._nestings[ks] = post_lie(self.spec, self.omegas[ks[0]], self.nesting(ks[1:]))
        return self._nestings[ks]

    def triangle_sum(self, m: int) -> LieElement:
        if m not in self._sums:
            out = self.zero()
            for u in range(1, m + 1):
                weight = Fraction(1, factorial(u))
                for ks in compositions(m, u):
                    out = out + self.nesting(ks) * weight
            self._sums[m] = out
        return self._sums[m]

    def ad_word(self, ks: tuple, target: int | None) -> LieElement:
        """ad*_{Omega_k1} ... ad*_{Omega_kj} applied to a0 (target None) or E_target."""
        key = (ks, target)
        if key not in self._words:
            if not ks:
                value = self.a0 if target is None else self.triangle_sum(target)
            else:
                value = ad_star(self.spec, self.omegas[ks[0]], self.ad_word(ks[1:], target))
            self._words[key] = value
        return self._words[key]

    def bernoulli_operator(self, s: int, target: int | None) -> LieElement:
        out = self.zero()
        for j in range(1, s + 1):
            weight = self.table[j] / factorial(j)
            if weight == 0:
                continue
            for ks in compositions(s, j):
                out = out + self.ad_word(ks, target) * weight
        return out

    def step(self, n: int) -> LieElement:
        nested = self.triangle_sum(n - 1)
        bernoulli = self.bernoulli_operator(n - 1, None)
        cross = self.zero()
        for j in range(2, n):
            cross = cross + self.bernoulli_operator(j - 1, n - j)
        omega = (nested + bernoulli + cross) * Fraction(1, n)
        self.omegas[n] = omega
        return omega


def magnus_coefficients(spec: SplittingSpec, a0: LieElement, order: int | None = None) -> GradedSeries:
    """Omega_1..Omega_N of the post-Lie Magnus expansion; exact when a0 is exact."""
    order = settings.MAGNUS_ORDER if order is None else order
    if order < 1:
        raise SeriesOrderError(f"Magnus order must be at least 1, got {order}.")
    recursion = _MagnusRecursion(spec, a0, order)
    for n in range(2, order + 1):
        recursion.step(n)
    logger.debug(f"Computed {order} Magnus coefficients on gl({a0.dim}) ({a0.mode}).")
    return GradedSeries(order, tuple(recursion.omegas[n] for n in range(1, order + 1)), a0, spec)


def chi_printed_terms(spec: SplittingSpec, x: LieElement, order: int = 3) -> list[LieElement]:
    """
    chi_1 = x
    chi_2 = -1/2 [p, x]
    chi_3 = 1/4 [pi_+([p, x]), x] + 1/12 ([p, [p, x]] - [[p, x], x]),  p = pi_+(x)
    """
    if order not in (1, 2, 3):
        raise SeriesOrderError(f"Only orders 1..3 are printed, got {order}.")
    p = spec.plus(x)
    px = bracket(p, x)
    terms = [x, px * Fraction(-1, 2)]
    third = bracket(spec.plus(px), x) * Fraction(1, 4) \
        + (bracket(p, px) - bracket(px, x)) * Fraction(1, 12)
    terms.append(third)
    return terms[:order]


def projector_remark_residual(spec: SplittingSpec, series: GradedSeries, ks: tuple) -> float:
    """
    || pi_+(ad*_{W_k1} ... ad*_{W_ku} a0) - (-1)^u ad_{pi_+ W_k1} ... ad_{pi_+ W_ku} pi_+(a0) ||.
    The right-hand ad-words act through pi_+(Omega_k), the g_+ component.
    """
    a0 = series.base_point
    star_word = a0
    plain_word = spec.plus(a0)
    for k in reversed(ks):
        omega = series.coefficient(k)
        star_word = ad_star(spec, omega, star_word)
        plain_word = bracket(spec.plus(omega), plain_word)
    sign = -1 if len(ks) % 2 else 1
    return (spec.plus(star_word) - plain_word * sign).frobenius_norm()


def fit_slope(ts, errors) -> float:
    return float(np.polyfit(np.log(np.asarray(ts, dtype=float)), np.log(np.asarray(errors, dtype=float)), 1)[0])
