# enveloping/postlie.py - v0.1.0
import logging
import threading
from fractions import Fraction
from functools import partial

import numpy as np
from cachetools import LRUCache, cachedmethod
from cachetools.keys import hashkey

from enveloping.pbw import (
    EMPTY,
    U_G,
    U_GBAR,
    PBWAlgebra,
    PBWElement,
    TagMismatchError,
    TensorElement,
    accumulate,
    concat_product,
    coproduct,
    exp_concat,
    exp_series,
    graded_bilinear,
    split_positions,
    tensor_multiply,
    tensor_product,
)
from enveloping.structure import MatrixBasis, RationalSplitting, double_constants
from lie.algebra import EXACT, NUMERIC, LieElement, expm

logger = logging.getLogger(__name__)


class PostLieAlgebra:
    """
    U(g) with the post-Lie product x |> y = -[pi_+ x, y] extended to all of U(g),
    the star product built from it, and U(gbar) for the double bracket.

    Extension rules (taken from the construction of the post-Lie Magnus expansion):
      1 |> A = A,   A |> 1 = eps(A) 1
      x |> (b_1 ... b_m) = sum_i b_1 ... (x |> b_i) ... b_m           x in g
      (x A) |> y = x |> (A |> y) - (x |> A) |> y                        x, y in g
      A |> (B C) = (A_(1) |> B)(A_(2) |> C)
    """

    def __init__(self, splitting: RationalSplitting, cache_size: int = 65536):
        self.splitting = splitting
        self.algebra = PBWAlgebra(splitting.sc, U_G, cache_size)
        self._gbar = None
        self._cache = LRUCache(maxsize=cache_size)
        self._lock = threading.RLock()
        logger.info(f"PostLieAlgebra initialized for splitting '{splitting.name}'.")

    @property
    def gbar(self) -> PBWAlgebra:
        with self._lock:
            if self._gbar is None:
                self._gbar = PBWAlgebra(double_constants(self.splitting), U_GBAR)
        return self._gbar

    @property
    def sc(self):
        return self.splitting.sc

    @cachedmethod(lambda self: self._cache, key=partial(hashkey, "triangle"), lock=lambda self: self._lock)
    def triangle_words(self, a: tuple, b: tuple) -> tuple:
        if a == EMPTY:
            return ((b, Fraction(1)),)
        if b == EMPTY:
            return ()
        out = {}
        if len(a) == 1:
            x = {a[0]: Fraction(1)}
            for pos, letter in enumerate(b):
                for k, c in self.splitting.post_lie(x, {letter: Fraction(1)}).items():
                    accumulate(out, self.algebra.normalize(b[:pos] + (k,) + b[pos + 1:]), c)
            return tuple(out.items())
        if len(b) >= 2:
            head, rest = b[:1], b[1:]
            for left, right in split_positions(a):
                for lw, lc in self.triangle_words(left, head):
                    for rw, rc in self.triangle_words(right, rest):
                        accumulate(out, self.algebra.multiply_words(lw, rw), lc * rc)
            return tuple(out.items())
        x, tail = a[:1], a[1:]
        for w, c in self.triangle_words(tail, b):
            accumulate(out, self.triangle_words(x, w), c)
        for w, c in self.triangle_words(x, tail):
            accumulate(out, self.triangle_words(w, b), -c)
        return tuple(out.items())

    @cachedmethod(lambda self: self._cache, key=partial(hashkey, "star"), lock=lambda self: self._lock)
    def star_words(self, a: tuple, b: tuple) -> tuple:
        """A * B = A_(1) (A_(2) |> B)."""
        out = {}
        for left, right in split_positions(a):
            for w, c in self.triangle_words(right, b):
                accumulate(out, self.algebra.multiply_words(left, w), c)
        return tuple(out.items())

    @cachedmethod(lambda self: self._cache, key=partial(hashkey, "r_minus"), lock=lambda self: self._lock)
    def r_minus_word(self, word: tuple) -> tuple:
        """pi_- extended to a unital algebra morphism U(gbar) -> U(g)."""
        letters = [self.splitting.minus({k: Fraction(1)}) for k in word]
        return tuple(self.algebra.word_product(letters).items())

    @cachedmethod(lambda self: self._cache, key=partial(hashkey, "s_r_plus"), lock=lambda self: self._lock)
    def antipode_r_plus_word(self, word: tuple) -> tuple:
        """S o r_+ on a word, with r_+ = -pi_+ extended as an algebra morphism."""
        letters = [{k: -c for k, c in self.splitting.plus({i: Fraction(1)}).items()} for i in word]
        out = {}
        for w, c in self.algebra.word_product(letters).items():
            accumulate(out, self.algebra.antipode_word(w), c)
        return tuple(out.items())


def _require(post: PostLieAlgebra, *elements: PBWElement, algebra: PBWAlgebra | None = None):
    algebra = algebra or post.algebra
    for element in elements:
        if element.algebra is not algebra:
            raise TagMismatchError(f"Expected an element of {algebra.tag}, got {element.tag}.")


def triangleright_ext(post: PostLieAlgebra, a: PBWElement, b: PBWElement) -> PBWElement:
    _require(post, a, b)
    return graded_bilinear(a, b, post.triangle_words)


def star_product(post: PostLieAlgebra, a: PBWElement, b: PBWElement) -> PBWElement:
    _require(post, a, b)
    return graded_bilinear(a, b, post.star_words)


def exp_star(post: PostLieAlgebra, vector: dict, cap: int) -> PBWElement:
    """sum_n v^{*n} / n! through the cap."""
    v = post.algebra.lie_element(vector, cap)
    return exp_series(v, partial(star_product, post))


def exp_triangleright(post: PostLieAlgebra, vector: dict, b: PBWElement) -> PBWElement:
    """b + a |> b + 1/2 a |> (a |> b) + ... through the cap of b."""
    _require(post, b)
    a = post.algebra.lie_element(vector, b.cap)
    out = b
    term = b
    for n in range(1, b.cap + 1):
        term = triangleright_ext(post, a, term) * Fraction(1, n)
        out = out + term
    return out


def split_exponential(post: PostLieAlgebra, vector: dict, cap: int) -> PBWElement:
    """exp(v_-) exp(v_+) in U(g)."""
    minus = exp_concat(post.algebra, post.splitting.minus(vector), cap)
    plus = exp_concat(post.algebra, post.splitting.plus(vector), cap)
    return concat_product(minus, plus)


def f_map(post: PostLieAlgebra, x: PBWElement) -> PBWElement:
    """F = mu o (id (x) S) o (r_- (x) r_+) o Delta : U(gbar) -> U(g)."""
    _require(post, x, algebra=post.gbar)
    return tensor_multiply(coproduct(x), left_map=post.r_minus_word, right_map=post.antipode_r_plus_word,
                           target=post.algebra)


def tensor_star_product(post: PostLieAlgebra, s: TensorElement, t: TensorElement) -> TensorElement:
    """(A (x) B)(* (x) *)(C (x) D)."""
    return tensor_product(s, t, post.star_words)


def star_factorization_residual(post: PostLieAlgebra, vector: dict, cap: int) -> PBWElement:
    """exp*(v) - exp(v_-) exp(v_+); zero in every degree through the cap."""
    return exp_star(post, vector, cap) - split_exponential(post, vector, cap)


def composition_residual(post: PostLieAlgebra, a: PBWElement, b: PBWElement, c: PBWElement) -> PBWElement:
    """A |> (B |> C) - (A * B) |> C."""
    return triangleright_ext(post, a, triangleright_ext(post, b, c)) - triangleright_ext(post, star_product(post, a, b), c)


def hopf_residual(post: PostLieAlgebra, a: PBWElement, b: PBWElement) -> TensorElement:
    """Delta(A * B) - Delta(A)(* (x) *)Delta(B)."""
    return coproduct(star_product(post, a, b)) - tensor_star_product(post, coproduct(a), coproduct(b))


def f_morphism_residual(post: PostLieAlgebra, letters: list[dict], cap: int) -> PBWElement:
    """F(x_1 ... x_n) - F(x_1) * ... * F(x_n) for Lie vectors x_i, product taken in U(gbar)."""
    gbar = post.gbar
    product = gbar.one(cap)
    starred = post.algebra.one(cap)
    for vector in letters:
        x = gbar.lie_element(vector, cap)
        product = concat_product(product, x)
        starred = star_product(post, starred, f_map(post, x))
    return f_map(post, product) - starred


def f_exponential_residual(post: PostLieAlgebra, vector: dict, cap: int) -> PBWElement:
    """F(exp(v)) in U(gbar) against exp(v_-) exp(v_+) in U(g)."""
    return f_map(post, exp_concat(post.gbar, vector, cap)) - split_exponential(post, vector, cap)


def represent(basis: MatrixBasis, element: PBWElement, mode: str = NUMERIC) -> np.ndarray:
    """Image under the algebra morphism U(g) -> matrices induced by a matrix basis."""
    n = basis.matrix_dim
    if mode == EXACT:
        matrices = [m.entries for m in basis.matrices]
        out = LieElement.zeros(n, EXACT).entries.copy()
        unit = LieElement.identity(n, EXACT).entries
    else:
        matrices = [m.to_numeric().entries for m in basis.matrices]
        out = np.zeros((n, n))
        unit = np.eye(n)
    for word, c in element.flatten().items():
        product = unit
        for k in word:
            product = product @ matrices[k]
        out = out + (product * c if mode == EXACT else product * float(c))
    return out


def ad_exp_residual(post: PostLieAlgebra, basis: MatrixBasis, v: dict, w: dict, cap: int) -> float:
    """|| rep(exp*(v) |> w) - exp(-pi_+ v) w exp(pi_+ v) ||_F."""
    image = triangleright_ext(post, exp_star(post, v, cap), post.algebra.lie_element(w, cap))
    lhs = represent(basis, image)
    plus = basis.element(post.splitting.plus(v)).to_numeric()
    w_matrix = basis.element(w).to_numeric().entries
    rhs = expm(-plus).entries @ w_matrix @ expm(plus).entries
    return float(np.linalg.norm(lhs - rhs, "fro"))


def represent_residual(basis: MatrixBasis, element: PBWElement, target: np.ndarray) -> float:
    return float(np.linalg.norm(represent(basis, element) - target, "fro"))
