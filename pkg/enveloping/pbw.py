# enveloping/pbw.py - v0.1.0
"""
PBW normal forms in U(g) over exact rationals.

Every stored term carries a filtration degree: generators have degree 1, the
degrees of factors add under every product, and straightening keeps the degree
of the word it rewrites. Terms above the cap are dropped, so truncation is
compatible with all products and identities compare degree by degree.
"""
import logging
import threading
from dataclasses import dataclass, field
from fractions import Fraction
from functools import partial
from itertools import combinations

from cachetools import LRUCache, cachedmethod
from cachetools.keys import hashkey

from enveloping.structure import EnvelopingError, StructureConstants

logger = logging.getLogger(__name__)

U_G = "U(g)"
U_GBAR = "U(gbar)"

EMPTY = ()


class TagMismatchError(EnvelopingError):
    pass


class DegreeError(EnvelopingError):
    pass


def accumulate(out: dict, items, scale=1):
    for word, c in items:
        value = out.get(word, 0) + scale * c
        if value == 0:
            out.pop(word, None)
        else:
            out[word] = value
    return out


def split_positions(word: tuple):
    """All (sub-word, complement) pairs over subsets of positions; the coproduct of a PBW monomial."""
    n = len(word)
    for size in range(n + 1):
        for chosen in combinations(range(n), size):
            rest = [k for k in range(n) if k not in chosen]
            yield tuple(word[k] for k in chosen), tuple(word[k] for k in rest)


class PBWAlgebra:
    """Plain (degree-free) products in U(g) for one set of structure constants."""

    def __init__(self, sc: StructureConstants, tag: str = U_G, cache_size: int = 65536):
        self.sc = sc
        self.tag = tag
        self._cache = LRUCache(maxsize=cache_size)
        self._lock = threading.RLock()
        logger.info(f"PBWAlgebra initialized for {tag} on {sc.dim} generators.")

    @cachedmethod(lambda self: self._cache, key=partial(hashkey, "normalize"), lock=lambda self: self._lock)
    def normalize(self, word: tuple) -> tuple:
        """Straightens a word into PBW order: x_j x_i -> x_i x_j + [x_j, x_i] for j > i."""
        result = {}
        stack = [(tuple(word), Fraction(1))]
        while stack:
            current, coeff = stack.pop()
            for pos in range(len(current) - 1):
                if current[pos] > current[pos + 1]:
                    j, i = current[pos], current[pos + 1]
                    head, tail = current[:pos], current[pos + 2:]
                    stack.append((head + (i, j) + tail, coeff))
                    for k, c in self.sc.bracket_basis(j, i).items():
                        stack.append((head + (k,) + tail, coeff * c))
                    break
            else:
                accumulate(result, [(current, coeff)])
        return tuple(result.items())

    def multiply_words(self, a: tuple, b: tuple) -> tuple:
        return self.normalize(a + b)

    def normalize_dict(self, terms: dict) -> dict:
        out = {}
        for word, c in terms.items():
            accumulate(out, self.normalize(word), c)
        return out

    def multiply(self, u: dict, v: dict) -> dict:
        out = {}
        for wu, cu in u.items():
            for wv, cv in v.items():
                accumulate(out, self.multiply_words(wu, wv), cu * cv)
        return out

    @cachedmethod(lambda self: self._cache, key=partial(hashkey, "antipode"), lock=lambda self: self._lock)
    def antipode_word(self, word: tuple) -> tuple:
        """S(x_1 ... x_k) = (-1)^k x_k ... x_1, normalized."""
        sign = -1 if len(word) % 2 else 1
        return tuple((w, sign * c) for w, c in self.normalize(tuple(reversed(word))))

    def word_product(self, letters) -> dict:
        """Product in U(g) of a sequence of sparse Lie vectors."""
        out = {EMPTY: Fraction(1)}
        for vector in letters:
            out = self.multiply(out, {(k,): c for k, c in vector.items()})
        return out

    # elements

    def one(self, cap: int) -> "PBWElement":
        return PBWElement(self, cap, {0: {EMPTY: Fraction(1)}})

    def zero(self, cap: int) -> "PBWElement":
        return PBWElement(self, cap, {})

    def generator(self, i: int, cap: int) -> "PBWElement":
        return self.lie_element({i: Fraction(1)}, cap)

    def lie_element(self, vector: dict, cap: int) -> "PBWElement":
        if cap < 1:
            return self.zero(cap)
        return PBWElement(self, cap, {1: {(k,): Fraction(c) for k, c in vector.items() if c != 0}})

    def monomial(self, word, cap: int, coeff=1, degree: int | None = None) -> "PBWElement":
        """The (normalized) product of the letters in word, at filtration degree len(word) by default."""
        word = tuple(word)
        degree = len(word) if degree is None else degree
        if degree < len(word):
            raise DegreeError(f"Filtration degree {degree} is below the word length {len(word)}.")
        if degree > cap:
            return self.zero(cap)
        terms = accumulate({}, self.normalize(word), Fraction(coeff))
        return PBWElement(self, cap, {degree: terms})


@dataclass(frozen=True, eq=False)
class PBWElement:
    """Exact combination of PBW monomials, graded by filtration degree and truncated at cap."""
    algebra: PBWAlgebra
    cap: int
    components: dict = field(default_factory=dict)   # degree -> {word: Fraction}

    def __post_init__(self):
        cleaned = {}
        for degree, terms in self.components.items():
            if degree > self.cap:
                continue
            kept = {tuple(w): Fraction(c) for w, c in terms.items() if c != 0}
            for word in kept:
                if len(word) > degree:
                    raise DegreeError(f"Word {word} is longer than its filtration degree {degree}.")
                if any(k > 0 and word[k - 1] > word[k] for k in range(len(word))):
                    raise DegreeError(f"Word {word} is not PBW-ordered.")
            if kept:
                cleaned[degree] = kept
        object.__setattr__(self, "components", cleaned)

    @property
    def tag(self) -> str:
        return self.algebra.tag

    def _check(self, other: "PBWElement"):
        if not isinstance(other, PBWElement):
            raise TypeError(f"Expected PBWElement, got {type(other).__name__}")
        if other.algebra is not self.algebra:
            raise TagMismatchError(f"Cannot combine elements of {self.tag} and {other.tag} over different algebras.")

    def _linear(self, other: "PBWElement", sign: int) -> "PBWElement":
        self._check(other)
        cap = min(self.cap, other.cap)
        out = {d: dict(t) for d, t in self.components.items() if d <= cap}
        for degree, terms in other.components.items():
            if degree <= cap:
                accumulate(out.setdefault(degree, {}), terms.items(), sign)
        return PBWElement(self.algebra, cap, out)

    def __add__(self, other: "PBWElement") -> "PBWElement":
        return self._linear(other, 1)

    def __sub__(self, other: "PBWElement") -> "PBWElement":
        return self._linear(other, -1)

    def __neg__(self) -> "PBWElement":
        return self * -1

    def __mul__(self, scalar) -> "PBWElement":
        scalar = Fraction(scalar)
        return PBWElement(self.algebra, self.cap,
                          {d: {w: c * scalar for w, c in t.items()} for d, t in self.components.items()})

    __rmul__ = __mul__

    def truncate(self, cap: int) -> "PBWElement":
        return PBWElement(self.algebra, min(cap, self.cap), self.components)

    def degree_component(self, degree: int) -> dict:
        return dict(self.components.get(degree, {}))

    def is_zero(self) -> bool:
        return not self.components

    def equals(self, other: "PBWElement") -> bool:
        return (self - other).is_zero()

    def flatten(self) -> dict:
        """Sum over degrees: the underlying element of U(g)."""
        out = {}
        for terms in self.components.values():
            accumulate(out, terms.items())
        return out

    def max_degree(self) -> int:
        return max(self.components, default=-1)

    def term_count(self) -> int:
        return sum(len(t) for t in self.components.values())

    def to_dict(self) -> dict:
        labels = self.algebra.sc.labels
        return {
            "tag": self.tag,
            "cap": self.cap,
            "terms": [
                {"degree": d, "word": [labels[k] for k in w], "coeff": str(c)}
                for d in sorted(self.components) for w, c in sorted(self.components[d].items())
            ],
        }

    def __repr__(self):
        return f"PBWElement(tag={self.tag}, cap={self.cap}, terms={self.term_count()})"


def graded_bilinear(a: PBWElement, b: PBWElement, word_op) -> PBWElement:
    """Extends a plain product on words to graded elements; degrees add."""
    a._check(b)
    cap = min(a.cap, b.cap)
    out = {}
    for da, ta in a.components.items():
        for db, tb in b.components.items():
            degree = da + db
            if degree > cap:
                continue
            slot = out.setdefault(degree, {})
            for wa, ca in ta.items():
                for wb, cb in tb.items():
                    accumulate(slot, word_op(wa, wb), ca * cb)
    return PBWElement(a.algebra, cap, out)


def graded_linear(a: PBWElement, word_map, target: PBWAlgebra | None = None) -> PBWElement:
    """Applies a degree-preserving linear map given on words."""
    out = {}
    for degree, terms in a.components.items():
        slot = out.setdefault(degree, {})
        for word, c in terms.items():
            accumulate(slot, word_map(word), c)
    return PBWElement(target or a.algebra, a.cap, out)


def pbw_normalize(algebra: PBWAlgebra, word, coeff=1, cap: int | None = None) -> PBWElement:
    word = tuple(word)
    cap = len(word) if cap is None else cap
    if len(word) > cap:
        raise DegreeError(f"Word of length {len(word)} exceeds the cap {cap}.")
    return algebra.monomial(word, cap, coeff)


def concat_product(a: PBWElement, b: PBWElement) -> PBWElement:
    return graded_bilinear(a, b, a.algebra.multiply_words)


def antipode(a: PBWElement) -> PBWElement:
    return graded_linear(a, a.algebra.antipode_word)


def counit(a: PBWElement) -> Fraction:
    return sum((t.get(EMPTY, Fraction(0)) for t in a.components.values()), Fraction(0))


def power(a: PBWElement, n: int, product=concat_product) -> PBWElement:
    out = a.algebra.one(a.cap)
    for _ in range(n):
        out = product(a, out)
    return out


def exp_concat(algebra: PBWAlgebra, vector: dict, cap: int) -> PBWElement:
    """sum_{n<=cap} v^n / n! for v in g."""
    v = algebra.lie_element(vector, cap)
    return exp_series(v, concat_product)


def exp_series(v: PBWElement, product) -> PBWElement:
    if any(d != 1 for d in v.components):
        raise DegreeError("Exponentials take a degree-1 (Lie) element.")
    out = v.algebra.one(v.cap)
    term = v.algebra.one(v.cap)
    for n in range(1, v.cap + 1):
        term = product(v, term) * Fraction(1, n)
        out = out + term
    return out


@dataclass(frozen=True, eq=False)
class TensorElement:
    """Element of U (x) U; each term carries its total filtration degree."""
    algebra: PBWAlgebra
    cap: int
    components: dict = field(default_factory=dict)   # degree -> {(left, right): Fraction}

    def __post_init__(self):
        cleaned = {}
        for degree, terms in self.components.items():
            kept = {k: Fraction(c) for k, c in terms.items() if c != 0}
            if kept and degree <= self.cap:
                cleaned[degree] = kept
        object.__setattr__(self, "components", cleaned)

    def __sub__(self, other: "TensorElement") -> "TensorElement":
        if other.algebra is not self.algebra:
            raise TagMismatchError("Tensor elements over different algebras.")
        cap = min(self.cap, other.cap)
        out = {d: dict(t) for d, t in self.components.items() if d <= cap}
        for degree, terms in other.components.items():
            if degree <= cap:
                accumulate(out.setdefault(degree, {}), terms.items(), -1)
        return TensorElement(self.algebra, cap, out)

    def is_zero(self) -> bool:
        return not self.components

    def equals(self, other: "TensorElement") -> bool:
        return (self - other).is_zero()

    def swap(self) -> "TensorElement":
        return TensorElement(self.algebra, self.cap,
                             {d: {(r, l): c for (l, r), c in t.items()} for d, t in self.components.items()})


def coproduct(a: PBWElement) -> TensorElement:
    """Generators are primitive; the monomial x_S (x) x_S^c runs over position subsets."""
    out = {}
    for degree, terms in a.components.items():
        slot = out.setdefault(degree, {})
        for word, c in terms.items():
            accumulate(slot, ((pair, 1) for pair in split_positions(word)), c)
    return TensorElement(a.algebra, a.cap, out)


def tensor_product(s: TensorElement, t: TensorElement, word_op) -> TensorElement:
    """(A (x) B)(C (x) D) = op(A, C) (x) op(B, D)."""
    if s.algebra is not t.algebra:
        raise TagMismatchError("Tensor elements over different algebras.")
    cap = min(s.cap, t.cap)
    out = {}
    for ds, ts in s.components.items():
        for dt, tt in t.components.items():
            degree = ds + dt
            if degree > cap:
                continue
            slot = out.setdefault(degree, {})
            for (l1, r1), c1 in ts.items():
                for (l2, r2), c2 in tt.items():
                    lefts = word_op(l1, l2)
                    rights = word_op(r1, r2)
                    accumulate(slot, (((lw, rw), lc * rc) for lw, lc in lefts for rw, rc in rights), c1 * c2)
    return TensorElement(s.algebra, cap, out)


def tensor_multiply(t: TensorElement, left_map=None, right_map=None, target: PBWAlgebra | None = None) -> PBWElement:
    """mu o (left_map (x) right_map): word maps default to the identity."""
    algebra = target or t.algebra
    out = {}
    for degree, terms in t.components.items():
        slot = out.setdefault(degree, {})
        for (left, right), c in terms.items():
            lefts = left_map(left) if left_map else ((left, 1),)
            rights = right_map(right) if right_map else ((right, 1),)
            for lw, lc in lefts:
                for rw, rc in rights:
                    accumulate(slot, algebra.multiply_words(lw, rw), c * lc * rc)
    return PBWElement(algebra, t.cap, out)


def antipode_axiom_residual(a: PBWElement) -> tuple[PBWElement, PBWElement]:
    """mu(S (x) id)Delta(A) - eps(A)1 and mu(id (x) S)Delta(A) - eps(A)1."""
    unit = a.algebra.one(a.cap) * counit(a)
    delta = coproduct(a)
    left = tensor_multiply(delta, left_map=a.algebra.antipode_word) - unit
    right = tensor_multiply(delta, right_map=a.algebra.antipode_word) - unit
    return left, right


def is_coassociative(a: PBWElement) -> bool:
    """(Delta (x) id)Delta = (id (x) Delta)Delta, compared as triple splittings."""
    left, right = {}, {}
    for degree, terms in a.components.items():
        for word, c in terms.items():
            for first, rest in split_positions(word):
                for second, third in split_positions(rest):
                    accumulate(right, [((degree, first, second, third), c)])
                for second, third in split_positions(first):
                    accumulate(left, [((degree, second, third, rest), c)])
    return left == right
