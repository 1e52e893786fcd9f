# enveloping/structure.py - v0.1.0
import json
import logging
from dataclasses import dataclass, field
from fractions import Fraction

import numpy as np
import sympy

from lie.algebra import EXACT, NUMERIC, LieElement, bracket, vectorize
from lie.splitting import SplittingSpec
from utils.helpers import format_rational, parse_rational

logger = logging.getLogger(__name__)


class EnvelopingError(Exception):
    """Base exception for the enveloping-algebra engine."""
    def __init__(self, message, errors=None):
        super().__init__(message)
        self.errors = errors if errors is not None else []


class UnsupportedSpecError(EnvelopingError):
    """The splitting does not act by exact rationals on the chosen basis."""


class InvalidSplittingError(EnvelopingError):
    """The induced double bracket violates antisymmetry or Jacobi."""


# Lie-algebra vectors are sparse dicts {basis index: Fraction}.

def combine(*scaled) -> dict:
    """sum of coeff * vector over (coeff, vector) pairs, zeros dropped."""
    out = {}
    for coeff, vector in scaled:
        for k, c in vector.items():
            out[k] = out.get(k, 0) + coeff * c
    return {k: c for k, c in out.items() if c != 0}


@dataclass(frozen=True, eq=False)
class StructureConstants:
    """[e_i, e_j] = sum_k c^k_ij e_k over exact rationals."""
    labels: tuple
    table: dict = field(default_factory=dict)   # (i, j) -> {k: Fraction}

    @property
    def dim(self) -> int:
        return len(self.labels)

    @classmethod
    def from_entries(cls, dim: int, entries, labels=None) -> "StructureConstants":
        """entries: iterable of (i, j, k, c); the antisymmetric partner is filled in."""
        labels = tuple(labels) if labels is not None else tuple(f"x{i}" for i in range(dim))
        if len(labels) != dim:
            raise EnvelopingError(f"Expected {dim} labels, got {len(labels)}.")
        table = {}
        for i, j, k, c in entries:
            i, j, k, c = int(i), int(j), int(k), parse_rational(c)
            if not (0 <= i < dim and 0 <= j < dim and 0 <= k < dim):
                raise EnvelopingError(f"Structure constant index out of range: ({i}, {j}, {k}).")
            if c == 0:
                continue
            if i == j:
                raise InvalidSplittingError(f"[e_{i}, e_{i}] must vanish, got coefficient {c} on e_{k}.")
            for (a, b), sign in (((i, j), 1), ((j, i), -1)):
                slot = table.setdefault((a, b), {})
                if k in slot and slot[k] != sign * c:
                    raise EnvelopingError(f"Conflicting constants for [e_{i}, e_{j}] on e_{k}.")
                slot[k] = sign * c
        sc = cls(labels, table)
        logger.debug(f"StructureConstants initialized ({dim} generators, {len(table) // 2} brackets).")
        return sc

    def bracket_basis(self, i: int, j: int) -> dict:
        return self.table.get((i, j), {})

    def bracket(self, u: dict, v: dict) -> dict:
        return combine(*((cu * cv, self.bracket_basis(i, j)) for i, cu in u.items() for j, cv in v.items()))

    def jacobi_violations(self) -> list[tuple]:
        violations = []
        basis = [{i: Fraction(1)} for i in range(self.dim)]
        for i in range(self.dim):
            for j in range(i + 1, self.dim):
                for k in range(j + 1, self.dim):
                    x, y, z = basis[i], basis[j], basis[k]
                    total = combine(
                        (1, self.bracket(x, self.bracket(y, z))),
                        (1, self.bracket(y, self.bracket(z, x))),
                        (1, self.bracket(z, self.bracket(x, y))),
                    )
                    if total:
                        violations.append((i, j, k, total))
        return violations

    def check(self):
        violations = self.jacobi_violations()
        if violations:
            raise InvalidSplittingError("Structure constants fail the Jacobi identity.", errors=violations)

    def negated(self) -> "StructureConstants":
        return StructureConstants(self.labels, {key: {k: -c for k, c in slot.items()} for key, slot in self.table.items()})

    def same_as(self, other: "StructureConstants") -> bool:
        keys = set(self.table) | set(other.table)
        return self.dim == other.dim and all(self.bracket_basis(*key) == other.bracket_basis(*key) for key in keys)

    def to_entries(self) -> list:
        return [[i, j, k, format_rational(c)]
                for (i, j), slot in sorted(self.table.items()) if i < j
                for k, c in sorted(slot.items())]

    def to_json(self) -> str:
        return json.dumps({"dim": self.dim, "labels": list(self.labels), "c": self.to_entries()})


@dataclass(frozen=True, eq=False)
class MatrixBasis:
    """Exact matrix basis of a subalgebra of gl(n); coordinates solve exactly."""
    labels: tuple
    matrices: tuple

    def __post_init__(self):
        if not self.matrices:
            raise EnvelopingError("A matrix basis needs at least one element.")
        columns = sympy.Matrix([[sympy.Rational(v.numerator, v.denominator) for v in vectorize(m)] for m in self.matrices]).T
        if columns.rank() != len(self.matrices):
            raise EnvelopingError("Basis matrices are linearly dependent.")
        object.__setattr__(self, "_columns", columns)
        object.__setattr__(self, "_left_inverse", (columns.T * columns).inv() * columns.T)

    @property
    def dim(self) -> int:
        return len(self.matrices)

    @property
    def matrix_dim(self) -> int:
        return self.matrices[0].dim

    def coordinates(self, a: LieElement) -> dict:
        """Exact coordinates of a in this basis; raises if a leaves the span."""
        if a.mode != EXACT:
            a = _rationalize(a)
        target = sympy.Matrix([sympy.Rational(v.numerator, v.denominator) for v in vectorize(a)])
        coords = self._left_inverse * target
        if self._columns * coords != target:
            raise UnsupportedSpecError("Matrix does not lie in the span of the basis.")
        return {k: Fraction(int(c.p), int(c.q)) for k, c in enumerate(coords) if c != 0}

    def element(self, coords: dict) -> LieElement:
        out = LieElement.zeros(self.matrix_dim, EXACT)
        for k, c in coords.items():
            out = out + self.matrices[k] * c
        return out

    def structure_constants(self) -> StructureConstants:
        entries = []
        for i in range(self.dim):
            for j in range(i + 1, self.dim):
                for k, c in self.coordinates(bracket(self.matrices[i], self.matrices[j])).items():
                    entries.append((i, j, k, c))
        return StructureConstants.from_entries(self.dim, entries, self.labels)


def _rationalize(a: LieElement) -> LieElement:
    try:
        return LieElement([[parse_rational(v) for v in row] for row in a.entries.tolist()], EXACT)
    except ValueError as e:
        raise UnsupportedSpecError(f"Entry is not an exact rational: {e}") from e


def _unit(n: int, i: int, j: int) -> LieElement:
    return LieElement.matrix_unit(n, i, j, EXACT)


def sl2_basis() -> MatrixBasis:
    """(e, h, f) with e < h < f: [h, e] = 2e, [e, f] = h, [h, f] = -2f."""
    e = _unit(2, 0, 1)
    h = _unit(2, 0, 0) - _unit(2, 1, 1)
    f = _unit(2, 1, 0)
    return MatrixBasis(("e", "h", "f"), (e, h, f))


def gl_basis(n: int) -> MatrixBasis:
    labels = tuple(f"E{i + 1}{j + 1}" for i in range(n) for j in range(n))
    return MatrixBasis(labels, tuple(_unit(n, i, j) for i in range(n) for j in range(n)))


CATALOG = {
    "sl2": sl2_basis,
    "gl2": lambda: gl_basis(2),
    "gl3": lambda: gl_basis(3),
}


def catalog(name: str) -> MatrixBasis:
    try:
        return CATALOG[name]()
    except KeyError:
        raise EnvelopingError(f"Unknown algebra '{name}'. Available: {', '.join(CATALOG)}") from None


@dataclass(frozen=True, eq=False)
class RationalSplitting:
    """pi_+ on a structure-constant algebra, tabulated on the basis."""
    sc: StructureConstants
    plus_table: tuple   # plus_table[i] = pi_+(e_i) as a sparse vector
    name: str = "custom"
    basis: MatrixBasis | None = None

    @classmethod
    def from_spec(cls, spec: SplittingSpec, basis: MatrixBasis) -> "RationalSplitting":
        if spec.dim != basis.matrix_dim:
            raise UnsupportedSpecError(f"Splitting acts on gl({spec.dim}), basis lives in gl({basis.matrix_dim}).")
        table = []
        for m in basis.matrices:
            if spec.is_exact:
                image = spec.plus(m)
            else:
                image = _rationalize(spec.plus(m.to_numeric()))
            table.append(basis.coordinates(image))
        splitting = cls(basis.structure_constants(), tuple(table), spec.kind, basis)
        logger.info(f"RationalSplitting initialized ({spec.kind} on {', '.join(basis.labels)}).")
        return splitting

    @classmethod
    def from_table(cls, sc: StructureConstants, plus_table, name: str = "custom") -> "RationalSplitting":
        table = tuple({k: parse_rational(c) for k, c in row.items() if c != 0} for row in plus_table)
        if len(table) != sc.dim:
            raise UnsupportedSpecError(f"Need pi_+ of all {sc.dim} basis elements, got {len(table)}.")
        return cls(sc, table, name)

    @classmethod
    def zero(cls, sc: StructureConstants) -> "RationalSplitting":
        return cls(sc, tuple({} for _ in range(sc.dim)), "zero")

    @classmethod
    def identity(cls, sc: StructureConstants) -> "RationalSplitting":
        return cls(sc, tuple({i: Fraction(1)} for i in range(sc.dim)), "identity")

    def plus(self, v: dict) -> dict:
        return combine(*((c, self.plus_table[i]) for i, c in v.items()))

    def minus(self, v: dict) -> dict:
        return combine((1, v), (-1, self.plus(v)))

    def post_lie(self, u: dict, v: dict) -> dict:
        """u |> v = -[pi_+ u, v]."""
        return combine((-1, self.sc.bracket(self.plus(u), v)))

    def is_projector(self) -> bool:
        return all(self.plus(row) == row for row in self.plus_table)


def double_constants(splitting: RationalSplitting) -> StructureConstants:
    """[[e_i, e_j]] = [pi_- e_i, e_j] + [e_i, pi_- e_j] - [e_i, e_j], checked for Jacobi."""
    sc = splitting.sc
    entries = []
    for i in range(sc.dim):
        for j in range(i + 1, sc.dim):
            x, y = {i: Fraction(1)}, {j: Fraction(1)}
            value = combine(
                (1, sc.bracket(splitting.minus(x), y)),
                (1, sc.bracket(x, splitting.minus(y))),
                (-1, sc.bracket(x, y)),
            )
            entries.extend((i, j, k, c) for k, c in value.items())
    doubled = StructureConstants.from_entries(sc.dim, entries, sc.labels)
    violations = doubled.jacobi_violations()
    if violations:
        raise InvalidSplittingError(f"Double bracket of '{splitting.name}' fails Jacobi; pi_+ is not an R-matrix.",
                                    errors=violations)
    return doubled


def vector_to_matrix(basis: MatrixBasis, v: dict, mode: str = NUMERIC) -> np.ndarray:
    out = basis.element(v)
    return out.to_numeric().entries if mode == NUMERIC else out.entries
