# lie/splitting.py - v0.1.0
import logging
from dataclasses import dataclass, field, replace
from fractions import Fraction

import numpy as np
import scipy.linalg

from config import settings
from lie.algebra import (
    EXACT,
    NUMERIC,
    DimensionMismatchError,
    LieAlgebraError,
    LieElement,
    ModeMismatchError,
    bracket,
    unvectorize,
    vectorize,
)

logger = logging.getLogger(__name__)

LOWER_TRIANGULAR = "lower_triangular"
QR_SKEW = "qr_skew"
CUSTOM = "custom"
KINDS = (LOWER_TRIANGULAR, QR_SKEW, CUSTOM)

PLUS = "+"
MINUS = "-"

RESIDUAL_NAMES = ("mybe_plus", "mybe_minus", "mcybe", "closure_plus", "closure_minus")


@dataclass(frozen=True)
class ValidationReport:
    """Worst residuals of the R-matrix identities over a sample set."""
    kind: str
    dim: int
    sample_count: int
    seed: int | None
    tol: float
    residuals: dict = field(default_factory=dict)
    validated: bool = False

    def failures(self) -> list[str]:
        return [name for name in RESIDUAL_NAMES if self.residuals.get(name, 0.0) > self.tol]

    def to_dict(self) -> dict:
        return {
            "kind": self.kind,
            "dim": self.dim,
            "sample_count": self.sample_count,
            "seed": self.seed,
            "tol": self.tol,
            "residuals": {name: self.residuals[name] for name in RESIDUAL_NAMES},
            "validated": self.validated,
        }


@dataclass(frozen=True, eq=False)
class SplittingSpec:
    """
    An R-matrix pi_+ on gl(n) (pi_- := id - pi_+), either a built-in splitting
    or an explicit n^2 x n^2 matrix acting on column-major vec(a).
    """
    dim: int
    kind: str
    matrix: np.ndarray | None = None
    validated: bool = False
    report: ValidationReport | None = None

    def __post_init__(self):
        if self.kind not in KINDS:
            raise ValueError(f"Unknown splitting kind '{self.kind}'. Expected one of {KINDS}.")
        if self.dim < 1:
            raise ValueError(f"Splitting dimension must be positive, got {self.dim}.")
        if self.kind == CUSTOM:
            if self.matrix is None:
                raise ValueError("Custom splittings need an explicit n^2 x n^2 matrix.")
            arr = np.array(self.matrix, dtype=object if np.asarray(self.matrix).dtype == object else float)
            size = self.dim * self.dim
            if arr.shape != (size, size):
                raise DimensionMismatchError(f"Custom matrix must be {size}x{size}, got {arr.shape}.")
            if arr.dtype == object:
                arr = LieElement(arr, EXACT).entries
            arr.setflags(write=False)
            object.__setattr__(self, "matrix", arr)
        elif self.matrix is not None:
            raise ValueError(f"Built-in kind '{self.kind}' takes no matrix.")

    @classmethod
    def lower_triangular(cls, dim: int) -> "SplittingSpec":
        return cls(dim, LOWER_TRIANGULAR)

    @classmethod
    def qr_skew(cls, dim: int) -> "SplittingSpec":
        return cls(dim, QR_SKEW)

    @classmethod
    def custom(cls, matrix, dim: int | None = None) -> "SplittingSpec":
        size = np.asarray(matrix, dtype=object).shape[0]
        dim = dim if dim is not None else int(round(np.sqrt(size)))
        return cls(dim, CUSTOM, np.asarray(matrix, dtype=object) if _has_exact_entries(matrix) else np.asarray(matrix, dtype=float))

    @classmethod
    def from_callable(cls, dim: int, plus, mode: str = EXACT) -> "SplittingSpec":
        """Tabulates a linear map pi_+ on the matrix units into a custom spec."""
        columns = []
        for j in range(dim):
            for i in range(dim):
                # column-major ordering of the units E_ij
                columns.append(vectorize(plus(LieElement.matrix_unit(dim, i, j, mode))))
        matrix = np.array(columns, dtype=object if mode == EXACT else float).T
        return cls(dim, CUSTOM, matrix)

    @property
    def is_exact(self) -> bool:
        return self.kind != CUSTOM or self.matrix.dtype == object

    def is_projector(self) -> bool:
        if self.kind != CUSTOM:
            return True
        square = self.matrix @ self.matrix
        if self.matrix.dtype == object:
            return all(v == 0 for v in (square - self.matrix).flat)
        return bool(np.allclose(square, self.matrix, atol=1e-13))

    def coefficient_matrix(self, mode: str = NUMERIC) -> np.ndarray:
        """Explicit n^2 x n^2 matrix of pi_+ for any kind."""
        if self.kind == CUSTOM:
            return self.matrix if mode == EXACT else np.asarray(self.matrix, dtype=float)
        return SplittingSpec.from_callable(self.dim, lambda a: _builtin_plus(self.kind, a), mode).matrix

    def plus(self, a: LieElement) -> LieElement:
        if a.dim != self.dim:
            raise DimensionMismatchError(f"Splitting acts on gl({self.dim}), got dim {a.dim}.")
        if self.kind != CUSTOM:
            return _builtin_plus(self.kind, a)
        if a.mode == EXACT and self.matrix.dtype != object:
            raise ModeMismatchError("A floating-point custom splitting cannot act on exact elements.")
        matrix = self.matrix if a.mode == EXACT else np.asarray(self.matrix, dtype=float)
        return unvectorize(matrix @ vectorize(a), self.dim, a.mode)

    def minus(self, a: LieElement) -> LieElement:
        return a - self.plus(a)

    def with_report(self, report: ValidationReport) -> "SplittingSpec":
        return replace(self, validated=report.validated, report=report)


def _has_exact_entries(matrix) -> bool:
    return any(isinstance(v, (str, Fraction)) for v in np.asarray(matrix, dtype=object).flat)


def _builtin_plus(kind: str, a: LieElement) -> LieElement:
    if kind == LOWER_TRIANGULAR:
        return LieElement(np.tril(a.entries), a.mode)
    if kind == QR_SKEW:
        strict = np.tril(a.entries, -1)
        return LieElement(strict - strict.T, a.mode)
    raise ValueError(f"'{kind}' is not a built-in splitting.")


def half_diagonal_spec(dim: int) -> SplittingSpec:
    """
    pi_+ = strictly-lower part + 1/2 diagonal part. Satisfies the R-matrix
    identity on gl(n) but is not a projector.
    """
    def plus(a: LieElement) -> LieElement:
        strict = np.tril(a.entries, -1)
        diagonal = np.diag(np.diag(a.entries))
        return LieElement(strict + diagonal * Fraction(1, 2), a.mode)
    return SplittingSpec.from_callable(dim, plus, EXACT)


def project(spec: SplittingSpec, side: str, a: LieElement) -> LieElement:
    if side == PLUS:
        return spec.plus(a)
    if side == MINUS:
        return spec.minus(a)
    raise ValueError(f"Side must be '+' or '-', got {side!r}.")


def r_matrix(spec: SplittingSpec, a: LieElement) -> LieElement:
    """R := id - 2 pi_+."""
    return a - spec.plus(a) * 2


def post_lie(spec: SplittingSpec, a: LieElement, b: LieElement) -> LieElement:
    """a |> b := -[pi_+(a), b]."""
    return -bracket(spec.plus(a), b)


def double_bracket(spec: SplittingSpec, a: LieElement, b: LieElement) -> LieElement:
    """[[a, b]] := [pi_-(a), b] + [a, pi_-(b)] - [a, b]."""
    return bracket(spec.minus(a), b) + bracket(a, spec.minus(b)) - bracket(a, b)


def double_bracket_forms(spec: SplittingSpec, a: LieElement, b: LieElement) -> tuple[LieElement, LieElement, LieElement]:
    """The three defining expressions of the double bracket."""
    first = double_bracket(spec, a, b)
    second = bracket(spec.minus(a), spec.minus(b)) - bracket(spec.plus(a), spec.plus(b))
    third = post_lie(spec, a, b) - post_lie(spec, b, a) + bracket(a, b)
    return first, second, third


def black_product(spec: SplittingSpec, a: LieElement, b: LieElement) -> LieElement:
    """a |>> b := a |> b + [a, b] = [pi_-(a), b]."""
    return post_lie(spec, a, b) + bracket(a, b)


def succ_product(spec: SplittingSpec, a: LieElement, b: LieElement) -> LieElement:
    """a > b := a |> b + 1/2 [a, b] = [R(a)/2, b]."""
    return post_lie(spec, a, b) + bracket(a, b) * Fraction(1, 2)


def associator(product, x: LieElement, y: LieElement, z: LieElement) -> LieElement:
    return product(x, product(y, z)) - product(product(x, y), z)


def _norm(a: LieElement) -> float:
    return a.frobenius_norm()


def mybe_residual(spec: SplittingSpec, side: str, x: LieElement, y: LieElement) -> float:
    px, py = project(spec, side, x), project(spec, side, y)
    lhs = bracket(px, py) + project(spec, side, bracket(x, y))
    rhs = project(spec, side, bracket(px, y) + bracket(x, py))
    return _norm(lhs - rhs)


def mcybe_residual(spec: SplittingSpec, x: LieElement, y: LieElement) -> float:
    rx, ry = r_matrix(spec, x), r_matrix(spec, y)
    lhs = bracket(rx, ry) - r_matrix(spec, bracket(rx, y) + bracket(x, ry))
    return _norm(lhs + bracket(x, y))


def image_bases(spec: SplittingSpec) -> tuple[np.ndarray, np.ndarray]:
    """Orthonormal bases (on column-major vectors) of the images of pi_+ and pi_-."""
    plus = spec.coefficient_matrix(NUMERIC)
    minus = np.eye(plus.shape[0]) - plus
    return scipy.linalg.orth(plus), scipy.linalg.orth(minus)


def _distance_to_image(a: LieElement, basis: np.ndarray) -> float:
    v = np.asarray(vectorize(a), dtype=float)
    return float(np.linalg.norm(v - basis @ (basis.T @ v)))


def closure_residuals(spec: SplittingSpec, x: LieElement, y: LieElement, images=None) -> tuple[float, float]:
    """
    Projector splittings: ||pi_-[pi_+ x, pi_+ y]|| and ||pi_+[pi_- x, pi_- y]||.
    Otherwise, with images from image_bases: distance of [pi_+- x, pi_+- y] to the image of pi_+-.
    """
    plus_pair = bracket(spec.plus(x), spec.plus(y))
    minus_pair = bracket(spec.minus(x), spec.minus(y))
    if images is None:
        return _norm(spec.minus(plus_pair)), _norm(spec.plus(minus_pair))
    plus_image, minus_image = images
    return _distance_to_image(plus_pair.to_numeric(), plus_image), _distance_to_image(minus_pair.to_numeric(), minus_image)


def post_lie_axiom_residuals(spec: SplittingSpec, x: LieElement, y: LieElement, z: LieElement) -> tuple[float, float]:
    def tri(a, b):
        return post_lie(spec, a, b)
    first = tri(x, bracket(y, z)) - bracket(tri(x, y), z) - bracket(y, tri(x, z))
    second = tri(bracket(x, y), z) - associator(tri, x, y, z) + associator(tri, y, x, z)
    return _norm(first), _norm(second)


def black_post_lie_residuals(spec: SplittingSpec, x: LieElement, y: LieElement, z: LieElement) -> tuple[float, float]:
    """Post-Lie axioms for (g, -[.,.], |>>)."""
    def neg_bracket(a, b):
        return -bracket(a, b)

    def blk(a, b):
        return black_product(spec, a, b)
    first = blk(x, neg_bracket(y, z)) - neg_bracket(blk(x, y), z) - neg_bracket(y, blk(x, z))
    second = blk(neg_bracket(x, y), z) - associator(blk, x, y, z) + associator(blk, y, x, z)
    return _norm(first), _norm(second)


def double_jacobi_residual(spec: SplittingSpec, x: LieElement, y: LieElement, z: LieElement) -> float:
    def dbl(a, b):
        return double_bracket(spec, a, b)
    return _norm(dbl(x, dbl(y, z)) + dbl(y, dbl(z, x)) + dbl(z, dbl(x, y)))


def subalgebra_relation_residuals(spec: SplittingSpec, x: LieElement, y: LieElement) -> tuple[float, float]:
    """pi_-([[x,y]]) = [pi_- x, pi_- y] and pi_+([[x,y]]) = -[pi_+ x, pi_+ y]."""
    dbl = double_bracket(spec, x, y)
    minus_side = spec.minus(dbl) - bracket(spec.minus(x), spec.minus(y))
    plus_side = spec.plus(dbl) + bracket(spec.plus(x), spec.plus(y))
    return _norm(minus_side), _norm(plus_side)


def succ_associator_residual(spec: SplittingSpec, x: LieElement, y: LieElement, z: LieElement) -> float:
    def succ(a, b):
        return succ_product(spec, a, b)
    lhs = associator(succ, x, y, z) - associator(succ, y, x, z)
    return _norm(lhs + bracket(bracket(x, y), z) * Fraction(1, 4))


def random_samples(dim: int, count: int, rng: np.random.Generator) -> list[LieElement]:
    return [LieElement(rng.uniform(-1.0, 1.0, size=(dim, dim)), NUMERIC) for _ in range(count)]


def random_pairs(dim: int, count: int, rng: np.random.Generator) -> list[tuple[LieElement, LieElement]]:
    flat = random_samples(dim, 2 * count, rng)
    return list(zip(flat[0::2], flat[1::2]))


def validate_splitting(spec: SplittingSpec, samples, tol: float | None = None, seed: int | None = None) -> ValidationReport:
    """Evaluates the R-matrix identities on sample pairs; never raises on failure."""
    samples = list(samples)
    if not samples:
        raise LieAlgebraError("validate_splitting needs at least one sample pair.")
    tol = settings.VALIDATION_TOL if tol is None else tol
    worst = dict.fromkeys(RESIDUAL_NAMES, 0.0)
    images = None if spec.is_projector() else image_bases(spec)
    for x, y in samples:
        closure_plus, closure_minus = closure_residuals(spec, x, y, images)
        current = {
            "mybe_plus": mybe_residual(spec, PLUS, x, y),
            "mybe_minus": mybe_residual(spec, MINUS, x, y),
            "mcybe": mcybe_residual(spec, x, y),
            "closure_plus": closure_plus,
            "closure_minus": closure_minus,
        }
        for name, value in current.items():
            worst[name] = max(worst[name], value)
    validated = all(value <= tol for value in worst.values())
    report = ValidationReport(spec.kind, spec.dim, len(samples), seed, tol, worst, validated)
    if validated:
        logger.info(f"Splitting {spec.kind} on gl({spec.dim}) validated on {len(samples)} samples.")
    else:
        logger.warning(f"Splitting {spec.kind} on gl({spec.dim}) failed: {', '.join(report.failures())}")
    return report


def certify(spec: SplittingSpec, count: int | None = None, seed: int | None = None, tol: float | None = None) -> SplittingSpec:
    """Validates on seeded random pairs and returns the SplittingSpec carrying its report."""
    count = settings.VALIDATION_SAMPLES if count is None else count
    seed = settings.SEED if seed is None else seed
    rng = np.random.default_rng(seed)
    report = validate_splitting(spec, random_pairs(spec.dim, count, rng), tol=tol, seed=seed)
    return spec.with_report(report)
