# lie/algebra.py - v0.1.0
import logging
import threading
from dataclasses import dataclass
from fractions import Fraction
from functools import partial

import numpy as np
import scipy.linalg
import sympy

from config import settings
from utils.helpers import parse_rational

logger = logging.getLogger(__name__)

NUMERIC = "numeric"
EXACT = "exact"


class LieAlgebraError(Exception):
    """Base exception for matrix Lie algebra arithmetic."""
    def __init__(self, message, errors=None):
        super().__init__(message)
        self.errors = errors if errors is not None else []


class DimensionMismatchError(LieAlgebraError):
    pass


class ModeMismatchError(LieAlgebraError):
    pass


class NonFiniteError(LieAlgebraError):
    pass


class BranchError(LieAlgebraError):
    """Spectrum touches the closed negative real axis; no principal logarithm."""


class BCHDomainError(LieAlgebraError):
    pass


class SingularGroupElementError(LieAlgebraError):
    pass


def hadamard_ratio(arr: np.ndarray) -> float:
    """|det| over the product of column norms; 1 for orthogonal columns, 0 when singular."""
    norms = np.linalg.norm(arr, axis=0)
    if np.any(norms == 0.0):
        return 0.0
    return float(abs(np.linalg.det(arr / norms)))


def _as_exact_array(entries) -> np.ndarray:
    arr = np.asarray(entries, dtype=object)
    out = np.empty(arr.shape, dtype=object)
    for idx, value in np.ndenumerate(arr):
        out[idx] = parse_rational(value) if not isinstance(value, Fraction) else value
    return out


def _freeze(entries, mode: str) -> np.ndarray:
    if mode == EXACT:
        arr = _as_exact_array(entries)
    elif mode == NUMERIC:
        arr = np.array(entries, dtype=float)
    else:
        raise LieAlgebraError(f"Unknown mode '{mode}'.")
    if arr.ndim != 2 or arr.shape[0] != arr.shape[1] or arr.shape[0] == 0:
        raise DimensionMismatchError(f"Entries must form a non-empty square matrix, got shape {arr.shape}.")
    arr.setflags(write=False)
    return arr


def _detect_mode(rows) -> str:
    for row in rows:
        for value in row:
            if isinstance(value, (str, Fraction)):
                return EXACT
    return NUMERIC


@dataclass(frozen=True, eq=False)
class LieElement:
    """Dense n x n matrix regarded as an element of a matrix Lie algebra."""
    entries: np.ndarray
    mode: str = NUMERIC

    def __post_init__(self):
        object.__setattr__(self, "entries", _freeze(self.entries, self.mode))

    @property
    def dim(self) -> int:
        return self.entries.shape[0]

    @classmethod
    def from_rows(cls, rows, mode: str | None = None) -> "LieElement":
        return cls(np.asarray(rows, dtype=object), mode or _detect_mode(rows))

    @classmethod
    def zeros(cls, dim: int, mode: str = NUMERIC) -> "LieElement":
        if mode == EXACT:
            return cls(np.full((dim, dim), Fraction(0), dtype=object), EXACT)
        return cls(np.zeros((dim, dim)), NUMERIC)

    @classmethod
    def identity(cls, dim: int, mode: str = NUMERIC) -> "LieElement":
        base = cls.zeros(dim, mode).entries.copy()
        for i in range(dim):
            base[i, i] = Fraction(1) if mode == EXACT else 1.0
        return cls(base, mode)

    @classmethod
    def matrix_unit(cls, dim: int, i: int, j: int, mode: str = NUMERIC) -> "LieElement":
        base = cls.zeros(dim, mode).entries.copy()
        base[i, j] = Fraction(1) if mode == EXACT else 1.0
        return cls(base, mode)

    def _check(self, other: "LieElement"):
        if not isinstance(other, LieElement):
            raise TypeError(f"Expected LieElement, got {type(other).__name__}")
        if other.dim != self.dim:
            raise DimensionMismatchError(f"Dimension mismatch: {self.dim} vs {other.dim}.")
        if other.mode != self.mode:
            raise ModeMismatchError(f"Cannot mix {self.mode} and {other.mode} elements.")

    def _scalar(self, value):
        if self.mode == EXACT:
            if isinstance(value, float):
                raise ModeMismatchError("Exact elements only scale by rationals.")
            return Fraction(value)
        return float(value)

    def __add__(self, other: "LieElement") -> "LieElement":
        self._check(other)
        return LieElement(self.entries + other.entries, self.mode)

    def __sub__(self, other: "LieElement") -> "LieElement":
        self._check(other)
        return LieElement(self.entries - other.entries, self.mode)

    def __neg__(self) -> "LieElement":
        return LieElement(-self.entries, self.mode)

    def __mul__(self, scalar) -> "LieElement":
        return LieElement(self.entries * self._scalar(scalar), self.mode)

    __rmul__ = __mul__

    def transpose(self) -> "LieElement":
        return LieElement(self.entries.T, self.mode)

    def frobenius_norm(self) -> float:
        if self.mode == EXACT:
            return float(np.sqrt(float(sum(v * v for v in self.entries.flat))))
        return float(np.linalg.norm(self.entries, "fro"))

    def to_numeric(self) -> "LieElement":
        if self.mode == NUMERIC:
            return self
        return LieElement(self.entries.astype(float), NUMERIC)

    def to_exact(self) -> "LieElement":
        if self.mode == EXACT:
            return self
        return LieElement([[Fraction(v) for v in row] for row in self.entries.tolist()], EXACT)

    def is_zero(self) -> bool:
        return all(v == 0 for v in self.entries.flat)

    def equals(self, other: "LieElement", tol: float = 0.0) -> bool:
        self._check(other)
        if self.mode == EXACT:
            return (self - other).is_zero()
        return (self - other).frobenius_norm() <= tol

    def __repr__(self):
        return f"LieElement(dim={self.dim}, mode={self.mode}, rows={self.entries.tolist()})"


@dataclass(frozen=True, eq=False)
class GroupElement:
    """Invertible n x n matrix; exponentials and factors g+/g- live here."""
    entries: np.ndarray
    mode: str = NUMERIC

    def __post_init__(self):
        arr = _freeze(self.entries, self.mode)
        if self.mode == NUMERIC:
            if not np.all(np.isfinite(arr)):
                raise NonFiniteError("Group element has non-finite entries.")
            ratio = hadamard_ratio(arr)
            if ratio <= settings.DET_FLOOR:
                raise SingularGroupElementError(
                    f"|det| relative to its column norms is {ratio:.3e}, below the floor {settings.DET_FLOOR:.1e}.")
        elif sympy.Matrix(arr.tolist()).det() == 0:
            raise SingularGroupElementError("Exact group element is singular.")
        object.__setattr__(self, "entries", arr)

    @property
    def dim(self) -> int:
        return self.entries.shape[0]

    @classmethod
    def identity(cls, dim: int, mode: str = NUMERIC) -> "GroupElement":
        return cls(LieElement.identity(dim, mode).entries, mode)

    def __matmul__(self, other: "GroupElement") -> "GroupElement":
        if other.dim != self.dim:
            raise DimensionMismatchError(f"Dimension mismatch: {self.dim} vs {other.dim}.")
        if other.mode != self.mode:
            raise ModeMismatchError(f"Cannot mix {self.mode} and {other.mode} elements.")
        return GroupElement(self.entries @ other.entries, self.mode)

    def inverse(self) -> "GroupElement":
        if self.mode == EXACT:
            inv = sympy.Matrix(self.entries.tolist()).inv()
            return GroupElement([[Fraction(int(v.p), int(v.q)) for v in row] for row in inv.tolist()], EXACT)
        return GroupElement(np.linalg.inv(self.entries), NUMERIC)

    def conjugate(self, a: LieElement) -> LieElement:
        """g^{-1} a g."""
        if a.dim != self.dim:
            raise DimensionMismatchError(f"Dimension mismatch: {self.dim} vs {a.dim}.")
        if self.mode == NUMERIC:
            return LieElement(np.linalg.solve(self.entries, a.entries @ self.entries), NUMERIC)
        return LieElement(self.inverse().entries @ a.entries @ self.entries, EXACT)

    def distance(self, other: "GroupElement") -> float:
        return float(np.linalg.norm(np.asarray(self.entries - other.entries, dtype=float), "fro"))


def vectorize(a: LieElement) -> np.ndarray:
    """Column-major vec(a)."""
    return a.entries.flatten(order="F")


def unvectorize(vec: np.ndarray, dim: int, mode: str) -> LieElement:
    return LieElement(np.asarray(vec).reshape((dim, dim), order="F"), mode)


def bracket(a: LieElement, b: LieElement) -> LieElement:
    """[a, b] = ab - ba."""
    a._check(b)
    return LieElement(a.entries @ b.entries - b.entries @ a.entries, a.mode)


def adjoint(a: LieElement):
    """ad_a as a callable b -> [a, b]."""
    return partial(bracket, a)


def ad_power(a: LieElement, b: LieElement, k: int) -> LieElement:
    """ad_a^k(b)."""
    ad = adjoint(a)
    out = b
    for _ in range(k):
        out = ad(out)
    return out


def _require_numeric(*elements):
    for element in elements:
        if element.mode != NUMERIC:
            raise ModeMismatchError("Exponentials and logarithms are numeric-only.")
        if not np.all(np.isfinite(element.entries)):
            raise NonFiniteError("Input has non-finite entries.")


def expm(a: LieElement) -> GroupElement:
    _require_numeric(a)
    return GroupElement(scipy.linalg.expm(a.entries), NUMERIC)


# scipy.linalg.logm estimates norms with the global numpy RNG
_LOGM_LOCK = threading.Lock()


def _principal_log(arr: np.ndarray):
    with _LOGM_LOCK:
        state = np.random.get_state()
        np.random.seed(0)
        try:
            return scipy.linalg.logm(arr, disp=False)
        finally:
            np.random.set_state(state)


def logm(g: GroupElement) -> LieElement:
    """Principal matrix logarithm; refuses spectra on the closed negative real axis."""
    _require_numeric(g)
    eigenvalues = scipy.linalg.eigvals(g.entries)
    scale = max(1.0, float(np.max(np.abs(eigenvalues))))
    bad = [lam for lam in eigenvalues if abs(lam.imag) <= 1e-12 * scale and lam.real <= 0.0]
    if bad:
        raise BranchError("Spectrum meets the closed negative real axis; principal log undefined.",
                          errors=[complex(lam) for lam in bad])
    log, errest = _principal_log(g.entries)
    if np.iscomplexobj(log):
        if np.max(np.abs(log.imag)) > 1e-8 * max(1.0, float(np.max(np.abs(log.real)))):
            raise BranchError("Principal logarithm is not real for this real matrix.")
        log = log.real
    logger.debug(f"logm error estimate {errest:.3e}")
    return LieElement(log, NUMERIC)


def _check_radius(a: LieElement, b: LieElement, radius: float | None):
    radius = settings.BCH_RADIUS if radius is None else radius
    total = a.frobenius_norm() + b.frobenius_norm()
    if total > radius:
        raise BCHDomainError(f"||a||_F + ||b||_F = {total:.3e} exceeds the BCH radius {radius:.3e}.")


def bch(a: LieElement, b: LieElement, radius: float | None = None) -> LieElement:
    """log(exp(a) exp(b)) inside the configured radius."""
    a._check(b)
    _require_numeric(a, b)
    _check_radius(a, b, radius)
    return logm(expm(a) @ expm(b))


def bch_reduced(a: LieElement, b: LieElement, radius: float | None = None) -> LieElement:
    return bch(a, b, radius) - a - b


def bch_series(a: LieElement, b: LieElement, order: int = 4) -> LieElement:
    """Truncated BCH polynomial through the given total degree (at most 4)."""
    if not 1 <= order <= 4:
        raise ValueError(f"bch_series supports orders 1..4, got {order}.")
    half, twelfth, twentyfourth = Fraction(1, 2), Fraction(1, 12), Fraction(1, 24)
    out = a + b
    if order >= 2:
        out = out + bracket(a, b) * half
    if order >= 3:
        out = out + bracket(a, bracket(a, b)) * twelfth + bracket(b, bracket(b, a)) * twelfth
    if order >= 4:
        out = out - bracket(b, bracket(a, bracket(a, b))) * twentyfourth
    return out
