# utils/helpers.py - v0.1.0
import logging
import numbers
from fractions import Fraction

import numpy as np

logger = logging.getLogger(__name__)


def parse_rational(value) -> Fraction:
    """Parses "p/q", integers, decimal strings or Fractions into a Fraction."""
    if isinstance(value, Fraction):
        return value
    if isinstance(value, bool):
        raise ValueError(f"Not a rational entry: {value!r}")
    if isinstance(value, numbers.Rational):
        return Fraction(int(value.numerator), int(value.denominator))
    if isinstance(value, str):
        return Fraction(value.strip())
    if isinstance(value, numbers.Real):
        value = float(value)
        # accept binary floats only when they are short rationals
        candidate = Fraction(value).limit_denominator(10**6)
        if float(candidate) == value:
            return candidate
        raise ValueError(f"Float {value!r} is not an exact short rational.")
    raise ValueError(f"Not a rational entry: {value!r}")


def format_rational(value: Fraction) -> str:
    value = Fraction(value)
    if value.denominator == 1:
        return str(value.numerator)
    return f"{value.numerator}/{value.denominator}"


def format_sci(value: float) -> str:
    """17 significant digits, scientific notation."""
    return format(float(value), ".16e")


def make_rng(seed: int) -> np.random.Generator:
    logger.debug(f"Seeding random generator with {seed}")
    return np.random.default_rng(seed)


def random_rational(rng: np.random.Generator, low: int = -3, high: int = 3, max_den: int = 4) -> Fraction:
    num = int(rng.integers(low * max_den, high * max_den + 1))
    den = int(rng.integers(1, max_den + 1))
    return Fraction(num, den)
