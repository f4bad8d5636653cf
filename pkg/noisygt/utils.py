# noisygt/utils.py
import math
from fractions import Fraction
from typing import Sequence, Union

import numpy as np

from .errors import ParameterRangeError

SeedLike = Union[None, int, Sequence[int], np.random.SeedSequence, np.random.Generator]
Rational = Union[int, float, str, Fraction]


def parse_fraction(value: Rational) -> Fraction:
    """Parses '3/4', '0.008', ints and Fractions into an exact Fraction.

    Floats go through their shortest repr so that 0.1 becomes 1/10, not the binary expansion.
    """
    if isinstance(value, Fraction):
        return value
    if isinstance(value, float):
        value = repr(value)
    try:
        return Fraction(str(value).strip())
    except (ValueError, ZeroDivisionError) as e:
        raise ParameterRangeError(f"Not a rational number: {value!r}") from e


def is_power_of_two(value: int) -> bool:
    return value > 0 and value & (value - 1) == 0


def ceil_log2(value: Union[int, Fraction]) -> int:
    """Smallest integer e with 2**e >= value (value > 0)."""
    value = Fraction(value)
    if value <= 0:
        raise ParameterRangeError(f"ceil_log2 needs a positive argument, got {value}")
    exponent = math.ceil(math.log2(value))  # float estimate, corrected exactly below
    while Fraction(2) ** exponent < value:
        exponent += 1
    while Fraction(2) ** (exponent - 1) >= value:
        exponent -= 1
    return exponent


def floor_log2(value: Union[int, Fraction]) -> int:
    """Largest integer e with 2**e <= value (value > 0)."""
    value = Fraction(value)
    exponent = ceil_log2(value)
    return exponent if Fraction(2) ** exponent == value else exponent - 1


def largest_power_of_two_below(bound: Fraction) -> Fraction:
    """Largest 2**-j (j >= 1) strictly below `bound`, for 0 < bound <= 1."""
    if not 0 < bound <= 1:
        raise ParameterRangeError(f"Bound must lie in (0, 1], got {bound}")
    candidate = Fraction(1, 2)
    while candidate >= bound:
        candidate /= 2
    return candidate


def largest_grid_value_below(bound: Fraction, denominator: int = 1024) -> Fraction:
    """Largest non-negative multiple of 1/denominator strictly below `bound` (0 if none)."""
    if bound <= 0:
        return Fraction(0)
    steps = math.ceil(bound * denominator) - 1
    return Fraction(max(steps, 0), denominator)


def binomial_prefix_sum(a: int, b: int) -> int:
    """sum_{i <= b} C(a, i); b may exceed a, in which case the sum is 2**a."""
    if a < 0 or b < 0:
        raise ParameterRangeError(f"Binomial prefix sum needs non-negative arguments, got ({a}, {b})")
    return sum(math.comb(a, i) for i in range(min(a, b) + 1))


def make_rng(seed: SeedLike) -> np.random.Generator:
    return np.random.default_rng(seed)


def derive_rng(seed: int, *indices: int) -> np.random.Generator:
    """Independent stream for (seed, indices...), stable across runs and thread schedules."""
    return np.random.default_rng([seed, *indices])
