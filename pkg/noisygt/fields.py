# noisygt/fields.py
"""Finite fields GF(q) with elements encoded as integers in [0, q)."""
import itertools
import logging
from functools import lru_cache
from typing import List, Sequence, Tuple, Union

import sympy
import sympy.polys.galoistools as gf
from sympy.polys.domains import ZZ

from .errors import InvalidFieldOrderError

logger = logging.getLogger("noisygt")


class PrimeField:
    """GF(p) by modular arithmetic."""

    def __init__(self, p: int):
        if not sympy.isprime(p):
            raise InvalidFieldOrderError(f"{p} is not prime")
        self.characteristic = p
        self.degree = 1
        self.order = p

    def add(self, a: int, b: int) -> int:
        return (a + b) % self.order

    def mul(self, a: int, b: int) -> int:
        return (a * b) % self.order

    def evaluate(self, coeffs: Sequence[int], point: int) -> int:
        """Horner evaluation; coeffs[k] is the coefficient of X^k."""
        value = 0
        for c in reversed(coeffs):
            value = (value * point + c) % self.order
        return value

    def __repr__(self) -> str:
        return f"PrimeField({self.order})"


def _to_poly(element: int, p: int, degree: int) -> List[int]:
    # base-p digits, most significant first, as galoistools expects
    digits = []
    for _ in range(degree):
        element, digit = divmod(element, p)
        digits.append(digit)
    return gf.gf_strip(digits[::-1])


def _from_poly(poly: Sequence[int], p: int) -> int:
    value = 0
    for c in poly:
        value = value * p + int(c)
    return value


def find_irreducible(p: int, degree: int) -> Tuple[int, ...]:
    """Lexicographically first monic irreducible polynomial of the given degree over GF(p)."""
    for tail in itertools.product(range(p), repeat=degree):
        candidate = [1, *tail]
        if gf.gf_irreducible_p(candidate, p, ZZ):
            return tuple(candidate)
    raise InvalidFieldOrderError(f"No irreducible polynomial of degree {degree} over GF({p})")  # unreachable


class ExtensionField:
    """GF(p^m) as GF(p)[X] modulo a fixed irreducible polynomial."""

    def __init__(self, p: int, degree: int):
        if not sympy.isprime(p) or degree < 2:
            raise InvalidFieldOrderError(f"GF({p}^{degree}) is not a proper extension field")
        self.characteristic = p
        self.degree = degree
        self.order = p**degree
        self.modulus = list(find_irreducible(p, degree))
        logger.debug(f"GF({p}^{degree}) uses modulus {self.modulus} (coefficients, leading first)")
        self._mul_table = self._build_mul_table()

    def _build_mul_table(self) -> List[List[int]]:
        p, m = self.characteristic, self.degree
        polys = [_to_poly(a, p, m) for a in range(self.order)]
        table = []
        for a in range(self.order):
            row = []
            for b in range(self.order):
                product = gf.gf_rem(gf.gf_mul(polys[a], polys[b], p, ZZ), self.modulus, p, ZZ)
                row.append(_from_poly(product, p))
            table.append(row)
        return table

    def add(self, a: int, b: int) -> int:
        p = self.characteristic
        return _from_poly(gf.gf_add(_to_poly(a, p, self.degree), _to_poly(b, p, self.degree), p, ZZ), p)

    def mul(self, a: int, b: int) -> int:
        return self._mul_table[a][b]

    def evaluate(self, coeffs: Sequence[int], point: int) -> int:
        value = 0
        for c in reversed(coeffs):
            value = self.add(self.mul(value, point), c)
        return value

    def __repr__(self) -> str:
        return f"ExtensionField({self.characteristic}^{self.degree})"


Field = Union[PrimeField, ExtensionField]


@lru_cache(maxsize=32)
def galois_field(q: int) -> Field:
    """GF(q) for a prime power q."""
    if q < 2:
        raise InvalidFieldOrderError(f"Field order must be at least 2, got {q}")
    factors = sympy.factorint(q)
    if len(factors) != 1:
        raise InvalidFieldOrderError(f"{q} is not a prime power")
    (p, degree), = factors.items()
    field = PrimeField(int(p)) if degree == 1 else ExtensionField(int(p), int(degree))
    logger.debug(f"Constructed {field!r}")
    return field
