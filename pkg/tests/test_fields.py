# tests/test_fields.py
import itertools

import pytest

from noisygt.errors import InvalidFieldOrderError
from noisygt.fields import ExtensionField, PrimeField, find_irreducible, galois_field


@pytest.mark.parametrize("q", [2, 3, 4, 5, 7, 8, 9, 16])
def test_field_axioms(q):
    F = galois_field(q)
    elements = range(q)
    for a, b in itertools.product(elements, repeat=2):
        assert F.add(a, b) == F.add(b, a)
        assert F.mul(a, b) == F.mul(b, a)
    for a in elements:
        assert F.add(a, 0) == a
        assert F.mul(a, 1) == a
        assert F.mul(a, 0) == 0
    # every non-zero element is invertible
    for a in range(1, q):
        assert any(F.mul(a, b) == 1 for b in range(1, q))
    for a, b, c in itertools.product(range(min(q, 5)), repeat=3):
        assert F.mul(a, F.add(b, c)) == F.add(F.mul(a, b), F.mul(a, c))


def test_field_kinds():
    assert isinstance(galois_field(7), PrimeField)
    F = galois_field(9)
    assert isinstance(F, ExtensionField)
    assert (F.characteristic, F.degree, F.order) == (3, 2, 9)


@pytest.mark.parametrize("q", [0, 1, 6, 12, 100])
def test_invalid_orders(q):
    with pytest.raises(InvalidFieldOrderError):
        galois_field(q)


def test_lexicographically_first_irreducible():
    assert find_irreducible(2, 2) == (1, 1, 1)
    assert find_irreducible(2, 3) == (1, 0, 1, 1)


def test_characteristic_two_addition_is_xor():
    F = galois_field(8)
    for a, b in itertools.product(range(8), repeat=2):
        assert F.add(a, b) == a ^ b


def test_horner_evaluation():
    assert PrimeField(7).evaluate([1, 2, 3], 2) == 3
    F = galois_field(4)
    # the constant polynomial ignores the point
    assert all(F.evaluate([3], point) == 3 for point in range(4))
    assert F.evaluate([], 2) == 0
