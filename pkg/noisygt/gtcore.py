# noisygt/gtcore.py
"""Bit vectors, sparse supports, measurement matrices and the disjunctive (OR) encoding.

Everything is 0-based. Positions of a BitVec print left to right, so '0010' has bit 2 set.
"""
import logging
from dataclasses import dataclass
from functools import cached_property
from typing import Iterable, Iterator, List, Sequence, Tuple

import numpy as np

from .errors import ColumnWeightError, DimensionMismatchError, FormatError, ParameterRangeError

logger = logging.getLogger("noisygt")


def _frozen_bits(values) -> np.ndarray:
    bits = np.array(values, dtype=np.uint8).reshape(-1)
    if bits.size and bits.max() > 1:
        raise ParameterRangeError("Bit vectors may only hold 0 and 1")
    bits.setflags(write=False)
    return bits


class BitVec:
    """Immutable binary vector."""

    __slots__ = ("bits",)

    def __init__(self, bits: Iterable[int]):
        object.__setattr__(self, "bits", _frozen_bits(list(bits) if not isinstance(bits, np.ndarray) else bits))

    def __setattr__(self, name, value):
        raise AttributeError("BitVec is immutable")

    @classmethod
    def zeros(cls, length: int) -> "BitVec":
        return cls(np.zeros(length, dtype=np.uint8))

    @classmethod
    def ones(cls, length: int) -> "BitVec":
        return cls(np.ones(length, dtype=np.uint8))

    @classmethod
    def from_string(cls, text: str) -> "BitVec":
        text = text.strip()
        if any(ch not in "01" for ch in text):
            raise FormatError(f"Bit string may only contain '0' and '1', got {text!r}")
        return cls(np.frombuffer(text.encode("ascii"), dtype=np.uint8) - ord("0"))

    @classmethod
    def from_indices(cls, length: int, indices: Iterable[int]) -> "BitVec":
        bits = np.zeros(length, dtype=np.uint8)
        idx = np.fromiter(indices, dtype=np.int64)
        if idx.size and (idx.min() < 0 or idx.max() >= length):
            raise DimensionMismatchError(f"Index out of range for a vector of length {length}")
        bits[idx] = 1
        return cls(bits)

    def __len__(self) -> int:
        return int(self.bits.size)

    @property
    def weight(self) -> int:
        return int(np.count_nonzero(self.bits))

    def one_positions(self) -> Tuple[int, ...]:
        return tuple(int(i) for i in np.flatnonzero(self.bits))

    def zero_positions(self) -> Tuple[int, ...]:
        return tuple(int(i) for i in np.flatnonzero(self.bits == 0))

    def to_string(self) -> str:
        return (self.bits + ord("0")).tobytes().decode("ascii")

    def to_int(self) -> int:
        """Bit i of the result is position i of the vector."""
        if not len(self):
            return 0
        return int.from_bytes(np.packbits(self.bits, bitorder="little").tobytes(), "little")

    def _check_length(self, other: "BitVec") -> None:
        if len(self) != len(other):
            raise DimensionMismatchError(f"Bit vectors have different lengths: {len(self)} vs {len(other)}")

    def __or__(self, other: "BitVec") -> "BitVec":
        self._check_length(other)
        return BitVec(self.bits | other.bits)

    def __and__(self, other: "BitVec") -> "BitVec":
        self._check_length(other)
        return BitVec(self.bits & other.bits)

    def __le__(self, other: "BitVec") -> bool:
        """Bitwise order: every 1 of self is a 1 of other."""
        self._check_length(other)
        return bool(np.all(self.bits <= other.bits))

    def __eq__(self, other) -> bool:
        """Unlike the bitwise operators, accepts any length: vectors of different lengths are unequal."""
        if not isinstance(other, BitVec):
            return NotImplemented
        return len(self) == len(other) and bool(np.array_equal(self.bits, other.bits))

    def __hash__(self) -> int:
        return hash((len(self), self.bits.tobytes()))

    def __repr__(self) -> str:
        text = self.to_string()
        return f"BitVec('{text if len(text) <= 64 else text[:61] + '...'}')"


@dataclass(frozen=True)
class SupportSet:
    """A sparse boolean vector over [0, universe) stored as its sorted support."""

    universe: int
    indices: Tuple[int, ...] = ()

    def __post_init__(self):
        if self.universe < 0:
            raise ParameterRangeError(f"Universe must be non-negative, got {self.universe}")
        indices = tuple(int(i) for i in self.indices)
        object.__setattr__(self, "indices", indices)
        for prev, cur in zip(indices, indices[1:]):
            if cur <= prev:
                raise ParameterRangeError(f"Support indices must be strictly increasing, got {indices}")
        if indices and (indices[0] < 0 or indices[-1] >= self.universe):
            raise DimensionMismatchError(f"Support index out of range for universe {self.universe}: {indices}")

    @classmethod
    def of(cls, universe: int, indices: Iterable[int]) -> "SupportSet":
        return cls(universe, tuple(sorted(set(int(i) for i in indices))))

    @classmethod
    def from_bitvec(cls, vec: BitVec) -> "SupportSet":
        return cls(len(vec), vec.one_positions())

    @property
    def weight(self) -> int:
        return len(self.indices)

    def __len__(self) -> int:
        return len(self.indices)

    def __iter__(self) -> Iterator[int]:
        return iter(self.indices)

    def __contains__(self, item: int) -> bool:
        return item in set(self.indices)

    def to_bitvec(self) -> BitVec:
        return BitVec.from_indices(self.universe, self.indices)

    def _check_universe(self, other: "SupportSet") -> None:
        if self.universe != other.universe:
            raise DimensionMismatchError(f"Supports live in different universes: {self.universe} vs {other.universe}")

    def union(self, other: "SupportSet") -> "SupportSet":
        self._check_universe(other)
        return SupportSet.of(self.universe, set(self.indices) | set(other.indices))

    def difference(self, other: "SupportSet") -> "SupportSet":
        self._check_universe(other)
        return SupportSet.of(self.universe, set(self.indices) - set(other.indices))

    def issubset(self, other: "SupportSet") -> bool:
        self._check_universe(other)
        return set(self.indices) <= set(other.indices)

    def issuperset(self, other: "SupportSet") -> bool:
        return other.issubset(self)


def random_support(universe: int, sparsity: int, rng: np.random.Generator) -> SupportSet:
    """Uniformly random support of exactly `sparsity` indices."""
    if not 0 <= sparsity <= universe:
        raise ParameterRangeError(f"Cannot draw {sparsity} distinct indices from a universe of {universe}")
    chosen = rng.choice(universe, size=sparsity, replace=False)
    return SupportSet.of(universe, chosen.tolist())


@dataclass(frozen=True)
class NoiseBudget:
    """Up to e0 flips 0->1 (false positives) and e1 flips 1->0 (false negatives)."""

    e0: int = 0
    e1: int = 0

    def __post_init__(self):
        if self.e0 < 0 or self.e1 < 0:
            raise ParameterRangeError(f"Noise budgets must be non-negative, got ({self.e0}, {self.e1})")

    def swapped(self) -> "NoiseBudget":
        return NoiseBudget(self.e1, self.e0)


# Reconstruction accuracy (e'0, e'1) has the same shape as a noise budget.
AccuracyBudget = NoiseBudget


@dataclass(frozen=True, eq=False)
class BitMatrix:
    """Binary measurement matrix with `rows` tests over `cols` items, stored row-sparse."""

    rows: int
    cols: int
    row_supports: Tuple[Tuple[int, ...], ...]

    def __post_init__(self):
        if self.rows < 0 or self.cols < 0:
            raise ParameterRangeError(f"Matrix shape must be non-negative, got {self.rows}x{self.cols}")
        supports = tuple(tuple(int(c) for c in row) for row in self.row_supports)
        if len(supports) != self.rows:
            raise DimensionMismatchError(f"Expected {self.rows} row supports, got {len(supports)}")
        for r, row in enumerate(supports):
            for prev, cur in zip(row, row[1:]):
                if cur <= prev:
                    raise ParameterRangeError(f"Row {r} indices must be strictly increasing")
            if row and (row[0] < 0 or row[-1] >= self.cols):
                raise DimensionMismatchError(f"Row {r} has a column index outside [0, {self.cols})")
        object.__setattr__(self, "row_supports", supports)

    @classmethod
    def from_column_supports(cls, rows: int, column_supports: Sequence[Sequence[int]]) -> "BitMatrix":
        per_row: List[List[int]] = [[] for _ in range(rows)]
        for col, support in enumerate(column_supports):
            for r in support:
                if not 0 <= r < rows:
                    raise DimensionMismatchError(f"Column {col} has a row index outside [0, {rows})")
                per_row[r].append(col)
        return cls(rows, len(column_supports), tuple(tuple(sorted(set(row))) for row in per_row))

    @classmethod
    def from_dense(cls, dense: Sequence[Sequence[int]]) -> "BitMatrix":
        array = np.asarray(dense, dtype=np.uint8)
        if array.ndim != 2:
            raise DimensionMismatchError("Dense matrix must be two-dimensional")
        return cls(array.shape[0], array.shape[1], tuple(tuple(np.flatnonzero(row).tolist()) for row in array))

    @classmethod
    def identity(cls, size: int) -> "BitMatrix":
        return cls(size, size, tuple((i,) for i in range(size)))

    def to_dense(self) -> np.ndarray:
        dense = np.zeros((self.rows, self.cols), dtype=np.uint8)
        for r, row in enumerate(self.row_supports):
            dense[r, list(row)] = 1
        return dense

    @cached_property
    def column_supports(self) -> Tuple[np.ndarray, ...]:
        per_col: List[List[int]] = [[] for _ in range(self.cols)]
        for r, row in enumerate(self.row_supports):
            for c in row:
                per_col[c].append(r)
        columns = []
        for rows_of_col in per_col:
            arr = np.asarray(rows_of_col, dtype=np.int64)
            arr.setflags(write=False)
            columns.append(arr)
        return tuple(columns)

    @cached_property
    def column_weights(self) -> np.ndarray:
        weights = np.fromiter((col.size for col in self.column_supports), dtype=np.int64, count=self.cols)
        weights.setflags(write=False)
        return weights

    def column_weight(self, col: int) -> int:
        return int(self.column_weights[col])

    def uniform_column_weight(self) -> int:
        """The common column weight; ColumnWeightError when columns differ."""
        if self.cols == 0:
            return 0
        weights = self.column_weights
        if not np.all(weights == weights[0]):
            raise ColumnWeightError(
                f"Columns have non-uniform weights (min {int(weights.min())}, max {int(weights.max())})"
            )
        return int(weights[0])

    @cached_property
    def column_index(self) -> np.ndarray:
        """(cols, T) array of the rows of each column; requires uniform column weight T."""
        weight = self.uniform_column_weight()
        index = np.zeros((self.cols, weight), dtype=np.int64)
        for c, col in enumerate(self.column_supports):
            index[c] = col
        index.setflags(write=False)
        return index

    @cached_property
    def column_masks(self) -> Tuple[int, ...]:
        """Each column as a Python int bitset over rows (bit r = row r)."""
        return tuple(sum(1 << int(r) for r in col) for col in self.column_supports)

    def __eq__(self, other) -> bool:
        if not isinstance(other, BitMatrix):
            return NotImplemented
        return (self.rows, self.cols, self.row_supports) == (other.rows, other.cols, other.row_supports)

    def __hash__(self) -> int:
        return hash((self.rows, self.cols, self.row_supports))

    def __repr__(self) -> str:
        return f"BitMatrix(rows={self.rows}, cols={self.cols}, ones={sum(len(r) for r in self.row_supports)})"


def encode(A: BitMatrix, x: SupportSet) -> BitVec:
    """Bitwise OR of the columns of A selected by the support of x."""
    if x.universe != A.cols:
        raise DimensionMismatchError(f"Support universe {x.universe} does not match matrix with {A.cols} columns")
    bits = np.zeros(A.rows, dtype=np.uint8)
    for col in x.indices:
        bits[A.column_supports[col]] = 1
    return BitVec(bits)


def closeness_deltas(a: BitVec, b: BitVec) -> Tuple[int, int]:
    """(n01, n10): positions going 0->1 and 1->0 when moving from a to b."""
    if len(a) != len(b):
        raise DimensionMismatchError(f"Bit vectors have different lengths: {len(a)} vs {len(b)}")
    n01 = int(np.count_nonzero((a.bits == 0) & (b.bits == 1)))
    n10 = int(np.count_nonzero((a.bits == 1) & (b.bits == 0)))
    return n01, n10


def is_close(a: BitVec, b: BitVec, budget: NoiseBudget) -> bool:
    n01, n10 = closeness_deltas(a, b)
    return n01 <= budget.e0 and n10 <= budget.e1
