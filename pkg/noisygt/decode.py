# noisygt/decode.py
"""Reconstruction from noisy observations.

threshold_decode is the agreement-threshold decoder for codeword-graph matrices: item x is
reported when at least T(1 - nu/gamma) of its T tests came back positive.
"""
import itertools
import logging
from dataclasses import dataclass
from fractions import Fraction
from typing import Callable, FrozenSet, Iterator, List, Optional, Sequence, Tuple

import numpy as np

from .condense import Scheme, SchemeParams
from .config import enumeration_cap
from .errors import (
    ColumnWeightError,
    DimensionMismatchError,
    EnumerationCapError,
    ParameterRangeError,
    SearchExhaustedError,
)
from .gtcore import BitMatrix, BitVec, NoiseBudget, SupportSet
from .utils import Rational, binomial_prefix_sum, parse_fraction

logger = logging.getLogger("noisygt")


@dataclass(frozen=True, eq=False)
class DecodeResult:
    support: SupportSet
    scores: np.ndarray
    threshold_used: Fraction
    required_count: int
    params_used: Optional[SchemeParams] = None

    def __eq__(self, other) -> bool:
        if not isinstance(other, DecodeResult):
            return NotImplemented
        return (
            self.support == other.support
            and self.threshold_used == other.threshold_used
            and self.params_used == other.params_used
            and bool(np.array_equal(self.scores, other.scores))
        )

    __hash__ = None


def _check_observation(A: BitMatrix, y_hat: BitVec) -> None:
    if len(y_hat) != A.rows:
        raise DimensionMismatchError(f"Observation of length {len(y_hat)} does not match {A.rows} matrix rows")


def threshold_decode(
    A: BitMatrix,
    y_hat: BitVec,
    T: int,
    nu_over_gamma: Rational,
    params: Optional[SchemeParams] = None,
) -> DecodeResult:
    """Columns with at least T(1 - nu/gamma) positive tests, compared exactly."""
    _check_observation(A, y_hat)
    ratio = parse_fraction(nu_over_gamma)
    if not 0 <= ratio < 1:
        raise ParameterRangeError(f"nu/gamma must lie in [0, 1), got {ratio}")
    weight = A.uniform_column_weight()
    if A.cols and weight != T:
        raise ColumnWeightError(f"Matrix columns have weight {weight}, expected T={T}")

    threshold = 1 - ratio
    if A.cols:
        scores = y_hat.bits[A.column_index].sum(axis=1, dtype=np.int64)
    else:
        scores = np.zeros(0, dtype=np.int64)
    # count >= T * num / den, cross-multiplied
    selected = scores * threshold.denominator >= T * threshold.numerator
    scores.setflags(write=False)
    support = SupportSet(A.cols, tuple(np.flatnonzero(selected).tolist()))
    required = -(-T * threshold.numerator // threshold.denominator)
    logger.debug(f"Threshold decode: {support.weight} of {A.cols} columns reach {required}/{T} positive tests")
    return DecodeResult(support, scores, threshold, required, params)


@dataclass(frozen=True)
class GuessInstance:
    """Measurement design used for one sparsity guess of the doubling search."""

    matrix: BitMatrix
    T: int
    nu_over_gamma: Fraction
    K: int
    params: Optional[SchemeParams] = None

    @classmethod
    def from_scheme(cls, scheme: Scheme) -> "GuessInstance":
        p = scheme.params
        return cls(scheme.matrix, p.T, p.nu_over_gamma, p.K, p)


@dataclass(frozen=True)
class DoublingResult:
    result: DecodeResult
    guess: int
    rounds: int
    measurements_per_round: Tuple[int, ...]

    @property
    def total_measurements(self) -> int:
        return sum(self.measurements_per_round)


def decode_with_doubling(
    instance_for: Callable[[int], GuessInstance],
    y_hat_provider: Callable[[int, GuessInstance], BitVec],
    max_guess: int,
    K_of: Optional[Callable[[int], int]] = None,
) -> DoublingResult:
    """Guesses D = 1, 2, 4, ... with fresh measurements per round.

    Stops at the first round whose reconstruction weighs at most K_of(guess), by default the
    K of that round's design.
    """
    if max_guess < 1:
        raise ParameterRangeError(f"max_guess must be positive, got {max_guess}")
    measurements: List[int] = []
    guess = 1
    while guess <= max_guess:
        instance = instance_for(guess)
        y_hat = y_hat_provider(guess, instance)
        result = threshold_decode(instance.matrix, y_hat, instance.T, instance.nu_over_gamma, instance.params)
        measurements.append(instance.matrix.rows)
        cap = K_of(guess) if K_of is not None else instance.K
        logger.info(f"Doubling round {len(measurements)}: guess D={guess}, weight {result.support.weight}, cap {cap}")
        if result.support.weight <= cap:
            return DoublingResult(result, guess, len(measurements), tuple(measurements))
        guess *= 2
    raise SearchExhaustedError(f"No sparsity guess up to {max_guess} produced a reconstruction within its cap")


def _sparse_masks(masks: Sequence[int], d: int) -> Iterator[Tuple[Tuple[int, ...], int]]:
    """(support, OR of its column masks) for every support of size <= d, by size then lexicographically."""
    for size in range(min(d, len(masks)) + 1):
        for combo in itertools.combinations(range(len(masks)), size):
            union = 0
            for c in combo:
                union |= masks[c]
            yield combo, union


def is_consistent(encoded: int, y_mask: int, budget: NoiseBudget) -> bool:
    """(A[x], y) are (e0, e1)-close, with both sides as row bitsets."""
    return (y_mask & ~encoded).bit_count() <= budget.e0 and (encoded & ~y_mask).bit_count() <= budget.e1


def sparse_encodings(A: BitMatrix, d: int, cap: Optional[int] = None) -> List[Tuple[Tuple[int, ...], int]]:
    cap = enumeration_cap(cap)
    count = binomial_prefix_sum(A.cols, d)
    if count > cap:
        logger.error(f"{count} supports of size <= {d} exceed the enumeration cap {cap}")
        raise EnumerationCapError(f"{count} supports of size <= {d} exceed the enumeration cap {cap}")
    return list(_sparse_masks(A.column_masks, d))


def oracle_decode_exhaustive(
    A: BitMatrix, y_hat: BitVec, d: int, budget: NoiseBudget, cap: Optional[int] = None
) -> FrozenSet[SupportSet]:
    """Every support of size <= d whose encoding is (e0, e1)-close to y_hat."""
    _check_observation(A, y_hat)
    if d < 0:
        raise ParameterRangeError(f"Sparsity must be non-negative, got {d}")
    y_mask = y_hat.to_int()
    consistent = frozenset(
        SupportSet(A.cols, combo)
        for combo, encoded in sparse_encodings(A, d, cap)
        if is_consistent(encoded, y_mask, budget)
    )
    logger.debug(f"Exhaustive oracle found {len(consistent)} consistent supports of size <= {d}")
    return consistent


@dataclass(frozen=True)
class TwoStageResult:
    first_stage: DecodeResult
    support: SupportSet
    first_stage_tests: int
    second_stage_tests: int

    @property
    def total_tests(self) -> int:
        return self.first_stage_tests + self.second_stage_tests


def two_stage_decode(
    A: BitMatrix,
    y_hat: BitVec,
    T: int,
    nu_over_gamma: Rational,
    confirm: Callable[[int], bool],
    params: Optional[SchemeParams] = None,
) -> TwoStageResult:
    """Threshold decoding followed by one individual test per candidate."""
    first = threshold_decode(A, y_hat, T, nu_over_gamma, params)
    confirmed = tuple(i for i in first.support if confirm(i))
    logger.info(f"Second stage confirmed {len(confirmed)} of {first.support.weight} candidates")
    return TwoStageResult(first, SupportSet(A.cols, confirmed), A.rows, first.support.weight)
