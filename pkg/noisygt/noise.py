# noisygt/noise.py
"""Noise channels: every output stays (e0, e1)-close to the clean observation."""
import itertools
import logging
from dataclasses import dataclass
from enum import Enum
from typing import Iterator, Optional, Sequence, Tuple

import numpy as np

from .config import enumeration_cap
from .errors import DimensionMismatchError, EnumerationCapError, ParameterRangeError
from .gtcore import BitMatrix, BitVec, NoiseBudget, SupportSet, encode
from .utils import SeedLike, binomial_prefix_sum, make_rng

logger = logging.getLogger("noisygt")


class NoiseMode(str, Enum):
    RANDOM = "random"
    GREEDY = "adversarial-greedy"
    EXHAUSTIVE = "exhaustive-worst-case"


@dataclass(frozen=True)
class NoiseSpec:
    budget: NoiseBudget
    mode: NoiseMode = NoiseMode.RANDOM
    seed: SeedLike = 0

    def check_rows(self, rows: int) -> None:
        if self.budget.e0 > rows or self.budget.e1 > rows:
            raise ParameterRangeError(f"Noise budget ({self.budget.e0}, {self.budget.e1}) exceeds the {rows} tests")


@dataclass(frozen=True)
class CorruptionReport:
    observation: BitVec
    false_positives: int
    false_negatives: int
    capped: bool


def apply_random_noise(y: BitVec, budget: NoiseBudget, seed: SeedLike) -> CorruptionReport:
    """Flips min(e0, zeros) random 0s and min(e1, ones) random 1s, zeros drawn first."""
    rng = make_rng(seed)
    bits = np.array(y.bits, dtype=np.uint8)
    zeros = np.flatnonzero(bits == 0)
    ones = np.flatnonzero(bits == 1)
    n_up = min(budget.e0, zeros.size)
    n_down = min(budget.e1, ones.size)
    capped = n_up < budget.e0 or n_down < budget.e1
    if capped:
        logger.debug(f"Budget ({budget.e0}, {budget.e1}) capped at the available flips ({n_up}, {n_down})")
    if n_up:
        bits[rng.choice(zeros, size=n_up, replace=False)] = 1
    if n_down:
        bits[rng.choice(ones, size=n_down, replace=False)] = 0
    return CorruptionReport(BitVec(bits), n_up, n_down, capped)


def corrupt_random(y: BitVec, budget: NoiseBudget, seed: SeedLike) -> BitVec:
    return apply_random_noise(y, budget, seed).observation


def corrupt_adversarial_greedy(
    A: BitMatrix, x: SupportSet, budget: NoiseBudget, params=None
) -> BitVec:
    """Greedy margin attack, a lower bound on what a worst-case adversary can do.

    False negatives drain the weakest support column, preferring rows no other support column
    covers. False positives then feed the non-support column with the highest current count,
    using only rows that are 0 in the clean encoding. Ties go to the lowest index.
    """
    if params is not None and x.weight > params.D:
        raise ParameterRangeError(f"Support of weight {x.weight} exceeds the planned sparsity {params.D}")
    clean = encode(A, x)
    bits = np.array(clean.bits, dtype=np.uint8)
    support = np.zeros(A.cols, dtype=bool)
    support[list(x.indices)] = True
    cover = np.array([sum(1 for c in row if support[c]) for row in A.row_supports], dtype=np.int64)
    scores = np.array([int(bits[col].sum()) for col in A.column_supports], dtype=np.int64)

    lowered = 0
    for _ in range(budget.e1):
        live = np.flatnonzero(support & (scores > 0))
        if not live.size:
            break
        target = int(live[np.argmin(scores[live])])
        rows = A.column_supports[target]
        rows = rows[bits[rows] == 1]
        row = int(rows[np.argmin(cover[rows])])
        bits[row] = 0
        for c in A.row_supports[row]:
            scores[c] -= 1
        lowered += 1

    free = clean.bits == 0
    available = np.array([int(free[col].sum()) for col in A.column_supports], dtype=np.int64)
    raised = 0
    for _ in range(budget.e0):
        candidates = np.flatnonzero(~support & (available > 0))
        if candidates.size:
            target = int(candidates[np.argmax(scores[candidates])])
            col = A.column_supports[target]
            row = int(col[np.flatnonzero(free[col] & (bits[col] == 0))[0]])
        else:
            spare = np.flatnonzero(free & (bits == 0))
            if not spare.size:
                break
            row = int(spare[0])
        bits[row] = 1
        for c in A.row_supports[row]:
            scores[c] += 1
            available[c] -= 1
        raised += 1

    logger.debug(f"Greedy adversary applied {raised} false positives and {lowered} false negatives")
    return BitVec(bits)


def noise_pattern_count(y: BitVec, budget: NoiseBudget) -> int:
    ones = y.weight
    return binomial_prefix_sum(len(y) - ones, budget.e0) * binomial_prefix_sum(ones, budget.e1)


def flip_combinations(
    zeros: Sequence[int], ones: Sequence[int], budget: NoiseBudget
) -> Iterator[Tuple[Tuple[int, ...], Tuple[int, ...]]]:
    """(raised, lowered) position sets, by raised size, then lowered size, then lexicographically."""
    for up_size in range(min(budget.e0, len(zeros)) + 1):
        for up in itertools.combinations(zeros, up_size):
            for down_size in range(min(budget.e1, len(ones)) + 1):
                for down in itertools.combinations(ones, down_size):
                    yield up, down


def enumerate_noise_patterns(y: BitVec, budget: NoiseBudget, cap: Optional[int] = None) -> Iterator[BitVec]:
    """Every vector reachable from y within the budget, each exactly once.

    The cap is checked before the first vector is produced.
    """
    cap = enumeration_cap(cap)
    count = noise_pattern_count(y, budget)
    if count > cap:
        logger.error(f"{count} noise patterns exceed the enumeration cap {cap}")
        raise EnumerationCapError(f"{count} noise patterns exceed the enumeration cap {cap}")
    return _patterns(y, budget)


def _patterns(y: BitVec, budget: NoiseBudget) -> Iterator[BitVec]:
    base = y.bits
    for up, down in flip_combinations(y.zero_positions(), y.one_positions(), budget):
        bits = np.array(base, dtype=np.uint8)
        bits[list(up)] = 1
        bits[list(down)] = 0
        yield BitVec(bits)


def noisy_observations(
    spec: NoiseSpec,
    y: BitVec,
    A: Optional[BitMatrix] = None,
    x: Optional[SupportSet] = None,
    cap: Optional[int] = None,
) -> Iterator[BitVec]:
    """One observation for random and greedy modes, all of them for exhaustive mode."""
    spec.check_rows(len(y))
    if spec.mode is NoiseMode.RANDOM:
        return iter([corrupt_random(y, spec.budget, spec.seed)])
    if spec.mode is NoiseMode.GREEDY:
        if A is None or x is None:
            raise ParameterRangeError("The greedy adversary needs the matrix and the planted support")
        if A.rows != len(y):
            raise DimensionMismatchError(f"Observation length {len(y)} does not match {A.rows} matrix rows")
        return iter([corrupt_adversarial_greedy(A, x, spec.budget)])
    return enumerate_noise_patterns(y, spec.budget, cap)
