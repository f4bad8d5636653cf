# noisygt/mixtures.py
"""Mixtures over the alphabet, agreement, and agreement lists of induced codes."""
import logging
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass
from fractions import Fraction
from functools import cached_property
from typing import Callable, FrozenSet, Iterable, List, Optional, Sequence, Tuple

import numpy as np

from .condense import FunctionTable, InducedCode, codeword_graph_matrix, induced_code
from .errors import DimensionMismatchError, ParameterRangeError
from .gtcore import BitVec, NoiseBudget, SupportSet, encode, random_support
from .noise import corrupt_random
from .utils import Rational, derive_rng, parse_fraction

logger = logging.getLogger("noisygt")

MixtureSampler = Callable[[np.random.Generator], "Mixture"]


@dataclass(frozen=True)
class Mixture:
    """T subsets of the alphabet [L]; empty subsets are allowed."""

    alphabet: int
    coords: Tuple[FrozenSet[int], ...]

    def __post_init__(self):
        coords = tuple(frozenset(int(j) for j in s) for s in self.coords)
        for i, subset in enumerate(coords):
            if any(not 0 <= j < self.alphabet for j in subset):
                raise ParameterRangeError(f"Coordinate {i} holds a symbol outside [0, {self.alphabet})")
        object.__setattr__(self, "coords", coords)

    @classmethod
    def of(cls, alphabet: int, coords: Iterable[Iterable[int]]) -> "Mixture":
        return cls(alphabet, tuple(frozenset(s) for s in coords))

    @property
    def T(self) -> int:
        return len(self.coords)

    @property
    def wgt(self) -> int:
        return sum(len(s) for s in self.coords)

    @property
    def rho(self) -> Fraction:
        if not self.T:
            return Fraction(0)
        return Fraction(self.wgt, self.T * self.alphabet)

    @cached_property
    def membership(self) -> np.ndarray:
        table = np.zeros((self.T, self.alphabet), dtype=bool)
        for i, subset in enumerate(self.coords):
            table[i, list(subset)] = True
        table.setflags(write=False)
        return table

    def contains(self, other: "Mixture") -> bool:
        """Pointwise inclusion other_i ⊆ self_i."""
        if (self.T, self.alphabet) != (other.T, other.alphabet):
            raise DimensionMismatchError("Mixtures have different shapes")
        return all(b <= a for a, b in zip(self.coords, other.coords))


def mixture_from_observation(y_hat: BitVec, T: int, L: int) -> Mixture:
    if len(y_hat) != T * L:
        raise DimensionMismatchError(f"Observation of length {len(y_hat)} cannot be read as {T}x{L}")
    grid = y_hat.bits.reshape(T, L)
    return Mixture(L, tuple(frozenset(np.flatnonzero(row).tolist()) for row in grid))


def agreement(w: Sequence[int], S: Mixture) -> Fraction:
    if len(w) != S.T:
        raise DimensionMismatchError(f"Word of length {len(w)} against a mixture with {S.T} coordinates")
    if not S.T:
        return Fraction(0)
    return Fraction(sum(1 for symbol, subset in zip(w, S.coords) if symbol in subset), S.T)


def agreement_counts(code: InducedCode, S: Mixture) -> np.ndarray:
    """Number of agreeing coordinates for every codeword."""
    if (code.block_length, code.alphabet) != (S.T, S.alphabet):
        raise DimensionMismatchError(
            f"Code ({code.block_length}, {code.alphabet}) and mixture ({S.T}, {S.alphabet}) differ in shape"
        )
    return S.membership[np.arange(S.T), code.codewords].sum(axis=1)


def agreement_list(code: InducedCode, S: Mixture, alpha: Rational, strict: bool = True) -> SupportSet:
    """Codewords with agreement > alpha; at alpha = 1, the codewords in full agreement.

    With strict=False the comparison is >= instead.
    """
    alpha = parse_fraction(alpha)
    if not 0 <= alpha <= 1:
        raise ParameterRangeError(f"alpha must lie in [0, 1], got {alpha}")
    counts = agreement_counts(code, S)
    scaled = counts * alpha.denominator
    bound = alpha.numerator * S.T
    if alpha == 1 or not strict:
        selected = scaled >= bound
    else:
        selected = scaled > bound
    return SupportSet(len(code), tuple(np.flatnonzero(selected).tolist()))


def planted_mixture(code: InducedCode, x0: int) -> Mixture:
    """S_i = {codeword(x0)_i}."""
    return Mixture(code.alphabet, tuple(frozenset((s,)) for s in code.codeword(x0)))


def observation_mixture_sampler(
    code: InducedCode, sparsity: int, budget: NoiseBudget = NoiseBudget()
) -> MixtureSampler:
    """Mixtures read off randomly corrupted encodings of random D-sparse supports."""
    matrix = codeword_graph_matrix(code)

    def sample(rng: np.random.Generator) -> Mixture:
        x = random_support(matrix.cols, sparsity, rng)
        y_hat = corrupt_random(encode(matrix, x), budget, rng)
        return mixture_from_observation(y_hat, code.block_length, code.alphabet)

    return sample


@dataclass(frozen=True)
class ListBoundReport:
    trials: int
    evaluated: int
    vacuous: int
    violations: int
    max_list_size: int
    bound: int
    sizes: Tuple[int, ...] = ()

    @property
    def violation_rate(self) -> Fraction:
        return Fraction(self.violations, self.evaluated) if self.evaluated else Fraction(0)

    def as_lines(self) -> List[str]:
        return [
            f"trials={self.trials}",
            f"evaluated={self.evaluated}",
            f"vacuous={self.vacuous}",
            f"violations={self.violations}",
            f"violation_rate={float(self.violation_rate):.6f}",
            f"max_list_size={self.max_list_size}",
            f"bound={self.bound}",
        ]


def check_list_bound(
    f: FunctionTable,
    k: int,
    k_prime: int,
    eps: Rational,
    mixture_sampler: MixtureSampler,
    trials: int,
    seed: int = 0,
    max_workers: int = 1,
) -> ListBoundReport:
    """Empirical check of |LIST(S, rho(S) 2^(l-k') + eps)| < 2^k over sampled mixtures.

    Samples whose threshold reaches 1 are counted as vacuous and skipped.
    """
    eps = parse_fraction(eps)
    if trials < 1:
        raise ParameterRangeError(f"Need at least one trial, got {trials}")
    if k < 0 or not 0 <= k_prime <= f.l_bits:
        raise ParameterRangeError(f"Entropies k={k}, k'={k_prime} are inconsistent with l={f.l_bits}")
    code = induced_code(f)
    scale = Fraction(2) ** (f.l_bits - k_prime)
    bound = 2**k

    def run_trial(trial: int) -> Optional[int]:
        S = mixture_sampler(derive_rng(seed, trial))
        threshold = S.rho * scale + eps
        if threshold >= 1:
            return None
        return agreement_list(code, S, threshold).weight

    if max_workers > 1:
        with ThreadPoolExecutor(max_workers=max_workers) as executor:
            outcomes = list(executor.map(run_trial, range(trials)))
    else:
        outcomes = [run_trial(trial) for trial in range(trials)]

    sizes = tuple(size for size in outcomes if size is not None)
    vacuous = trials - len(sizes)
    if vacuous:
        logger.warning(f"{vacuous} of {trials} sampled mixtures had a threshold >= 1 and were skipped")
    report = ListBoundReport(
        trials=trials,
        evaluated=len(sizes),
        vacuous=vacuous,
        violations=sum(1 for size in sizes if size >= bound),
        max_list_size=max(sizes, default=0),
        bound=bound,
        sizes=sizes,
    )
    logger.info(f"List bound: {report.violations} violations of < {bound} over {report.evaluated} mixtures")
    return report
