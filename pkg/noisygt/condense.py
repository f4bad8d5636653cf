# noisygt/condense.py
"""Measurement-matrix construction from condensers.

A condenser f: [2^n] x [2^t] -> [2^l] is held as an explicit table. Its induced code has one
codeword per input x (symbol f(x, i) at coordinate i) and the codeword graph of that code is
the measurement matrix, with row (i, j) linearised as i * L + j.
"""
import itertools
import logging
import math
import time
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass
from fractions import Fraction
from typing import Callable, Dict, List, Optional, Sequence, Tuple

import numpy as np

from .config import Limits, resolve_limits
from .errors import BudgetExceededError, InfeasibleParametersError, ParameterRangeError
from .fields import galois_field
from .gtcore import BitMatrix
from .utils import (
    Rational,
    SeedLike,
    ceil_log2,
    derive_rng,
    floor_log2,
    largest_grid_value_below,
    largest_power_of_two_below,
    make_rng,
    parse_fraction,
)

logger = logging.getLogger("noisygt")


def _check_table_budget(entries: int, limits: Limits, what: str) -> None:
    if entries > limits.table_budget:
        logger.error(f"{what} needs {entries} table entries, over the budget of {limits.table_budget}")
        raise BudgetExceededError(f"{what} needs {entries} table entries; budget is {limits.table_budget}")


@dataclass(frozen=True, eq=False)
class FunctionTable:
    """Explicit table of f(x, seed) for x in [2^n_bits], seed in [2^t_bits], values in [2^l_bits]."""

    n_bits: int
    t_bits: int
    l_bits: int
    table: np.ndarray

    def __post_init__(self):
        if self.n_bits < 0 or self.t_bits < 0:
            raise ParameterRangeError(f"Input and seed widths must be non-negative, got n={self.n_bits}, t={self.t_bits}")
        if self.l_bits < 1:
            raise ParameterRangeError("Output width must be at least 1 (the alphabet needs two symbols)")
        table = np.array(self.table, dtype=np.int64)
        if table.shape != (self.N, self.T):
            raise ParameterRangeError(f"Table shape {table.shape} does not match (2^{self.n_bits}, 2^{self.t_bits})")
        if table.size and (table.min() < 0 or table.max() >= self.L):
            raise ParameterRangeError(f"Table entries must lie in [0, {self.L})")
        table.setflags(write=False)
        object.__setattr__(self, "table", table)

    @classmethod
    def from_callable(cls, n_bits: int, t_bits: int, l_bits: int, fn: Callable[[int, int], int]) -> "FunctionTable":
        table = [[fn(x, i) for i in range(2**t_bits)] for x in range(2**n_bits)]
        return cls(n_bits, t_bits, l_bits, np.asarray(table, dtype=np.int64).reshape(2**n_bits, 2**t_bits))

    @property
    def N(self) -> int:
        return 2**self.n_bits

    @property
    def T(self) -> int:
        return 2**self.t_bits

    @property
    def L(self) -> int:
        return 2**self.l_bits

    def lookup(self, x: int, seed: int) -> int:
        return int(self.table[x, seed])

    def __eq__(self, other) -> bool:
        if not isinstance(other, FunctionTable):
            return NotImplemented
        return (self.n_bits, self.t_bits, self.l_bits) == (other.n_bits, other.t_bits, other.l_bits) and bool(
            np.array_equal(self.table, other.table)
        )

    def __hash__(self) -> int:
        return hash((self.n_bits, self.t_bits, self.l_bits, self.table.tobytes()))


def random_function(
    n_bits: int, t_bits: int, l_bits: int, seed: SeedLike, limits: Optional[Limits] = None
) -> FunctionTable:
    """Every entry drawn independently and uniformly from [2^l_bits], reproducible from `seed`."""
    if min(n_bits, t_bits, l_bits) < 1:
        raise ParameterRangeError(f"Widths must be at least 1, got n={n_bits}, t={t_bits}, l={l_bits}")
    limits = resolve_limits(limits)
    _check_table_budget(2 ** (n_bits + t_bits), limits, f"Random function ({n_bits}, {t_bits}, {l_bits})")
    rng = make_rng(seed)
    start = time.monotonic()
    table = rng.integers(0, 2**l_bits, size=(2**n_bits, 2**t_bits), dtype=np.int64)
    logger.debug(f"Random function table {table.shape} over alphabet {2 ** l_bits} drawn in {time.monotonic() - start:.4f}s")
    return FunctionTable(n_bits, t_bits, l_bits, table)


@dataclass(frozen=True, eq=False)
class InducedCode:
    """N codewords of length `block_length` over an alphabet of size `alphabet`."""

    block_length: int
    alphabet: int
    codewords: np.ndarray

    def __post_init__(self):
        words = np.array(self.codewords, dtype=np.int64)
        if words.ndim != 2 or words.shape[1] != self.block_length:
            raise ParameterRangeError(f"Codewords must have shape (N, {self.block_length}), got {words.shape}")
        if self.alphabet < 2:
            raise ParameterRangeError("The alphabet needs at least two symbols")
        if words.size and (words.min() < 0 or words.max() >= self.alphabet):
            raise ParameterRangeError(f"Codeword symbols must lie in [0, {self.alphabet})")
        words.setflags(write=False)
        object.__setattr__(self, "codewords", words)

    def __len__(self) -> int:
        return int(self.codewords.shape[0])

    @property
    def size(self) -> int:
        return len(self)

    def codeword(self, x: int) -> Tuple[int, ...]:
        return tuple(int(s) for s in self.codewords[x])


def induced_code(f: FunctionTable) -> InducedCode:
    return InducedCode(block_length=f.T, alphabet=f.L, codewords=f.table)


def codeword_graph_matrix(code: InducedCode) -> BitMatrix:
    """Adjacency matrix of the codeword graph: T*L rows, one column per codeword, column weight T."""
    T, L, N = code.block_length, code.alphabet, len(code)
    start = time.monotonic()
    rows = np.arange(T, dtype=np.int64)[None, :] * L + code.codewords
    flat_rows = rows.ravel()
    flat_cols = np.repeat(np.arange(N, dtype=np.int64), T)
    order = np.lexsort((flat_cols, flat_rows))
    counts = np.bincount(flat_rows, minlength=T * L)
    per_row = np.split(flat_cols[order], np.cumsum(counts)[:-1])
    matrix = BitMatrix(T * L, N, tuple(tuple(chunk.tolist()) for chunk in per_row))
    # the column view is already known; prime the cache instead of recounting
    column_supports = tuple(np.sort(r) for r in rows)
    for col in column_supports:
        col.setflags(write=False)
    matrix.__dict__["column_supports"] = column_supports
    logger.debug(f"Codeword graph {T * L}x{N} built in {time.monotonic() - start:.4f}s")
    return matrix


def reed_solomon_code(q: int, w: int, limits: Optional[Limits] = None) -> InducedCode:
    """Evaluations of all q^w polynomials of degree < w at the q field elements.

    Polynomial c has coefficient (c // q^k) % q at X^k; element alpha_i is the field element encoded as i.
    """
    field = galois_field(q)
    if not 1 <= w <= q:
        raise ParameterRangeError(f"Degree bound must satisfy 1 <= w <= q, got w={w}, q={q}")
    limits = resolve_limits(limits)
    _check_table_budget(q**w * q, limits, f"Reed-Solomon code q={q}, w={w}")
    words = np.zeros((q**w, q), dtype=np.int64)
    for c in range(q**w):
        coeffs = [(c // q**k) % q for k in range(w)]
        words[c] = [field.evaluate(coeffs, alpha) for alpha in range(q)]
    return InducedCode(block_length=q, alphabet=q, codewords=words)


def kautz_singleton_matrix(q: int, w: int, limits: Optional[Limits] = None) -> BitMatrix:
    """q^2 x q^w codeword graph of the degree-(w-1) Reed-Solomon code over GF(q)."""
    matrix = codeword_graph_matrix(reed_solomon_code(q, w, limits))
    logger.info(f"Kautz-Singleton matrix for q={q}, w={w}: {matrix.rows}x{matrix.cols}, column weight {q}")
    return matrix


@dataclass(frozen=True)
class SchemeParams:
    """Parameter bundle of a condenser-based scheme; capital forms are the powers of two."""

    n: int
    t: int
    l: int
    k: int
    k_prime: int
    eps: Fraction
    p: Fraction
    nu: Fraction
    gamma: Fraction
    D: int
    style: str = "custom"
    t_heuristic: bool = False

    def __post_init__(self):
        for name in ("eps", "p", "nu", "gamma"):
            object.__setattr__(self, name, parse_fraction(getattr(self, name)))
        if min(self.n, self.t, self.k, self.k_prime) < 0 or self.l < 1:
            raise ParameterRangeError("Bit widths must be non-negative and l >= 1")
        if not 0 < self.eps < 1:
            raise ParameterRangeError(f"Condenser error must lie in (0, 1), got {self.eps}")
        if self.p < 0 or self.nu < 0:
            raise ParameterRangeError("p and nu must be non-negative")
        if self.D < 1:
            raise ParameterRangeError(f"Sparsity must be positive, got {self.D}")
        if self.gamma * self.L != self.D:
            raise ParameterRangeError(f"gamma must equal D/L exactly, got gamma={self.gamma}, D={self.D}, L={self.L}")
        if not self.satisfies_condition():
            raise InfeasibleParametersError(
                f"(p + gamma) L/K' + nu/gamma = {self.condition_lhs} is not below 1 - eps = {1 - self.eps}"
            )

    @property
    def N(self) -> int:
        return 2**self.n

    @property
    def T(self) -> int:
        return 2**self.t

    @property
    def L(self) -> int:
        return 2**self.l

    @property
    def K(self) -> int:
        return 2**self.k

    @property
    def K_prime(self) -> int:
        return 2**self.k_prime

    @property
    def M(self) -> int:
        return self.T * self.L

    @property
    def nu_over_gamma(self) -> Fraction:
        return self.nu / self.gamma

    @property
    def condition_lhs(self) -> Fraction:
        return (self.p + self.gamma) * self.L / self.K_prime + self.nu / self.gamma

    def satisfies_condition(self) -> bool:
        return self.condition_lhs < 1 - self.eps

    @property
    def false_positive_budget(self) -> int:
        return math.floor(self.p * self.M)

    @property
    def false_negative_budget(self) -> int:
        return math.floor(self.nu * self.M / self.D)

    @property
    def decode_threshold(self) -> Fraction:
        return 1 - self.nu_over_gamma

    def as_dict(self) -> Dict[str, object]:
        return {
            "style": self.style,
            "n": self.n, "t": self.t, "l": self.l, "k": self.k, "k_prime": self.k_prime,
            "eps": self.eps, "p": self.p, "nu": self.nu, "gamma": self.gamma, "D": self.D,
            "N": self.N, "T": self.T, "L": self.L, "K": self.K, "K_prime": self.K_prime, "M": self.M,
            "nu_over_gamma": self.nu_over_gamma,
            "condition_lhs": self.condition_lhs,
            "condition_rhs": 1 - self.eps,
            "false_positive_budget": self.false_positive_budget,
            "false_negative_budget": self.false_negative_budget,
            "t_heuristic": self.t_heuristic,
        }

    def as_lines(self) -> List[str]:
        return [f"{key}={value}" for key, value in self.as_dict().items()]


def nu0(p: Rational) -> float:
    """Largest tolerable nu for a false-positive fraction p with an extractor: (sqrt(5-4p) - 1)^3 / 8."""
    p = parse_fraction(p)
    if not 0 <= p <= 1:
        raise ParameterRangeError(f"p must lie in [0, 1], got {p}")
    return (math.sqrt(5 - 4 * float(p)) - 1) ** 3 / 8


def _rational_cube_root(value: Fraction) -> Fraction:
    return Fraction(float(value) ** (1 / 3)).limit_denominator(1000)


def extractor_recipe(p: Rational, nu: Rational, limits: Optional[Limits] = None) -> Tuple[Fraction, Fraction]:
    """(gamma, eps bound) before power-of-two rounding; eps must stay strictly below the bound."""
    p, nu = parse_fraction(p), parse_fraction(nu)
    limits = resolve_limits(limits)
    if not 0 <= p < 1:
        raise ParameterRangeError(f"p must lie in [0, 1), got {p}")
    if nu < 0:
        raise ParameterRangeError(f"nu must be non-negative, got {nu}")
    if nu == 0:
        gamma = limits.noiseless_gamma * (1 - p)
        return gamma, 1 - p - gamma
    if float(nu) >= nu0(p):
        raise InfeasibleParametersError(f"nu={nu} is not below nu0({p}) = {nu0(p):.6f}")
    gamma = _rational_cube_root(nu)
    bound = 1 - p - gamma - nu / gamma
    if bound <= 0:
        raise InfeasibleParametersError(f"No room for the condenser error: 1 - p - gamma - nu/gamma = {bound}")
    return gamma, bound


def _seed_bits(n: int, eps: Fraction, factor: int, limits: Limits) -> int:
    # heuristic: the existential seed length log n + factor * log(1/eps) + O(1)
    return ceil_log2(max(n, 2)) + factor * ceil_log2(1 / eps) + limits.seed_slack


def _choose_output_bits(D: int, p: Fraction, nu: Fraction, gamma0: Fraction) -> int:
    """Output length l for L = 2^l: rounds D/gamma0 up when that keeps p + gamma + nu/gamma < 1.

    Otherwise the next power of two below is tried together with every larger one until gamma drops
    under sqrt(nu), and the candidate leaving the most slack wins.
    """

    def slack_at(l: int) -> Fraction:
        gamma = Fraction(D, 2**l)
        return 1 - p - gamma - nu / gamma

    upper = max(1, ceil_log2(Fraction(D) / gamma0))
    if slack_at(upper) > 0:
        return upper
    lowest = max(1, ceil_log2(D))
    candidates = [upper - 1] if upper - 1 >= lowest else []
    l = upper
    while nu > 0 and Fraction(D, 2**l) ** 2 >= nu:
        l += 1
        candidates.append(l)
    best = max(candidates, key=slack_at, default=None)
    if best is None or slack_at(best) <= 0:
        raise InfeasibleParametersError(
            f"No power of two L satisfies p + gamma + nu/gamma < 1 with gamma = D/L (D={D}, p={p}, nu={nu})"
        )
    logger.info(f"Rounding L up to 2^{upper} leaves no slack; using L = 2^{best} instead")
    return best


def _check_universe(D: int, N: int) -> int:
    if D < 1:
        raise ParameterRangeError(f"Sparsity must be positive, got {D}")
    if N < D:
        raise ParameterRangeError(f"Universe {N} is smaller than the sparsity {D}")
    return max(1, ceil_log2(N))


def plan_extractor_style(
    D: int,
    N: int,
    p: Rational,
    nu: Rational,
    t_bits: Optional[int] = None,
    limits: Optional[Limits] = None,
) -> SchemeParams:
    """Parameters for a strong extractor (K' = L): tolerates any constant p < 1 with K - D = O(D)."""
    limits = resolve_limits(limits)
    p, nu = parse_fraction(p), parse_fraction(nu)
    n = _check_universe(D, N)
    gamma0, eps_bound = extractor_recipe(p, nu, limits)
    logger.debug(f"Extractor recipe: gamma={gamma0}, eps < {eps_bound}")

    l = _choose_output_bits(D, p, nu, gamma0)
    gamma = Fraction(D, 2**l)
    slack = 1 - p - gamma - nu / gamma
    eps = largest_power_of_two_below(min(slack, Fraction(1)))
    entropy_loss = 2 * ceil_log2(1 / eps)
    k = min(n, l + entropy_loss)
    if k < l:
        logger.warning(f"Min-entropy capped at n={n} below the output length l={l}; the scheme is degenerate")
    t = t_bits if t_bits is not None else _seed_bits(n, eps, 2, limits)
    if t < 1:
        raise ParameterRangeError(f"Seed length must be at least 1, got {t}")
    _check_table_budget(2 ** (n + t), limits, f"Extractor table (n={n}, t={t})")
    params = SchemeParams(
        n=n, t=t, l=l, k=k, k_prime=l, eps=eps, p=p, nu=nu, gamma=gamma, D=D,
        style="extractor", t_heuristic=t_bits is None,
    )
    logger.info(f"Extractor plan: D={D}, N={params.N}, T={params.T}, L={params.L}, K={params.K}, eps={eps}, M={params.M}")
    return params


def plan_lossless_style(
    D: int,
    N: int,
    delta: Rational,
    t_bits: Optional[int] = None,
    limits: Optional[Limits] = None,
) -> SchemeParams:
    """Parameters for a lossless condenser (K' = K) with at most delta*D false positives in the output."""
    limits = resolve_limits(limits)
    delta = parse_fraction(delta)
    if delta <= 0:
        raise ParameterRangeError(f"delta must be positive, got {delta}")
    n = _check_universe(D, N)

    eps = delta / (2 * (1 + delta))
    target = D / (1 - 2 * eps)  # = D (1 + delta)
    K = 2 ** ceil_log2(target)
    if K - D > delta * D:
        K = 2 ** floor_log2(target)
        eps = Fraction(K - D, 2 * K)
        logger.info(f"Rounded K down to {K} to keep K - D <= delta*D; eps recomputed as {eps}")
    if K <= D:
        raise InfeasibleParametersError(f"No power of two K with D < K <= D(1 + delta) = {target}")
    k = K.bit_length() - 1
    if k > n:
        raise InfeasibleParametersError(f"Min-entropy k={k} exceeds the source length n={n}")

    l = k + ceil_log2(1 / eps) + 1
    L = 2**l
    gamma = Fraction(D, L)
    slack = 1 - eps - gamma * L / K
    if slack <= 0:
        raise InfeasibleParametersError(f"No slack left for noise: 1 - eps - D/K = {slack}")
    # even split of the slack between the false-positive and false-negative terms
    p = largest_grid_value_below(slack / 2 * K / L)
    nu = largest_grid_value_below(slack / 2 * gamma)
    t = t_bits if t_bits is not None else _seed_bits(n, eps, 1, limits)
    if t < 1:
        raise ParameterRangeError(f"Seed length must be at least 1, got {t}")
    _check_table_budget(2 ** (n + t), limits, f"Lossless table (n={n}, t={t})")
    params = SchemeParams(
        n=n, t=t, l=l, k=k, k_prime=k, eps=eps, p=p, nu=nu, gamma=gamma, D=D,
        style="lossless", t_heuristic=t_bits is None,
    )
    logger.info(f"Lossless plan: D={D}, N={params.N}, T={params.T}, L={L}, K={K}, eps={eps}, p={p}, nu={nu}")
    return params


@dataclass(frozen=True, eq=False)
class Scheme:
    """A planned parameter bundle realised by a random table."""

    params: SchemeParams
    table: FunctionTable
    code: InducedCode
    matrix: BitMatrix


def build_scheme(params: SchemeParams, seed: SeedLike, limits: Optional[Limits] = None) -> Scheme:
    table = random_function(params.n, params.t, params.l, seed, limits)
    code = induced_code(table)
    return Scheme(params=params, table=table, code=code, matrix=codeword_graph_matrix(code))


@dataclass(frozen=True)
class ExpansionReport:
    subset_size: int
    trials: int
    passed: int
    exhaustive: bool
    required_union: Fraction
    min_union: int

    @property
    def pass_rate(self) -> Fraction:
        return Fraction(self.passed, self.trials) if self.trials else Fraction(1)

    def as_lines(self) -> List[str]:
        return [
            f"subset_size={self.subset_size}",
            f"trials={self.trials}",
            f"passed={self.passed}",
            f"pass_rate={float(self.pass_rate):.6f}",
            f"exhaustive={self.exhaustive}",
            f"required_union={self.required_union}",
            f"min_union={self.min_union}",
        ]


def _union_size(table: np.ndarray, subset: Sequence[int]) -> int:
    # distinct symbols per coordinate, summed over coordinates = |union of column supports|
    block = np.sort(table[np.asarray(subset, dtype=np.int64)], axis=0)
    return int(block.shape[1] + np.count_nonzero(np.diff(block, axis=0)))


def sampled_expansion_check(
    f: FunctionTable,
    k: int,
    eps: Rational,
    trials: int,
    seed: int,
    limits: Optional[Limits] = None,
    max_workers: int = 1,
    k_prime: Optional[int] = None,
) -> ExpansionReport:
    """Fraction of 2^k-column subsets of the codeword graph whose neighbourhood has >= (1-eps) 2^k T rows.

    With k_prime set the target is (1-eps) 2^min(k, k_prime) T, the support an output of
    min-entropy k_prime must reach; extractors use k_prime = l.
    """
    limits = resolve_limits(limits)
    eps = parse_fraction(eps)
    K = 2**k
    if K > f.N:
        raise ParameterRangeError(f"Subset size 2^{k} exceeds the number of columns {f.N}")
    required = (1 - eps) * 2 ** (k if k_prime is None else min(k, k_prime)) * f.T
    subset_count = math.comb(f.N, K)

    if subset_count <= limits.expansion_exhaustive_cap:
        logger.debug(f"Expansion check is exhaustive over {subset_count} subsets of size {K}")
        unions = [_union_size(f.table, s) for s in itertools.combinations(range(f.N), K)]
        exhaustive = True
    else:
        if trials < 1:
            raise ParameterRangeError(f"Need at least one trial, got {trials}")

        def run_trial(trial: int) -> int:
            rng = derive_rng(seed, trial)
            return _union_size(f.table, rng.choice(f.N, size=K, replace=False))

        if max_workers > 1:
            with ThreadPoolExecutor(max_workers=max_workers) as executor:
                unions = list(executor.map(run_trial, range(trials)))
        else:
            unions = [run_trial(trial) for trial in range(trials)]
        exhaustive = False

    passed = sum(1 for u in unions if u >= required)
    report = ExpansionReport(
        subset_size=K, trials=len(unions), passed=passed, exhaustive=exhaustive,
        required_union=required, min_union=min(unions),
    )
    logger.info(f"Expansion check: {passed}/{len(unions)} subsets of size {K} reach {required} rows")
    return report
