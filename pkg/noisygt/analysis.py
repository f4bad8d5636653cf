# noisygt/analysis.py
"""Checkable forms of the counting bounds, the exhaustive correctness verifier, and hypergraph matchings."""
import itertools
import logging
import math
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Any, Dict, FrozenSet, Iterable, List, Mapping, Optional, Sequence, Tuple, Union

import numpy as np

from .config import enumeration_cap
from .decode import is_consistent, sparse_encodings
from .errors import EnumerationCapError, ParameterRangeError
from .gtcore import AccuracyBudget, BitMatrix, BitVec, NoiseBudget, SupportSet
from .noise import flip_combinations
from .utils import Rational, binomial_prefix_sum, ceil_log2, parse_fraction

logger = logging.getLogger("noisygt")

Number = Union[int, Fraction, float]


@dataclass(frozen=True)
class BoundReport:
    bound_name: str
    inputs: Mapping[str, Any]
    computed_bound: Number
    satisfied: bool
    details: Mapping[str, Any] = field(default_factory=dict)

    def as_lines(self) -> List[str]:
        lines = [f"bound={self.bound_name}"]
        lines += [f"{key}={value}" for key, value in self.inputs.items()]
        lines.append(f"computed_bound={self.computed_bound}")
        lines += [f"{key}={value}" for key, value in self.details.items()]
        lines.append(f"satisfied={self.satisfied}")
        return lines


def hamming_volume(a: int, b: int) -> int:
    """V(a, b): number of length-a vectors within Hamming distance b of a fixed one."""
    if not 0 <= b <= a:
        raise ParameterRangeError(f"Hamming volume needs 0 <= b <= a, got a={a}, b={b}")
    return binomial_prefix_sum(a, b)


def _check_close_ball(a: int, b: int, e0: int, e1: int) -> None:
    if not 0 <= b <= a or e0 < 0 or e1 < 0:
        raise ParameterRangeError(f"Close ball needs 0 <= b <= a and e0, e1 >= 0, got ({a}, {b}, {e0}, {e1})")


def close_ball_volume(a: int, b: int, e0: int, e1: int) -> int:
    """Vectors (e0, e1)-close to a fixed b-sparse vector of length a.

    e0 zeros (of a - b) go up, e1 ones (of b) go down.
    """
    _check_close_ball(a, b, e0, e1)
    return sum(
        math.comb(a - b, i) * math.comb(b, j)
        for i in range(min(e0, a - b) + 1)
        for j in range(min(e1, b) + 1)
    )


@dataclass(frozen=True)
class ClosePairingReport:
    exact: int
    support_side: int
    stated: int

    @property
    def support_side_holds(self) -> bool:
        return self.exact <= self.support_side

    @property
    def stated_holds(self) -> bool:
        return self.exact <= self.stated


def close_ball_pairings(a: int, b: int, e0: int, e1: int) -> ClosePairingReport:
    """The exact volume against V(b, e1) V(a-b, e0) and against V(b, e0) V(a-b, e1)."""
    _check_close_ball(a, b, e0, e1)
    return ClosePairingReport(
        exact=close_ball_volume(a, b, e0, e1),
        support_side=binomial_prefix_sum(b, e1) * binomial_prefix_sum(a - b, e0),
        stated=binomial_prefix_sum(b, e0) * binomial_prefix_sum(a - b, e1),
    )


def lemma1_check(m: int, d: int, e0: int, e1: int, e0p: int, e1p: int) -> BoundReport:
    """(max(e0, e1) + 1) / (e0' + e1' + 1) <= m / d, exactly."""
    if m < 1 or d < 1:
        raise ParameterRangeError(f"m and d must be positive, got m={m}, d={d}")
    bound = Fraction(max(e0, e1) + 1, e0p + e1p + 1)
    ratio = Fraction(m, d)
    return BoundReport(
        "lemma1",
        {"m": m, "d": d, "e0": e0, "e1": e1, "e0p": e0p, "e1p": e1p},
        bound,
        bound <= ratio,
        {"m_over_d": ratio},
    )


def lemma2_check(m: int, d: int, n: int, e1: int, e0p: int, e1p: int, eps: Rational) -> BoundReport:
    """Either e1 < (e1'+1) m / (eps d) or e0' >= (1-eps)(n-d+1)/(e1'+1)^2."""
    eps = parse_fraction(eps)
    if eps <= 0:
        raise ParameterRangeError(f"eps must be positive, got {eps}")
    if m < 1 or d < 1:
        raise ParameterRangeError(f"m and d must be positive, got m={m}, d={d}")
    e1_limit = Fraction((e1p + 1) * m) / (eps * d)
    e0p_floor = (1 - eps) * (n - d + 1) / Fraction((e1p + 1) ** 2)
    first = e1 < e1_limit
    second = e0p >= e0p_floor
    binding = {(True, True): "both", (True, False): "first", (False, True): "second"}.get((first, second), "neither")
    return BoundReport(
        "lemma2",
        {"m": m, "d": d, "n": n, "e1": e1, "e0p": e0p, "e1p": e1p, "eps": eps},
        e1_limit,
        first or second,
        {"e0p_floor": e0p_floor, "binding": binding},
    )


def lemma2_sweep(
    m: int,
    d: int,
    n: int,
    e1: int,
    e0p: int,
    e1p: int,
    eps_grid: Optional[Iterable[Rational]] = None,
) -> List[BoundReport]:
    grid = [Fraction(i, 10) for i in range(1, 10)] if eps_grid is None else [parse_fraction(e) for e in eps_grid]
    return [lemma2_check(m, d, n, e1, e0p, e1p, eps) for eps in grid]


@dataclass(frozen=True)
class Lemma3Bound:
    exact: int
    closed_form: float
    sparse_count: int
    decoding_ball: int

    def as_lines(self) -> List[str]:
        return [
            "bound=lemma3",
            f"exact={self.exact}",
            f"closed_form={self.closed_form:.6f}",
            f"sparse_count={self.sparse_count}",
            f"decoding_ball={self.decoding_ball}",
        ]


def _decoding_ball(n: int, d: int, e0p: int, e1p: int) -> int:
    # most d-sparse x any single reconstruction z can be a valid decoding of
    if e1p == 0:
        return binomial_prefix_sum(min(n, d + e0p), e0p)
    return max(binomial_prefix_sum(w, e0p) * binomial_prefix_sum(n - w, e1p) for w in range(n + 1))


def lemma3_bound(n: int, d: int, e0p: int, e1p: int) -> Lemma3Bound:
    """Rows needed by any (0, 0, e0', e1')-correcting design for d-sparse vectors of length n.

    exact is ceil(log2(V(n, d) / v)) with v the largest number of d-sparse vectors one
    reconstruction can serve; closed_form is d log(n/d) - d - e0' minus e1' log((n-d-e0')/e1').
    """
    if not 0 < d <= n or e0p < 0 or e1p < 0:
        raise ParameterRangeError(f"Need 0 < d <= n and e0', e1' >= 0, got n={n}, d={d}, e0'={e0p}, e1'={e1p}")
    sparse_count = binomial_prefix_sum(n, d)
    ball = _decoding_ball(n, d, e0p, e1p)
    ratio = Fraction(sparse_count, ball)
    exact = ceil_log2(ratio) if ratio > 1 else 0
    closed = d * math.log2(n / d) - d - e0p
    rest = n - d - e0p
    if e1p > 0 and rest > e1p:
        closed -= e1p * math.log2(rest / e1p)
    return Lemma3Bound(exact, closed, sparse_count, ball)


@dataclass(frozen=True)
class Witness:
    x: SupportSet
    y_hat: BitVec
    consistent: Tuple[SupportSet, ...]
    union: SupportSet


@dataclass(frozen=True)
class CorrectingReport:
    passed: bool
    supports_checked: int
    patterns_checked: int
    witness: Optional[Witness] = None

    def as_lines(self) -> List[str]:
        lines = [
            f"passed={self.passed}",
            f"supports_checked={self.supports_checked}",
            f"patterns_checked={self.patterns_checked}",
        ]
        if self.witness is not None:
            lines.append(f"witness_x={','.join(map(str, self.witness.x.indices))}")
            lines.append(f"witness_y={self.witness.y_hat.to_string()}")
            lines.append(f"witness_union={','.join(map(str, self.witness.union.indices))}")
        return lines


def _bits_of(mask: int, length: int) -> BitVec:
    return BitVec(np.array([(mask >> r) & 1 for r in range(length)], dtype=np.uint8))


def verify_correcting(
    A: BitMatrix,
    d: int,
    budget: NoiseBudget,
    acc: AccuracyBudget,
    cap: Optional[int] = None,
    max_workers: int = 1,
) -> CorrectingReport:
    """Exhaustive check that every noisy observation of every d-sparse x decodes within acc.

    Only acc.e1 == 0 is supported: then the union of all consistent supports is a valid
    decoding whenever any decoding is, so checking that union is exact.
    """
    if acc.e1 != 0:
        raise ParameterRangeError("Only reconstruction budgets with e1' = 0 can be verified exactly")
    if d < 0:
        raise ParameterRangeError(f"Sparsity must be non-negative, got {d}")
    cap = enumeration_cap(cap)
    encodings = sparse_encodings(A, d, cap)
    rows = A.rows
    work = sum(
        binomial_prefix_sum(rows - encoded.bit_count(), budget.e0) * binomial_prefix_sum(encoded.bit_count(), budget.e1)
        for _, encoded in encodings
    )
    if work > cap:
        logger.error(f"{work} (support, noise pattern) pairs exceed the enumeration cap {cap}")
        raise EnumerationCapError(f"{work} (support, noise pattern) pairs exceed the enumeration cap {cap}")
    logger.info(f"Verifying {len(encodings)} supports over {work} noisy observations")

    full = (1 << rows) - 1
    verdicts: Dict[int, Optional[Tuple[Tuple[int, ...], ...]]] = {}

    def consistent_failure(y_mask: int) -> Optional[Tuple[Tuple[int, ...], ...]]:
        # dict access races are benign: every thread computes the same verdict
        if y_mask in verdicts:
            return verdicts[y_mask]
        members = tuple(combo for combo, encoded in encodings if is_consistent(encoded, y_mask, budget))
        union = set().union(*members) if members else set()
        bad = any(len(union - set(member)) > acc.e0 for member in members)
        verdicts[y_mask] = members if bad else None
        return verdicts[y_mask]

    def check_support(index: int) -> Optional[Witness]:
        combo, encoded = encodings[index]
        zeros = [r for r in range(rows) if not (encoded >> r) & 1]
        ones = [r for r in range(rows) if (encoded >> r) & 1]
        for up, down in flip_combinations(zeros, ones, budget):
            y_mask = encoded
            for r in up:
                y_mask |= 1 << r
            for r in down:
                y_mask &= full ^ (1 << r)
            members = consistent_failure(y_mask)
            if members is not None:
                union = sorted(set().union(*members))
                return Witness(
                    x=SupportSet(A.cols, combo),
                    y_hat=_bits_of(y_mask, rows),
                    consistent=tuple(SupportSet(A.cols, m) for m in members),
                    union=SupportSet(A.cols, tuple(union)),
                )
        return None

    witness: Optional[Witness] = None
    if max_workers > 1:
        with ThreadPoolExecutor(max_workers=max_workers) as executor:
            witness = next((w for w in executor.map(check_support, range(len(encodings))) if w is not None), None)
    else:
        for index in range(len(encodings)):
            witness = check_support(index)
            if witness is not None:
                break

    report = CorrectingReport(witness is None, len(encodings), work, witness)
    if witness is None:
        logger.info("Matrix is correcting for the given budgets")
    else:
        logger.warning(f"Matrix fails: support {witness.x.indices} has an observation with no valid decoding")
    return report


@dataclass(frozen=True)
class Hypergraph:
    """Uniform hypergraph: every edge is a sorted tuple of `edge_size` distinct vertices."""

    vertices: int
    edge_size: int
    edges: FrozenSet[Tuple[int, ...]]

    def __post_init__(self):
        if self.edge_size < 2:
            raise ParameterRangeError(f"Edges need at least two vertices, got c={self.edge_size}")
        if self.vertices < 0:
            raise ParameterRangeError(f"Vertex count must be non-negative, got {self.vertices}")
        edges = set()
        for edge in self.edges:
            normalized = tuple(sorted(int(v) for v in edge))
            if len(set(normalized)) != self.edge_size:
                raise ParameterRangeError(f"Edge {edge} does not have {self.edge_size} distinct vertices")
            if normalized[0] < 0 or normalized[-1] >= self.vertices:
                raise ParameterRangeError(f"Edge {edge} uses a vertex outside [0, {self.vertices})")
            if normalized in edges:
                raise ParameterRangeError(f"Duplicate edge {normalized}")
            edges.add(normalized)
        object.__setattr__(self, "edges", frozenset(edges))

    @classmethod
    def of(cls, vertices: int, edge_size: int, edges: Iterable[Sequence[int]]) -> "Hypergraph":
        return cls(vertices, edge_size, frozenset(tuple(sorted(e)) for e in edges))

    @classmethod
    def complete(cls, vertices: int, edge_size: int) -> "Hypergraph":
        return cls(vertices, edge_size, frozenset(itertools.combinations(range(vertices), edge_size)))

    @classmethod
    def random(cls, vertices: int, edge_size: int, edge_count: int, rng: np.random.Generator) -> "Hypergraph":
        """edge_count distinct edges drawn uniformly (capped at the number of possible edges)."""
        possible = math.comb(vertices, edge_size)
        target = min(edge_count, possible)
        if 2 * target > possible:
            everything = list(itertools.combinations(range(vertices), edge_size))
            picked = rng.choice(len(everything), size=target, replace=False)
            return cls(vertices, edge_size, frozenset(everything[int(i)] for i in picked))
        edges = set()
        while len(edges) < target:
            edges.add(tuple(sorted(int(v) for v in rng.choice(vertices, size=edge_size, replace=False))))
        return cls(vertices, edge_size, frozenset(edges))

    @property
    def density(self) -> Fraction:
        possible = math.comb(self.vertices, self.edge_size)
        return Fraction(len(self.edges), possible) if possible else Fraction(0)

    def degree(self, v: int) -> int:
        return sum(1 for e in self.edges if v in e)


def greedy_maximal_matching(H: Hypergraph) -> Tuple[Tuple[int, ...], ...]:
    """Scan edges in sorted order, keeping each edge disjoint from those kept so far."""
    used = set()
    matching = []
    for edge in sorted(H.edges):
        if used.isdisjoint(edge):
            matching.append(edge)
            used.update(edge)
    return tuple(matching)


def check_matching_lemma(H: Hypergraph) -> BoundReport:
    """A matching of size >= (density / c^2)(|V| - c + 1)."""
    matching = greedy_maximal_matching(H)
    c = H.edge_size
    bound = H.density / (c * c) * (H.vertices - c + 1)
    return BoundReport(
        "matching",
        {"vertices": H.vertices, "edge_size": c, "edges": len(H.edges), "density": H.density},
        bound,
        len(matching) >= bound,
        {"matching_size": len(matching)},
    )


def min_vertex_cover_size(H: Hypergraph, cap: Optional[int] = None) -> int:
    """Smallest vertex set meeting every edge, by exhaustive search over subset sizes."""
    if not H.edges:
        return 0
    cap = enumeration_cap(cap)
    # a maximal matching's vertices always cover, so the search stops by c * |matching|
    upper = H.edge_size * len(greedy_maximal_matching(H))
    if binomial_prefix_sum(H.vertices, upper) > cap:
        raise EnumerationCapError(f"Vertex cover search over {H.vertices} vertices exceeds the cap {cap}")
    edge_masks = [sum(1 << v for v in e) for e in H.edges]
    for size in range(upper + 1):
        for chosen in itertools.combinations(range(H.vertices), size):
            mask = sum(1 << v for v in chosen)
            if all(mask & e for e in edge_masks):
                return size
    return upper


def check_cover_matching(H: Hypergraph, cap: Optional[int] = None) -> BoundReport:
    """Every vertex cover of size >= k forces a matching of size >= k / c."""
    cover = min_vertex_cover_size(H, cap)
    matching = greedy_maximal_matching(H)
    bound = Fraction(cover, H.edge_size)
    return BoundReport(
        "cover_matching",
        {"vertices": H.vertices, "edge_size": H.edge_size, "edges": len(H.edges)},
        bound,
        len(matching) >= bound,
        {"min_vertex_cover": cover, "matching_size": len(matching)},
    )


def max_pairwise_intersection(A: BitMatrix) -> int:
    if A.cols < 2:
        return 0
    dense = A.to_dense().astype(np.int64)
    gram = dense.T @ dense
    np.fill_diagonal(gram, 0)
    return int(gram.max())


def is_disjunct(A: BitMatrix, d: int, exhaustive: bool = False, cap: Optional[int] = None) -> bool:
    """No column's support lies inside the union of any d other columns.

    Unless exhaustive is set, d * (max pairwise intersection) < (min column weight) settles it directly.
    """
    if d < 0:
        raise ParameterRangeError(f"d must be non-negative, got {d}")
    if A.cols == 0:
        return True
    if not exhaustive and A.cols > 1:
        if d * max_pairwise_intersection(A) < int(A.column_weights.min()):
            return True
    cap = enumeration_cap(cap)
    masks = A.column_masks
    for j, target in enumerate(masks):
        if target == 0:
            return False
        # only the part of each other column inside column j matters
        pieces = sorted({m & target for i, m in enumerate(masks) if i != j and m & target})
        size = min(d, len(pieces))
        if math.comb(len(pieces), size) > cap:
            raise EnumerationCapError(f"Disjunctness check for column {j} exceeds the cap {cap}")
        for combo in itertools.combinations(pieces, size):
            union = 0
            for m in combo:
                union |= m
            if union == target:
                logger.debug(f"Column {j} is covered by {size} other columns")
                return False
    return True
