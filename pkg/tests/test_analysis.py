# tests/test_analysis.py
import itertools
import math
from fractions import Fraction

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from noisygt.analysis import (
    Hypergraph,
    check_cover_matching,
    check_matching_lemma,
    close_ball_pairings,
    close_ball_volume,
    greedy_maximal_matching,
    hamming_volume,
    is_disjunct,
    lemma1_check,
    lemma2_check,
    lemma2_sweep,
    lemma3_bound,
    max_pairwise_intersection,
    min_vertex_cover_size,
    verify_correcting,
)
from noisygt.condense import codeword_graph_matrix, induced_code, kautz_singleton_matrix, random_function
from noisygt.errors import EnumerationCapError, ParameterRangeError
from noisygt.gtcore import AccuracyBudget, BitMatrix, NoiseBudget

# --- volumes ---


def test_hamming_volume_values():
    assert hamming_volume(7, 0) == 1
    assert hamming_volume(4, 2) == 11
    assert hamming_volume(5, 5) == 32
    with pytest.raises(ParameterRangeError):
        hamming_volume(3, 4)


@settings(max_examples=200, deadline=None)
@given(st.integers(1, 60), st.data())
def test_hamming_volume_recurrence(a, data):
    b = data.draw(st.integers(1, a))
    assert hamming_volume(a, b) == hamming_volume(a, b - 1) + math.comb(a, b)


@settings(max_examples=100, deadline=None)
@given(st.integers(2, 200), st.data())
def test_hamming_volume_entropy_bound(a, data):
    b = data.draw(st.integers(1, max(1, a // 2)))
    r = b / a
    entropy = -r * math.log2(r) - (1 - r) * math.log2(1 - r) if 0 < r < 1 else 0.0
    assert math.log2(hamming_volume(a, b)) <= a * entropy + 1e-9


def test_close_ball_brute_force():
    a, b = 6, 2
    center = (1, 1, 0, 0, 0, 0)
    for e0, e1 in itertools.product(range(4), range(3)):
        count = 0
        for v in itertools.product((0, 1), repeat=a):
            up = sum(1 for c, x in zip(center, v) if c == 0 and x == 1)
            down = sum(1 for c, x in zip(center, v) if c == 1 and x == 0)
            count += up <= e0 and down <= e1
        assert close_ball_volume(a, b, e0, e1) == count


def test_close_ball_examples():
    assert close_ball_volume(10, 3, 0, 0) == 1
    assert close_ball_volume(4, 2, 1, 1) == 9


def test_close_ball_pairings():
    rng = np.random.default_rng(1)
    for _ in range(50):
        a = int(rng.integers(1, 20))
        b = int(rng.integers(0, a + 1))
        e0, e1 = int(rng.integers(0, 6)), int(rng.integers(0, 6))
        report = close_ball_pairings(a, b, e0, e1)
        assert report.support_side_holds
        assert report.exact == close_ball_volume(a, b, e0, e1)
    # the other index pairing can fall short of the exact volume
    assert not close_ball_pairings(10, 1, 3, 0).stated_holds


# --- bound checks ---


def test_lemma1_examples():
    assert lemma1_check(100, 10, 9, 0, 0, 0).satisfied
    report = lemma1_check(10, 10, 5, 0, 0, 0)
    assert not report.satisfied
    assert report.computed_bound == 6
    assert report.details["m_over_d"] == 1


def test_lemma2_examples():
    first = lemma2_check(50, 5, 100, 0, 0, 0, "1/2")
    assert first.satisfied
    assert first.details["binding"] == "first"
    neither = lemma2_check(1, 1, 100, 10, 0, 0, "1/2")
    assert not neither.satisfied
    assert neither.details["binding"] == "neither"
    second = lemma2_check(1, 1, 100, 10, 50, 0, "1/2")
    assert second.satisfied
    assert second.details["binding"] == "second"
    with pytest.raises(ParameterRangeError):
        lemma2_check(1, 1, 100, 10, 0, 0, 0)


def test_lemma2_sweep_default_grid():
    reports = lemma2_sweep(20, 2, 64, 3, 1, 0)
    assert [r.inputs["eps"] for r in reports] == [Fraction(i, 10) for i in range(1, 10)]


def test_lemma3_closed_form_example():
    bound = lemma3_bound(1024, 8, 8, 0)
    assert bound.closed_form == pytest.approx(40)
    assert bound.exact >= bound.closed_form


def test_lemma3_full_sparsity_is_trivial():
    bound = lemma3_bound(16, 16, 0, 0)
    assert bound.closed_form <= 0
    assert bound.exact == 16


@pytest.mark.parametrize("n", [8, 32, 100, 512])
def test_lemma3_exact_dominates_closed_form(n):
    for d in range(1, min(n, 12) + 1):
        for e0p in range(0, 4):
            bound = lemma3_bound(n, d, e0p, 0)
            assert bound.exact >= bound.closed_form - 1e-9


def test_lemma3_with_false_negative_accuracy():
    bound = lemma3_bound(64, 4, 1, 1)
    assert bound.decoding_ball >= 64
    assert bound.exact <= lemma3_bound(64, 4, 1, 0).exact


def test_report_lines():
    lines = lemma1_check(8, 2, 1, 1, 0, 0).as_lines()
    assert lines[0] == "bound=lemma1"
    assert lines[-1] == "satisfied=True"


# --- exhaustive correctness verifier ---


def test_identity_is_noiseless_correcting(identity4):
    report = verify_correcting(identity4, 1, NoiseBudget(0, 0), AccuracyBudget(0, 0))
    assert report.passed
    assert report.supports_checked == 5


def test_identity_tolerates_a_false_positive_with_slack(identity4):
    assert not verify_correcting(identity4, 1, NoiseBudget(1, 0), AccuracyBudget(0, 0)).passed
    assert verify_correcting(identity4, 1, NoiseBudget(1, 0), AccuracyBudget(1, 0)).passed


def test_duplicate_columns_fail_with_a_witness(duplicated_columns):
    report = verify_correcting(duplicated_columns, 1, NoiseBudget(0, 0), AccuracyBudget(0, 0))
    assert not report.passed
    witness = report.witness
    assert witness.x.indices == (0,)
    assert witness.y_hat.to_string() == "10"
    assert witness.union.indices == (0, 1)
    assert verify_correcting(duplicated_columns, 1, NoiseBudget(0, 0), AccuracyBudget(1, 0)).passed


def test_verifier_argument_checks(identity4):
    with pytest.raises(ParameterRangeError):
        verify_correcting(identity4, 1, NoiseBudget(0, 0), AccuracyBudget(0, 1))
    with pytest.raises(EnumerationCapError):
        verify_correcting(BitMatrix.identity(20), 2, NoiseBudget(2, 2), AccuracyBudget(0, 0), cap=1000)


def _verifier_corpus():
    for n in range(2, 7):
        yield BitMatrix.identity(n)
    yield kautz_singleton_matrix(2, 1)
    yield kautz_singleton_matrix(3, 2)
    yield codeword_graph_matrix(induced_code(random_function(3, 1, 2, seed=2)))
    yield BitMatrix.from_dense([[1, 1, 0], [0, 0, 1]])


@pytest.mark.parametrize("budget", [NoiseBudget(0, 0), NoiseBudget(1, 0), NoiseBudget(0, 1)])
@pytest.mark.parametrize("acc", [AccuracyBudget(0, 0), AccuracyBudget(1, 0)])
def test_passing_designs_respect_the_bounds(budget, acc):
    for A in _verifier_corpus():
        for d in (1, 2):
            if d > A.cols:
                continue
            report = verify_correcting(A, d, budget, acc)
            if not report.passed:
                continue
            assert lemma1_check(A.rows, d, budget.e0, budget.e1, acc.e0, acc.e1).satisfied
            if budget == NoiseBudget(0, 0):
                assert A.rows >= lemma3_bound(A.cols, d, acc.e0, 0).exact


def test_verifier_threads_do_not_change_the_result():
    A = kautz_singleton_matrix(3, 2)
    sequential = verify_correcting(A, 2, NoiseBudget(1, 1), AccuracyBudget(1, 0))
    threaded = verify_correcting(A, 2, NoiseBudget(1, 1), AccuracyBudget(1, 0), max_workers=3)
    assert sequential == threaded


# --- hypergraphs ---


def test_single_edge_matching():
    assert greedy_maximal_matching(Hypergraph.of(5, 3, [(0, 2, 4)])) == ((0, 2, 4),)


@pytest.mark.parametrize("v,c", [(6, 2), (7, 3), (10, 4)])
def test_complete_hypergraph_matching(v, c):
    assert len(greedy_maximal_matching(Hypergraph.complete(v, c))) == v // c


def test_empty_hypergraph():
    H = Hypergraph.of(6, 2, [])
    assert greedy_maximal_matching(H) == ()
    assert check_matching_lemma(H).satisfied
    assert min_vertex_cover_size(H) == 0


def test_clique_matching_bound():
    report = check_matching_lemma(Hypergraph.complete(10, 2))
    assert report.details["matching_size"] == 5
    assert report.computed_bound == Fraction(9, 4)
    assert report.satisfied


def test_matching_lemma_on_random_hypergraphs():
    rng = np.random.default_rng(2024)
    for _ in range(500):
        c = int(rng.integers(2, 5))
        v = int(rng.integers(c, 41))
        count = int(rng.integers(1, min(math.comb(v, c), 300) + 1))
        H = Hypergraph.random(v, c, count, rng)
        assert len(H.edges) == count
        assert check_matching_lemma(H).satisfied


def test_cover_matching():
    H = Hypergraph.complete(4, 2)
    assert min_vertex_cover_size(H) == 3
    report = check_cover_matching(H)
    assert report.satisfied
    assert report.details["min_vertex_cover"] == 3


def test_hypergraph_validation():
    with pytest.raises(ParameterRangeError):
        Hypergraph.of(4, 2, [(0, 0)])
    with pytest.raises(ParameterRangeError):
        Hypergraph.of(4, 2, [(0, 4)])
    with pytest.raises(ParameterRangeError):
        Hypergraph.of(4, 1, [(0,)])
    H = Hypergraph.of(4, 2, [(0, 1), (1, 2)])
    assert H.degree(1) == 2
    assert H.density == Fraction(2, 6)


# --- disjunctness ---


def test_identity_disjunctness():
    A = BitMatrix.identity(6)
    assert is_disjunct(A, 5, exhaustive=True)
    assert max_pairwise_intersection(A) == 0


def test_duplicates_are_not_disjunct(duplicated_columns):
    assert not is_disjunct(duplicated_columns, 1)
