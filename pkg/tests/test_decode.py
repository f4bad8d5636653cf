# tests/test_decode.py
from fractions import Fraction

import numpy as np
import pytest

from noisygt.condense import build_scheme, codeword_graph_matrix, induced_code, plan_extractor_style, random_function
from noisygt.decode import (
    GuessInstance,
    decode_with_doubling,
    oracle_decode_exhaustive,
    threshold_decode,
    two_stage_decode,
)
from noisygt.errors import (
    ColumnWeightError,
    DimensionMismatchError,
    EnumerationCapError,
    ParameterRangeError,
    SearchExhaustedError,
)
from noisygt.gtcore import BitMatrix, BitVec, NoiseBudget, SupportSet, encode, random_support
from noisygt.noise import apply_random_noise
from noisygt.utils import derive_rng

# --- threshold decoder ---


def test_noiseless_decoding_contains_the_support(noiseless_scheme):
    A, params = noiseless_scheme.matrix, noiseless_scheme.params
    x = SupportSet.of(A.cols, [3, 50, 128, 255])
    result = threshold_decode(A, encode(A, x), params.T, 0, params)
    assert result.support.issuperset(x)
    assert result.params_used is params
    assert result.required_count == params.T


def test_all_zero_observation_decodes_to_empty(noiseless_scheme):
    A = noiseless_scheme.matrix
    assert threshold_decode(A, BitVec.zeros(A.rows), 128, 0).support.weight == 0


def test_decoder_contract_violations(noiseless_scheme):
    A = noiseless_scheme.matrix
    y = BitVec.zeros(A.rows)
    with pytest.raises(ColumnWeightError):
        threshold_decode(A, y, 64, 0)
    with pytest.raises(DimensionMismatchError):
        threshold_decode(A, BitVec.zeros(A.rows - 1), 128, 0)
    with pytest.raises(ParameterRangeError):
        threshold_decode(A, y, 128, 1)
    with pytest.raises(ColumnWeightError):
        threshold_decode(BitMatrix.from_column_supports(3, [[0], [1, 2]]), BitVec.zeros(3), 1, 0)


def test_threshold_comparison_is_exact():
    # T = 3 and nu/gamma = 1/3 keep columns with at least 2 positive tests
    A = BitMatrix.from_column_supports(6, [[0, 1, 2], [3, 4, 5]])
    result = threshold_decode(A, BitVec.from_string("110100"), 3, Fraction(1, 3))
    assert result.support.indices == (0,)
    assert result.required_count == 2
    assert result.scores.tolist() == [2, 1]


def test_decoder_is_deterministic(noisy_scheme):
    A, params = noisy_scheme.matrix, noisy_scheme.params
    x = SupportSet.of(A.cols, [1, 2, 3, 4])
    y_hat = apply_random_noise(encode(A, x), NoiseBudget(100, 2), seed=3).observation
    assert threshold_decode(A, y_hat, params.T, params.nu_over_gamma) == threshold_decode(
        A, y_hat, params.T, params.nu_over_gamma
    )


def test_noiseless_success_over_many_supports(noiseless_scheme):
    A, params = noiseless_scheme.matrix, noiseless_scheme.params
    for trial in range(1000):
        x = random_support(A.cols, params.D, derive_rng(1, trial))
        decoded = threshold_decode(A, encode(A, x), params.T, params.nu_over_gamma).support
        assert decoded.issuperset(x)
        assert decoded.weight < params.K


def test_noisy_success_at_the_planned_budgets(noisy_scheme):
    A, params = noisy_scheme.matrix, noisy_scheme.params
    budget = NoiseBudget(params.false_positive_budget, params.false_negative_budget)
    for trial in range(1000):
        rng = derive_rng(2, trial)
        x = random_support(A.cols, params.D, rng)
        y_hat = apply_random_noise(encode(A, x), budget, rng).observation
        decoded = threshold_decode(A, y_hat, params.T, params.nu_over_gamma).support
        assert decoded.issuperset(x)
        assert decoded.weight < params.K


def test_noisy_success_on_the_lossless_plan(lossless_scheme):
    A, params = lossless_scheme.matrix, lossless_scheme.params
    assert params.K == 8
    budget = NoiseBudget(params.false_positive_budget, params.false_negative_budget)
    assert (budget.e0, budget.e1) == (120, 14)
    for trial in range(1000):
        rng = derive_rng(4, trial)
        x = random_support(A.cols, params.D, rng)
        y_hat = apply_random_noise(encode(A, x), budget, rng).observation
        decoded = threshold_decode(A, y_hat, params.T, params.nu_over_gamma).support
        assert decoded.issuperset(x)
        assert decoded.weight < params.K


# --- doubling search ---


def _doubling_instances(seed):
    cache = {}

    def instance_for(guess):
        if guess not in cache:
            cache[guess] = GuessInstance.from_scheme(build_scheme(plan_extractor_style(guess, 256, 0, 0), seed + guess))
        return cache[guess]

    return instance_for


def test_doubling_stops_at_the_first_guess_for_a_single_item():
    x = SupportSet.of(256, [77])
    outcome = decode_with_doubling(_doubling_instances(0), lambda g, inst: encode(inst.matrix, x), max_guess=64)
    assert (outcome.rounds, outcome.guess) == (1, 1)
    assert 77 in outcome.result.support


def test_doubling_reaches_the_true_sparsity():
    x = SupportSet.of(256, [5, 60, 61, 140, 201])
    outcome = decode_with_doubling(
        _doubling_instances(10), lambda g, inst: encode(inst.matrix, x), max_guess=64, K_of=lambda g: g
    )
    assert (outcome.rounds, outcome.guess) == (4, 8)
    assert outcome.result.support == x
    assert outcome.measurements_per_round == (512, 1024, 2048, 4096)
    assert outcome.total_measurements <= 2 * outcome.measurements_per_round[-1]


def test_doubling_gives_up_past_the_largest_guess():
    x = SupportSet.of(256, [1])
    with pytest.raises(SearchExhaustedError):
        decode_with_doubling(_doubling_instances(0), lambda g, inst: encode(inst.matrix, x), max_guess=4, K_of=lambda g: -1)
    with pytest.raises(ParameterRangeError):
        decode_with_doubling(_doubling_instances(0), lambda g, inst: encode(inst.matrix, x), max_guess=0)


# --- exhaustive oracle ---


def test_oracle_identity(identity4):
    y = encode(identity4, SupportSet.of(4, [2]))
    assert oracle_decode_exhaustive(identity4, y, 1, NoiseBudget(0, 0)) == frozenset({SupportSet.of(4, [2])})


def test_oracle_duplicate_columns(duplicated_columns):
    y = encode(duplicated_columns, SupportSet.of(3, [0]))
    assert oracle_decode_exhaustive(duplicated_columns, y, 1, NoiseBudget(0, 0)) == frozenset(
        {SupportSet.of(3, [0]), SupportSet.of(3, [1])}
    )


def test_oracle_cap(noiseless_scheme):
    A = noiseless_scheme.matrix
    with pytest.raises(EnumerationCapError):
        oracle_decode_exhaustive(A, BitVec.zeros(A.rows), 3, NoiseBudget(0, 0), cap=1000)


def test_threshold_output_covers_a_consistent_support():
    A = codeword_graph_matrix(induced_code(random_function(3, 2, 2, seed=4)))
    budget = NoiseBudget(2, 1)
    rng = np.random.default_rng(12)
    for _ in range(50):
        x = random_support(A.cols, int(rng.integers(1, 3)), rng)
        y_hat = apply_random_noise(encode(A, x), budget, rng).observation
        # T = 4 with nu/gamma = 1/4 survives the single false negative
        decoded = threshold_decode(A, y_hat, 4, Fraction(1, 4)).support
        consistent = oracle_decode_exhaustive(A, y_hat, x.weight, budget)
        assert x in consistent
        assert any(decoded.issuperset(z) for z in consistent)


# --- two-stage ---


def test_two_stage_confirms_exactly_the_support(noisy_scheme):
    A, params = noisy_scheme.matrix, noisy_scheme.params
    x = SupportSet.of(A.cols, [9, 99, 199, 249])
    budget = NoiseBudget(params.false_positive_budget, params.false_negative_budget)
    y_hat = apply_random_noise(encode(A, x), budget, seed=6).observation
    outcome = two_stage_decode(A, y_hat, params.T, params.nu_over_gamma, lambda i: i in x)
    assert outcome.support == x
    assert outcome.first_stage_tests == A.rows
    assert outcome.second_stage_tests == outcome.first_stage.support.weight
    assert outcome.total_tests == A.rows + outcome.first_stage.support.weight
