# tests/test_noise.py
import numpy as np
import pytest

from noisygt.condense import codeword_graph_matrix, induced_code, random_function
from noisygt.decode import threshold_decode
from noisygt.errors import EnumerationCapError, ParameterRangeError
from noisygt.gtcore import BitVec, NoiseBudget, SupportSet, closeness_deltas, encode, is_close, random_support
from noisygt.noise import (
    NoiseMode,
    NoiseSpec,
    apply_random_noise,
    corrupt_adversarial_greedy,
    corrupt_random,
    enumerate_noise_patterns,
    noise_pattern_count,
    noisy_observations,
)


@pytest.fixture(scope="module")
def small_design():
    return codeword_graph_matrix(induced_code(random_function(5, 2, 3, seed=21)))


# --- random channel ---


def test_zero_budget_is_identity():
    y = BitVec.from_string("0110100")
    assert corrupt_random(y, NoiseBudget(0, 0), seed=1) == y


def test_all_ones_cannot_gain_false_positives():
    y = BitVec.ones(6)
    report = apply_random_noise(y, NoiseBudget(5, 0), seed=1)
    assert report.observation == y
    assert report.false_positives == 0
    assert report.capped


def test_random_channel_applies_exactly_the_budget():
    rng = np.random.default_rng(0)
    for trial in range(100):
        y = BitVec(rng.integers(0, 2, size=40))
        budget = NoiseBudget(int(rng.integers(0, 10)), int(rng.integers(0, 10)))
        report = apply_random_noise(y, budget, seed=trial)
        assert closeness_deltas(y, report.observation) == (report.false_positives, report.false_negatives)
        assert report.false_positives == min(budget.e0, len(y) - y.weight)
        assert report.false_negatives == min(budget.e1, y.weight)
        assert is_close(y, report.observation, budget)


def test_random_channel_is_reproducible():
    y = BitVec.from_string("0101010101010101")
    budget = NoiseBudget(3, 2)
    assert corrupt_random(y, budget, seed=42) == corrupt_random(y, budget, seed=42)


# --- greedy adversary ---


def test_greedy_zero_budget_is_the_encoding(small_design):
    x = SupportSet.of(small_design.cols, [3, 17])
    assert corrupt_adversarial_greedy(small_design, x, NoiseBudget(0, 0)) == encode(small_design, x)


def test_greedy_stays_within_budget(small_design):
    rng = np.random.default_rng(5)
    for _ in range(50):
        x = random_support(small_design.cols, int(rng.integers(0, 4)), rng)
        budget = NoiseBudget(int(rng.integers(0, 12)), int(rng.integers(0, 4)))
        y = encode(small_design, x)
        assert is_close(y, corrupt_adversarial_greedy(small_design, x, budget), budget)


def test_greedy_false_positives_only_touch_clean_zeros(small_design):
    x = SupportSet.of(small_design.cols, [0, 1])
    y = encode(small_design, x)
    n01, n10 = closeness_deltas(y, corrupt_adversarial_greedy(small_design, x, NoiseBudget(6, 0)))
    assert (n01, n10) == (6, 0)


def test_greedy_false_negatives_beyond_the_margin_drop_an_item():
    A = codeword_graph_matrix(induced_code(random_function(3, 2, 2, seed=1)))
    x = SupportSet.of(A.cols, [0])
    # T = 4 and nu/gamma = 1/4 tolerate one lost test per item
    within = corrupt_adversarial_greedy(A, x, NoiseBudget(0, 1))
    assert 0 in threshold_decode(A, within, 4, "1/4").support
    beyond = corrupt_adversarial_greedy(A, x, NoiseBudget(0, 2))
    assert 0 not in threshold_decode(A, beyond, 4, "1/4").support


def test_greedy_false_positives_promote_an_outsider(small_design):
    x = SupportSet.of(small_design.cols, [2])
    y_hat = corrupt_adversarial_greedy(small_design, x, NoiseBudget(4, 0))
    decoded = threshold_decode(small_design, y_hat, 4, 0).support
    assert decoded.weight >= 2
    assert 2 in decoded


def test_greedy_respects_planned_sparsity(noiseless_scheme):
    x = SupportSet.of(noiseless_scheme.matrix.cols, range(5))
    with pytest.raises(ParameterRangeError):
        corrupt_adversarial_greedy(noiseless_scheme.matrix, x, NoiseBudget(1, 1), noiseless_scheme.params)


# --- exhaustive enumeration ---


def test_enumeration_zero_budget():
    y = BitVec.from_string("0110")
    assert list(enumerate_noise_patterns(y, NoiseBudget(0, 0))) == [y]


def test_enumeration_small_case():
    y = BitVec.from_string("01")
    patterns = {p.to_string() for p in enumerate_noise_patterns(y, NoiseBudget(1, 1))}
    assert patterns == {"01", "11", "00", "10"}


def test_enumeration_counts_and_uniqueness():
    y = BitVec.from_string("0011010010")
    budget = NoiseBudget(2, 2)
    patterns = list(enumerate_noise_patterns(y, budget))
    assert len(patterns) == noise_pattern_count(y, budget) == 22 * 11
    assert len(set(patterns)) == len(patterns)
    assert all(is_close(y, p, budget) for p in patterns)


def test_enumeration_cap_is_checked_before_producing_anything():
    with pytest.raises(EnumerationCapError):
        enumerate_noise_patterns(BitVec.zeros(30), NoiseBudget(3, 0), cap=100)


def test_enumeration_cap_from_environment(monkeypatch):
    monkeypatch.setenv("GT_ENUM_CAP", "10")
    with pytest.raises(EnumerationCapError):
        enumerate_noise_patterns(BitVec.zeros(8), NoiseBudget(2, 0))


# --- dispatch ---


def test_noisy_observations_modes(small_design):
    x = SupportSet.of(small_design.cols, [4])
    y = encode(small_design, x)
    budget = NoiseBudget(1, 0)
    assert list(noisy_observations(NoiseSpec(budget, NoiseMode.RANDOM, 3), y)) == [corrupt_random(y, budget, 3)]
    greedy = list(noisy_observations(NoiseSpec(budget, NoiseMode.GREEDY), y, small_design, x))
    assert greedy == [corrupt_adversarial_greedy(small_design, x, budget)]
    exhaustive = list(noisy_observations(NoiseSpec(budget, NoiseMode.EXHAUSTIVE), y))
    assert len(exhaustive) == 1 + (len(y) - y.weight)


def test_noisy_observations_argument_checks(small_design):
    y = BitVec.zeros(small_design.rows)
    with pytest.raises(ParameterRangeError):
        noisy_observations(NoiseSpec(NoiseBudget(0, 0), NoiseMode.GREEDY), y)
    with pytest.raises(ParameterRangeError):
        noisy_observations(NoiseSpec(NoiseBudget(len(y) + 1, 0)), y)


def test_noise_mode_values():
    assert NoiseMode("adversarial-greedy") is NoiseMode.GREEDY
    assert NoiseMode.EXHAUSTIVE.value == "exhaustive-worst-case"
