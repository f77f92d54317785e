import math

import numpy as np
import pytest

from conformal_dimension import symbolic
from conformal_dimension.errors import DomainError, ResourceError
from conformal_dimension.models import MarkovMeasure, SubshiftSpec, Word

GOLDEN_ENTROPY = math.log((1 + math.sqrt(5)) / 2)


def test_full_shift_entropy(full_shift: SubshiftSpec):
    assert symbolic.topological_entropy(full_shift) == pytest.approx(math.log(2), abs=1e-10)


def test_golden_mean_entropy(golden_mean: SubshiftSpec):
    assert symbolic.topological_entropy(golden_mean) == pytest.approx(GOLDEN_ENTROPY, abs=1e-10)
    assert GOLDEN_ENTROPY == pytest.approx(0.4812118, abs=1e-7)


def test_reducible_coding_is_rejected():
    spec = SubshiftSpec.from_rows([[1, 1], [0, 1]])
    assert not spec.irreducible
    with pytest.raises(DomainError):
        symbolic.topological_entropy(spec)


def test_dead_symbol_is_rejected():
    with pytest.raises(ValueError):
        SubshiftSpec.from_rows([[1, 0], [1, 0]])


@pytest.mark.parametrize("n", [1, 2, 5, 10])
def test_word_array_matches_word_count(golden_mean: SubshiftSpec, n: int):
    words = symbolic.word_array(golden_mean, n)
    assert words.shape == (symbolic.word_count(golden_mean, n), n)
    # Fibonacci numbers
    assert words.shape[0] == [2, 3, 5, 8, 13, 21, 34, 55, 89, 144][n - 1]


def test_word_array_is_lexicographic_and_admissible(golden_mean: SubshiftSpec):
    words = symbolic.word_array(golden_mean, 6)
    assert [tuple(row) for row in words] == sorted(tuple(row) for row in words)
    assert not np.any((words[:, :-1] == 1) & (words[:, 1:] == 1))


def test_word_array_respects_budget(full_shift: SubshiftSpec):
    with pytest.raises(ResourceError) as info:
        symbolic.word_array(full_shift, 12, budget=2**10)
    assert info.value.requested == 2**12
    assert info.value.bound == 2**10


def test_word_array_rejects_empty_words(full_shift: SubshiftSpec):
    with pytest.raises(DomainError):
        symbolic.word_array(full_shift, 0)


def test_enumerate_words_yields_words(full_shift: SubshiftSpec):
    words = list(symbolic.enumerate_words(full_shift, 2))
    assert words == [Word(symbols=s) for s in ((0, 0), (0, 1), (1, 0), (1, 1))]


def test_word_helpers():
    word = Word(symbols=(0, 1, 0))
    assert len(word) == 3
    assert word.reversed() == Word(symbols=(0, 1, 0))
    assert str(word + Word(symbols=(1,))) == "0101"
    assert not Word(symbols=(1, 1)).is_admissible(SubshiftSpec.golden_mean())


def test_parry_measure_has_maximal_entropy(golden_mean: SubshiftSpec):
    parry = symbolic.parry_measure(golden_mean)
    assert parry.supported_on(golden_mean)
    assert symbolic.markov_entropy(parry) == pytest.approx(GOLDEN_ENTROPY, abs=1e-10)


def test_random_measures_stay_below_entropy(
    full_shift: SubshiftSpec, golden_mean: SubshiftSpec, rng: np.random.Generator
):
    for spec in (full_shift, golden_mean):
        bound = symbolic.topological_entropy(spec)
        for _ in range(1000):
            measure = symbolic.random_markov_measure(spec, rng)
            assert measure.supported_on(spec)
            assert symbolic.markov_entropy(measure) <= bound + 1e-12


@pytest.mark.parametrize(
    "stochastic, expected",
    [
        ([[0.5, 0.5], [0.5, 0.5]], math.log(2)),
        ([[0.5, 0.5], [1.0, 0.0]], 2 / 3 * math.log(2)),
        ([[0.0, 1.0], [1.0, 0.0]], 0.0),
        ([[0.0, 1.0, 0.0], [0.0, 0.0, 1.0], [1.0, 0.0, 0.0]], 0.0),
    ],
)
def test_markov_entropy_examples(stochastic: list, expected: float):
    measure = symbolic.markov_measure(np.array(stochastic))
    assert symbolic.markov_entropy(measure) == pytest.approx(expected, abs=1e-12)


def test_golden_mean_markov_entropy_value():
    measure = symbolic.markov_measure(np.array([[0.5, 0.5], [1.0, 0.0]]))
    assert measure.stationary == pytest.approx([2 / 3, 1 / 3])
    assert symbolic.markov_entropy(measure) == pytest.approx(0.462098, abs=1e-6)


def test_stationary_distribution():
    stochastic = np.array([[0.5, 0.5], [1.0, 0.0]])
    assert symbolic.stationary_distribution(stochastic) == pytest.approx([2 / 3, 1 / 3])


def test_markov_measure_validation():
    with pytest.raises(ValueError):
        MarkovMeasure(stochastic=[[0.5, 0.5], [1.0, 0.0]], stationary=[0.5, 0.5])


def test_integrate_edge_function_accepts_callables(full_shift: SubshiftSpec):
    measure = symbolic.parry_measure(full_shift)
    as_array = symbolic.integrate_edge_function(measure, np.array([[1.0, 2.0], [3.0, 4.0]]))
    as_callable = symbolic.integrate_edge_function(measure, lambda i, j: 1.0 + 2 * i + j)
    assert as_array == pytest.approx(2.5)
    assert as_callable == pytest.approx(2.5)


def test_gibbs_measure_of_symbol_potential(full_shift: SubshiftSpec):
    # Bernoulli(p) with p proportional to exp(value of the next symbol)
    values = np.log(np.array([[1.0, 3.0], [1.0, 3.0]]))
    gibbs = symbolic.gibbs_measure(full_shift, values)
    assert gibbs.stochastic == pytest.approx(np.array([[0.25, 0.75], [0.25, 0.75]]))


def test_perron_on_permutation_matrix():
    # Periodic: plain power iteration would oscillate
    rho, vector = symbolic.perron(np.array([[0.0, 2.0], [2.0, 0.0]]))
    assert rho == pytest.approx(2.0, rel=1e-12)
    assert vector == pytest.approx([1.0, 1.0])


def test_perron_rejects_negative_entries():
    with pytest.raises(DomainError):
        symbolic.perron(np.array([[1.0, -1.0], [1.0, 1.0]]))


def test_higher_block_keeps_entropy(golden_mean: SubshiftSpec):
    block, words = symbolic.higher_block(golden_mean, 3)
    assert block.alphabet_size == words.shape[0] == 5
    assert block.irreducible
    assert symbolic.topological_entropy(block) == pytest.approx(GOLDEN_ENTROPY, abs=1e-10)


def test_transposed_coding_reads_words_backwards():
    spec = SubshiftSpec.from_rows([[0, 1, 0], [0, 0, 1], [1, 1, 0]])
    backwards = spec.transposed()
    for row in symbolic.word_array(spec, 4):
        assert Word(symbols=tuple(int(s) for s in row[::-1])).is_admissible(backwards)
