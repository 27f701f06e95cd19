from fractions import Fraction

import numpy as np
import pytest
from hypothesis import given, settings

from core.counterexamples import identity_family
from core.equivalence import Rescaling, permute, rescale
from core.errors import BudgetExceededError, UnsupportedDepthError
from core.network import Architecture, ParamKey, Params, ScalarMode, forward
from core.paths import (PathIndex, algebraic_realization, apply_P, embed, embedding_realization, enumerate_paths,
                        evaluate_linear_form, linear_form, path_activations, support_check)
from factories import params_and_input, random_exact_params, random_permutation, random_rescaling


def test_path_counts_shallow():
    index = PathIndex(Architecture((1, 2, 1)))
    assert index.p_counts == [2, 2, 1]
    assert index.n_q1 == 2
    assert index.n_paths == 5


def test_path_counts_deep():
    index = PathIndex(Architecture((2, 2, 1, 1)))
    assert index.p_counts[0] == 4
    assert index.q_counts == [2, 1]


def test_path_counts_without_hidden_layers():
    index = PathIndex(Architecture((1, 1)))
    assert index.p_counts == [1, 1]
    assert index.n_q == 0
    assert index.n_q1 == 0


def test_enumerate_paths_orders_by_layer():
    index = enumerate_paths(Architecture((1, 2, 1)))
    assert [index.flat_position(p) for p in index.paths()] == list(range(index.n_paths))
    assert index.n_paths == 5


def test_path_budget():
    with pytest.raises(BudgetExceededError) as info:
        PathIndex(Architecture((3, 3, 3)), budget=10)
    assert info.value.limit == 10


def test_path_keys(abs_theta):
    keys = embed(abs_theta).keys
    assert keys[0] == "μ0->ν1.0->η0"
    assert keys[2] == "b:ν1.0->η0"
    assert keys[-1] == "b:η0"


def test_flat_position_matches_enumeration():
    index = PathIndex(Architecture((2, 3, 2, 1)))
    for position, path in enumerate(index.paths()):
        assert index.flat_position(path) == position


def test_abs_embedding(abs_theta):
    assert list(embed(abs_theta).phi) == [1, -1, 0, 0, 0]


@pytest.mark.parametrize("t", [0, 1, Fraction(-5, 2)])
def test_identity_family_embedding(t):
    assert list(embed(identity_family(t)).phi) == [1, 1, -t, -t, t]


def test_embedding_invariant_under_single_neuron_scaling(rng):
    theta = random_exact_params(rng, [2, 3, 2])
    scaled = rescale(theta, Rescaling.from_neurons(theta.architecture, {(1, 1): Fraction(3)}))
    assert list(embed(scaled).phi) == list(embed(theta).phi)


def test_blocks_are_views_of_flat_vector(rng):
    theta = random_exact_params(rng, [2, 3, 2, 2])
    embedding = embed(theta)
    index = embedding.index
    for eta in range(2):
        assert embedding.input_blocks[eta].shape == (index.n_q1, 2)
        assert embedding.hidden_blocks[eta].shape == (index.n_q + 1,)
        assert list(embedding.hidden_blocks[eta]) == list(embedding.phi[index.hidden_block_indices(eta)])


def test_blocks_need_hidden_layer():
    index = PathIndex(Architecture((2, 1)))
    with pytest.raises(UnsupportedDepthError):
        index.input_block_indices(0)


def test_apply_P_zero():
    u = Params.zeros([2, 2, 1])
    assert not np.any(apply_P(u))


def test_apply_P_hidden_bias_only():
    u = Params.from_lists([[[0]], [[0]]], [[1], [0]])
    assert list(apply_P(u)) == [0, 1, 0]


def test_embedding_of_exponentials(rng):
    arch = Architecture((2, 3, 2))
    size = len(Params.zeros(arch.widths).as_vector())
    alpha = Params.from_vector(arch, list(rng.uniform(-1, 1, size=size)), ScalarMode.FLOAT)
    theta = Params(tuple(np.exp(W) for W in alpha.weights), tuple(np.exp(b) for b in alpha.biases),
                   ScalarMode.FLOAT)
    assert np.allclose(embed(theta).phi, np.exp(apply_P(alpha)), rtol=1e-12)


def test_path_activations_shallow(abs_theta):
    _, trace = forward(abs_theta, [1])
    assert list(path_activations(trace.statuses, abs_theta.architecture)) == [1, 0, 1]


def test_path_activation_through_inactive_neuron():
    statuses = [np.array([1, 0]), np.array([1])]
    alpha = path_activations(statuses, Architecture((1, 2, 1, 1)))
    # Q_1 = {ν1.0->ν2.0, ν1.1->ν2.0}, Q_2 = {ν2.0}, y el 1 final
    assert list(alpha) == [1, 0, 1, 1]


def test_algebraic_realization_abs(abs_theta):
    assert list(algebraic_realization(abs_theta, [-3])) == [3]


def test_all_inactive_gives_output_bias():
    theta = Params.from_lists([[[1], [2]], [[3, 4]]], [[-10, -10], [Fraction(7, 2)]])
    assert list(algebraic_realization(theta, [1])) == [Fraction(7, 2)]


def test_embedding_realization_abs(abs_theta):
    assert list(embedding_realization(abs_theta, [2])) == [2]


@settings(max_examples=60, deadline=None)
@given(params_and_input(min_depth=2, max_depth=4, max_width=3))
def test_realization_identities(case):
    theta, x = case
    expected = list(forward(theta, x)[0])
    assert list(algebraic_realization(theta, x)) == expected
    assert list(embedding_realization(theta, x)) == expected


@pytest.mark.slow
def test_realization_identities_many_draws():
    rng = np.random.default_rng(3)
    for _ in range(10 ** 4):
        depth = int(rng.integers(2, 5))
        widths = [int(w) for w in rng.integers(1, 4, size=depth + 1)]
        theta = random_exact_params(rng, widths)
        x = [Fraction(int(rng.integers(-20, 21)), int(rng.integers(1, 5))) for _ in range(widths[0])]
        expected = list(forward(theta, x)[0])
        assert list(algebraic_realization(theta, x)) == expected
        assert list(embedding_realization(theta, x)) == expected


def test_linear_form_with_frozen_activations(abs_theta):
    arch = abs_theta.architecture
    nearby = Params.from_vector(arch, list(abs_theta.as_vector() + Fraction(1, 100)))
    form = linear_form(abs_theta, [1])
    assert form.shape == (1, 5)
    assert list(evaluate_linear_form(abs_theta, [1], embed(nearby).phi)) == list(forward(nearby, [1])[0])


def test_linear_form_without_hidden_layers():
    theta = Params.from_lists([[[2, -1]]], [[3]])
    assert list(evaluate_linear_form(theta, [1, 1], embed(theta).phi)) == [4]


def test_support_check_abs(abs_theta):
    report = support_check(abs_theta)
    assert report.equality_holds
    assert report.violations == ()


def test_support_check_dead_neuron():
    theta = Params.from_lists([[[1], [-1]], [[1, 0]]], [[0, 0], [0]])
    report = support_check(theta)
    assert not report.admissible
    assert report.inclusion_holds
    assert not report.equality_holds
    assert report.equality_violations == (ParamKey("w", 1, 1, 0),)
    assert report.verified


def test_support_check_zero_network():
    report = support_check(Params.zeros([2, 2, 1]))
    assert report.support_size == 0
    assert report.covered_size == 0


def _random_widths(rng, max_depth=4, max_width=3):
    depth = int(rng.integers(2, max_depth + 1))
    return [int(w) for w in rng.integers(1, max_width + 1, size=depth + 1)]


def _assert_rescaling_invariance(rng, draws):
    for _ in range(draws):
        theta = random_exact_params(rng, _random_widths(rng))
        scaled = rescale(theta, random_rescaling(rng, theta.architecture))
        assert list(embed(scaled).phi) == list(embed(theta).phi)


def test_embedding_invariant_under_rescaling(rng):
    _assert_rescaling_invariance(rng, 40)


@pytest.mark.slow
def test_embedding_invariant_under_rescaling_many_draws():
    _assert_rescaling_invariance(np.random.default_rng(21), 1000)


def _moved_path(path, maps, depth):
    start, idx = path
    return start, tuple(int(maps[layer - 1][i]) if 0 < layer < depth else i
                        for layer, i in zip(range(start, depth + 1), idx))


def test_embedding_covariant_under_permutation(rng):
    for _ in range(30):
        theta = random_exact_params(rng, _random_widths(rng))
        pi = random_permutation(rng, theta.architecture)
        phi, moved = embed(theta), embed(permute(theta, pi))
        index = phi.index
        for path, value in zip(index.paths(), phi.phi):
            assert moved.phi[index.flat_position(_moved_path(path, pi.maps, theta.depth))] == value
