from fractions import Fraction

import numpy as np
import pytest

from core.equivalence import (EquivalenceKind, Permutation, Rescaling, canonical_form, check_ps_equivalent,
                              check_scaling_equivalent, is_admissible, log_ratio_vector, permute, rescale,
                              scaling_operator, scaling_operator_inverse, supp_paths_to_output)
from core.errors import DomainError, ShapeError
from core.network import Architecture, ParamKey, Params, realize
from factories import random_exact_params, random_permutation, random_rescaling


def test_rescale_abs(abs_theta):
    scaled = rescale(abs_theta, Rescaling((np.array([Fraction(2), Fraction(5)], dtype=object),)))
    assert list(scaled.W(1).flat) == [2, -5]
    assert list(scaled.W(2).flat) == [Fraction(1, 2), Fraction(1, 5)]
    assert scaled.b(2)[0] == 0


def test_rescale_preserves_realization(rng):
    theta = random_exact_params(rng, [2, 3, 2, 1])
    scaled = rescale(theta, random_rescaling(rng, theta.architecture))
    for x in ([0, 0], [1, -2], [Fraction(7, 3), 4]):
        assert list(realize(scaled, x)) == list(realize(theta, x))


def test_permute_preserves_realization(rng):
    theta = random_exact_params(rng, [2, 3, 2, 1])
    moved = permute(theta, random_permutation(rng, theta.architecture))
    for x in ([0, 0], [1, -2], [Fraction(-7, 3), 4]):
        assert list(realize(moved, x)) == list(realize(theta, x))


def test_permutation_maps_neuron_to_new_position():
    theta = Params.from_lists([[[1], [2], [3]], [[4, 5, 6]]], [[7, 8, 9], [0]])
    moved = permute(theta, Permutation((np.array([2, 0, 1]),)))
    assert list(moved.b(1)) == [8, 9, 7]
    assert list(moved.W(2).flat) == [5, 6, 4]


def test_inverse_actions(rng):
    theta = random_exact_params(rng, [2, 3, 2])
    lam = random_rescaling(rng, theta.architecture)
    pi = random_permutation(rng, theta.architecture)
    assert rescale(rescale(theta, lam), lam.inverse()) == theta
    assert permute(permute(theta, pi), pi.inverse()) == theta


def test_rescaling_rejects_nonpositive_factors():
    with pytest.raises(DomainError):
        Rescaling((np.array([1, 0]),))


def test_permutation_rejects_non_bijection():
    with pytest.raises(DomainError):
        Permutation((np.array([0, 0]),))


def test_rescaling_shape_mismatch(abs_theta):
    with pytest.raises(ShapeError):
        rescale(abs_theta, Rescaling((np.array([1, 1, 1]),)))


def test_admissibility():
    dead = Params.from_lists([[[1], [-1]], [[1, 0]]], [[0, 0], [0]])
    report = is_admissible(dead)
    assert not report
    assert report.offending_neurons == [(1, 1)]


def test_support_paths_skip_zero_edges():
    theta = Params.from_lists([[[1]], [[0], [3]], [[2, 5]]], [[0], [0, 0], [0]])
    paths = list(supp_paths_to_output(theta, (1, 0)))
    assert paths == [[ParamKey("w", 2, 1, 0), ParamKey("w", 3, 0, 1)]]


def test_s_witness_for_rescaled_abs(abs_theta):
    lam = Rescaling((np.array([Fraction(2), Fraction(5)], dtype=object),))
    witness = check_scaling_equivalent(abs_theta, rescale(abs_theta, lam))
    assert witness.kind is EquivalenceKind.S
    assert witness.rescaling.as_lists() == [[2, 5]]
    assert witness.to_dict()["relation"] == "S"


def test_s_witness_reconstructs_random_rescaling(rng):
    theta = random_exact_params(rng, [3, 2, 3, 2])
    lam = random_rescaling(rng, theta.architecture)
    target = rescale(theta, lam)
    witness = check_scaling_equivalent(theta, target)
    assert witness.kind is EquivalenceKind.S
    assert rescale(theta, witness.rescaling) == target


def test_s_check_in_float_mode(rng):
    theta = random_exact_params(rng, [2, 3, 1])
    lam = random_rescaling(rng, theta.architecture)
    witness = check_scaling_equivalent(theta.to_float(), rescale(theta, lam).to_float())
    assert witness.kind is EquivalenceKind.S
    for got, expected in zip(witness.rescaling.factors, lam.factors):
        assert np.allclose(np.asarray(got, dtype=np.float64), np.asarray(expected, dtype=np.float64))


def test_s_rejects_permuted_network(abs_theta):
    moved = permute(abs_theta, Permutation((np.array([1, 0]),)))
    assert check_scaling_equivalent(abs_theta, moved).kind is EquivalenceKind.NONE


def test_s_rejects_sign_change():
    theta = Params.from_lists([[[1], [1]], [[1, 1]]], [[0, 0], [0]])
    flipped = Params.from_lists([[[-1], [1]], [[-1, 1]]], [[0, 0], [0]])
    witness = check_scaling_equivalent(theta, flipped)
    assert witness.kind is EquivalenceKind.NONE


def test_undecidable_is_reported_as_inconclusive():
    dead = Params.from_lists([[[1], [-1]], [[1, 0]]], [[0, 0], [0]])
    witness = check_scaling_equivalent(dead, dead)
    assert witness.kind is EquivalenceKind.UNDECIDABLE
    assert witness.relation == "inconclusive"
    assert not witness.found


def test_ps_witness_for_permuted_and_rescaled(rng):
    theta = random_exact_params(rng, [2, 3, 2, 1])
    target = rescale(permute(theta, random_permutation(rng, theta.architecture)),
                     random_rescaling(rng, theta.architecture))
    witness = check_ps_equivalent(theta, target)
    assert witness.kind is EquivalenceKind.PS
    assert rescale(permute(theta, witness.permutation), witness.rescaling) == target


def test_ps_on_abs_swap(abs_theta):
    moved = permute(abs_theta, Permutation((np.array([1, 0]),)))
    witness = check_ps_equivalent(abs_theta, moved)
    assert witness.kind is EquivalenceKind.PS
    assert witness.permutation.as_lists() == [[1, 0]]


def test_ps_rejects_nonlocal_pair(nonlocal_thetas):
    theta, theta_prime = nonlocal_thetas
    witness = check_ps_equivalent(theta, theta_prime)
    assert witness.kind is EquivalenceKind.NONE


def test_ps_rejects_different_architectures(abs_theta):
    other = Params.from_lists([[[1]], [[1]]], [[0], [0]])
    assert check_ps_equivalent(abs_theta, other).kind is EquivalenceKind.NONE


def test_ps_budget_exhaustion(abs_theta):
    witness = check_ps_equivalent(abs_theta, abs_theta, budget=0)
    assert witness.kind is EquivalenceKind.INCONCLUSIVE
    assert witness.candidates_tried == 0


def test_scaling_operator_recovers_log_factors(rng):
    theta = random_exact_params(rng, [2, 3, 2, 1])
    lam = random_rescaling(rng, theta.architecture)
    alpha = log_ratio_vector(theta, rescale(theta, lam))
    beta = scaling_operator(theta, alpha)
    for b, f in zip(beta, lam.factors):
        assert np.allclose(np.exp(b), np.asarray(f, dtype=np.float64))
    back = scaling_operator_inverse(theta, beta)
    assert set(back) == set(alpha)
    for key, value in alpha.items():
        assert back[key] == pytest.approx(value, abs=1e-12)


def test_log_ratio_rejects_sign_change(abs_theta):
    flipped = Params.from_lists([[[-1], [-1]], [[1, 1]]], [[0, 0], [0]])
    with pytest.raises(DomainError):
        log_ratio_vector(abs_theta, flipped)


def test_canonical_form_of_rescaled_abs(abs_theta):
    lam = Rescaling((np.array([Fraction(2), Fraction(5)], dtype=object),))
    assert canonical_form(rescale(abs_theta, lam)) == abs_theta


def test_canonical_form_is_class_invariant(rng):
    theta = random_exact_params(rng, [2, 3, 2, 1])
    lam = random_rescaling(rng, theta.architecture)
    assert canonical_form(rescale(theta, lam)) == canonical_form(theta)
    assert canonical_form(rescale(theta, lam), "l1") == canonical_form(theta, "l1")


def test_canonical_form_float(rng):
    theta = random_exact_params(rng, [2, 3, 1]).to_float()
    lam = random_rescaling(rng, theta.architecture)
    assert canonical_form(rescale(theta, lam)).allclose(canonical_form(theta))


def test_canonical_form_rejects_euclidean_norm_in_exact_mode(abs_theta):
    with pytest.raises(DomainError):
        canonical_form(abs_theta, "l2")


def test_canonical_form_needs_admissible_network():
    with pytest.raises(DomainError):
        canonical_form(Params.from_lists([[[1], [-1]], [[1, 0]]], [[0, 0], [0]]))


def test_identity_rescaling_keeps_network(rng):
    theta = random_exact_params(rng, [2, 2, 2])
    assert rescale(theta, Rescaling.identity(theta.architecture)) == theta
    assert permute(theta, Permutation.identity(Architecture((2, 2, 2)))) == theta


def _random_widths(rng, max_depth=4, max_width=3):
    depth = int(rng.integers(2, max_depth + 1))
    return [int(w) for w in rng.integers(1, max_width + 1, size=depth + 1)]


def _random_input(rng, n):
    return [Fraction(int(rng.integers(-20, 21)), int(rng.integers(1, 5))) for _ in range(n)]


def _assert_s_witness_is_exact(rng, draws):
    for _ in range(draws):
        theta = random_exact_params(rng, _random_widths(rng))
        lam = random_rescaling(rng, theta.architecture)
        witness = check_scaling_equivalent(theta, rescale(theta, lam))
        assert witness.kind is EquivalenceKind.S
        assert witness.rescaling.as_lists() == lam.as_lists()


def test_s_witness_is_the_planted_rescaling(rng):
    _assert_s_witness_is_exact(rng, 40)


@pytest.mark.slow
def test_s_witness_is_the_planted_rescaling_many_draws():
    _assert_s_witness_is_exact(np.random.default_rng(22), 1000)


def _assert_ps_preserves_realization(rng, draws):
    for _ in range(draws):
        theta = random_exact_params(rng, _random_widths(rng))
        arch = theta.architecture
        moved = rescale(permute(theta, random_permutation(rng, arch)), random_rescaling(rng, arch))
        for _ in range(3):
            x = _random_input(rng, arch.n_inputs)
            assert list(realize(moved, x)) == list(realize(theta, x))


def test_ps_actions_preserve_realization(rng):
    _assert_ps_preserves_realization(rng, 30)


@pytest.mark.slow
def test_ps_actions_preserve_realization_many_draws():
    _assert_ps_preserves_realization(np.random.default_rng(23), 500)


def test_scaling_operator_does_not_depend_on_the_path(rng):
    theta = random_exact_params(rng, [2, 3, 3, 2])
    lam = random_rescaling(rng, theta.architecture)
    alpha = log_ratio_vector(theta, rescale(theta, lam))
    for layer in (1, 2):
        for i in range(3):
            paths = list(supp_paths_to_output(theta, (layer, i)))
            assert len(paths) == (6 if layer == 1 else 2)
            values = [scaling_operator(theta, alpha, {(layer, i): p})[layer - 1][i] for p in paths]
            assert np.allclose(values, values[0], atol=1e-12)
            assert values[0] == pytest.approx(np.log(float(lam.factor((layer, i)))), abs=1e-12)
