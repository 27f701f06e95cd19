from fractions import Fraction

import numpy as np
import pytest

from core.activation_spaces import (Nondegeneracy, extend_activation_space, nondegeneracy_certificate,
                                    path_activation_vector, sample_activation_space,
                                    scalar_bias_degeneracy_witness, shallow_activation_space,
                                    twin_separating_points, v_space_basis_in_path_space, v_space_dimension)
from core.counterexamples import identity_family
from core.diagnostics import find_twins
from core.errors import DomainError, SamplingFailureError, ShapeError, UnsupportedDepthError
from core.network import ConstraintSet, Params, realize
from core.paths import linear_form
from factories import generic_shallow, random_exact_params


def _parallel(u, v):
    u, v = np.asarray(u, dtype=np.float64), np.asarray(v, dtype=np.float64)
    return abs(abs(u @ v) - np.linalg.norm(u) * np.linalg.norm(v)) < 1e-9


def test_abs_closed_form(abs_theta):
    space = shallow_activation_space(abs_theta)
    assert space.actdim == 2
    assert space.ambient == 3
    (complement,) = space.complement()
    assert _parallel(complement, [1, 1, -1])


def test_abs_sampled_matches_closed_form(abs_theta):
    sampled = sample_activation_space(abs_theta, n_samples=32, seed=0)
    assert sampled.actdim == 2
    assert len(sampled.witnesses) == 2
    assert not sampled.lower_bound
    closed = shallow_activation_space(abs_theta)
    assert closed.projection_residual(sampled.spanning) < 1e-9


def test_generic_network_has_full_activation_space(rng):
    theta = generic_shallow(rng, 2, 3)
    space = shallow_activation_space(theta)
    assert space.actdim == 4
    assert space.complement().shape == (0, 4)
    assert v_space_dimension(theta, space).dimension == 0


def test_positive_twin_complement():
    theta = Params.from_lists([[[1], [2]], [[1, 1]]], [[1, 2], [0]])
    space = shallow_activation_space(theta)
    assert space.actdim == 2
    (complement,) = space.complement()
    assert _parallel(complement, [1, -1, 0])


def test_single_neuron_layer():
    theta = Params.from_lists([[[3]], [[2]]], [[1], [0]])
    space = shallow_activation_space(theta)
    assert space.actdim == 2
    assert space.complement().shape[0] == 0


def test_closed_form_requires_shallow_admissible_network():
    with pytest.raises(UnsupportedDepthError):
        shallow_activation_space(Params.from_lists([[[1]], [[1]], [[1]]], [[0], [0], [0]]))
    with pytest.raises(DomainError):
        shallow_activation_space(Params.from_lists([[[1], [-1]], [[1, 0]]], [[0, 0], [0]]))


def test_path_activation_vector(abs_theta):
    assert list(path_activation_vector(abs_theta, [2])) == [1, 0, 1]
    assert list(path_activation_vector(abs_theta, [-2])) == [0, 1, 1]
    with pytest.raises(UnsupportedDepthError):
        path_activation_vector(Params.from_lists([[[1]]], [[0]]), [1])


def test_twin_separating_points_for_abs(abs_theta):
    twin_class = find_twins(abs_theta).nontrivial_classes()[0]
    x_plus, x_minus = twin_separating_points(abs_theta, twin_class)
    assert np.allclose(x_plus, [1.0])
    assert np.allclose(x_minus, [-1.0])


def test_twin_separating_points_stay_off_other_hyperplanes(rng):
    theta = Params.from_lists([[[1, 0], [-2, 0], [0, 1]], [[1, 1, 1]]], [[Fraction(1, 2), -1, Fraction(3, 10)], [0]])
    twin_class = find_twins(theta).nontrivial_classes()[0]
    x_plus, x_minus = twin_separating_points(theta, twin_class, rng)
    z_plus = float(x_plus[0]) + 0.5
    z_minus = float(x_minus[0]) + 0.5
    assert z_plus > 0 > z_minus
    assert (x_plus[1] + 0.3 > 0) == (x_minus[1] + 0.3 > 0)


def test_twin_injection_finds_positive_twin_direction():
    theta = Params.from_lists([[[1], [2]], [[1, 1]]], [[1, 2], [0]])
    space = sample_activation_space(theta, n_samples=16, seed=0)
    closed = shallow_activation_space(theta)
    assert space.actdim == closed.actdim
    assert closed.projection_residual(space.spanning) < 1e-9


def test_deep_space_is_lower_bound(rng):
    theta = random_exact_params(rng, [2, 3, 2, 1])
    space = sample_activation_space(theta, n_samples=32, seed=1)
    assert space.lower_bound
    assert 1 <= space.actdim <= space.ambient


def test_extend_never_decreases_actdim(rng):
    theta = random_exact_params(rng, [2, 3, 2, 1])
    space = sample_activation_space(theta, n_samples=4, seed=2, radius_sweep=(1.0,))
    extended = extend_activation_space(theta, space, np.random.default_rng(5).standard_normal((50, 2)) * 3)
    assert extended.actdim >= space.actdim


def test_sampling_rejects_bad_arguments(abs_theta):
    with pytest.raises(DomainError):
        sample_activation_space(abs_theta, n_samples=0)
    with pytest.raises(UnsupportedDepthError):
        sample_activation_space(Params.from_lists([[[1]]], [[0]]))


def test_sampling_failure_with_impossible_margin(abs_theta):
    with pytest.raises(SamplingFailureError):
        sample_activation_space(abs_theta, n_samples=4, margin=1e6, max_resample_factor=2)


def test_projection_residual_checks_dimension(abs_theta):
    with pytest.raises(ShapeError):
        shallow_activation_space(abs_theta).projection_residual([[1, 0]])


def test_v_space_of_abs(abs_theta):
    structure = v_space_dimension(abs_theta, shallow_activation_space(abs_theta))
    assert structure.dimension == 1
    assert structure.a_complement.shape[0] == 0
    rows = v_space_basis_in_path_space(abs_theta, structure)
    assert rows.shape == (1, 5)
    assert np.allclose(rows[0][:2], [0, 0])
    assert _parallel(rows[0][2:], [1, 1, -1])


def test_abs_certified_degenerate(abs_theta):
    certificate = nondegeneracy_certificate(abs_theta)
    assert certificate.verdict is Nondegeneracy.CERTIFIED_DEGENERATE
    assert certificate.v_dimension == 1


@pytest.mark.parametrize("name", ["abs", "identity"])
def test_zero_output_bias_certifies_nondegenerate(abs_theta, name):
    network = abs_theta if name == "abs" else identity_family(0)
    certificate = nondegeneracy_certificate(network, ConstraintSet.zero_output_bias())
    assert certificate.verdict is Nondegeneracy.CERTIFIED_NONDEGENERATE


def test_generic_network_is_nondegenerate(rng):
    certificate = nondegeneracy_certificate(generic_shallow(rng, 2, 3))
    assert certificate.verdict is Nondegeneracy.CERTIFIED_NONDEGENERATE
    assert certificate.v_dimension == 0


def test_positive_twin_scalar_output_is_degenerate():
    theta = Params.from_lists([[[1], [2]], [[1, 1]]], [[1, 2], [0]])
    certificate = nondegeneracy_certificate(theta)
    assert certificate.verdict is Nondegeneracy.CERTIFIED_DEGENERATE


def test_scalar_bias_witness_for_abs(abs_theta):
    shifted = scalar_bias_degeneracy_witness(abs_theta, [1, 1, -1], Fraction(1, 2))
    assert list(shifted.b(1)) == [Fraction(1, 2), Fraction(1, 2)]
    assert list(shifted.b(2)) == [Fraction(-1, 2)]
    assert all(np.array_equal(a, b) for a, b in zip(shifted.weights, abs_theta.weights))
    for x in (2, -3, Fraction(1, 2)):
        assert list(realize(shifted, [x])) == list(realize(abs_theta, [x]))


def test_scalar_bias_witness_rejects_bad_direction(abs_theta):
    with pytest.raises(DomainError):
        scalar_bias_degeneracy_witness(abs_theta, [1, 0, 0], 1)
    with pytest.raises(DomainError):
        scalar_bias_degeneracy_witness(abs_theta, [1, 1, -1], -1)
    with pytest.raises(ShapeError):
        scalar_bias_degeneracy_witness(abs_theta, [1, 1], 1)


WIDTH_CHOICES = ([2, 3, 1], [2, 3, 2], [3, 4, 1], [2, 3, 2, 1], [2, 2, 3, 2], [3, 2, 2, 2, 1])


def _assert_v_basis_annihilated(rng, draws):
    for k in range(draws):
        theta = random_exact_params(rng, WIDTH_CHOICES[k % len(WIDTH_CHOICES)])
        space = sample_activation_space(theta, n_samples=16, seed=k)
        rows = v_space_basis_in_path_space(theta, v_space_dimension(theta, space))
        for x in space.witnesses:
            form = np.asarray(linear_form(theta, x), dtype=np.float64)
            assert np.max(np.abs(form @ rows.T), initial=0.0) < 1e-9


def test_v_basis_is_annihilated_on_witnesses(rng):
    _assert_v_basis_annihilated(rng, 24)


@pytest.mark.slow
def test_v_basis_is_annihilated_on_witnesses_many_draws():
    _assert_v_basis_annihilated(np.random.default_rng(41), 300)


def test_v_basis_is_annihilated_for_abs(abs_theta):
    space = sample_activation_space(abs_theta, n_samples=16, seed=0)
    rows = v_space_basis_in_path_space(abs_theta, v_space_dimension(abs_theta, space))
    assert rows.shape[0] == 1
    for x in ([-2], [Fraction(-1, 3)], [Fraction(1, 2)], [5]):
        form = np.asarray(linear_form(abs_theta, x), dtype=np.float64)
        assert np.allclose(form @ rows.T, 0)


def _assert_last_layer_irrelevant(rng, draws):
    for k in range(draws):
        widths = WIDTH_CHOICES[k % len(WIDTH_CHOICES)]
        theta = random_exact_params(rng, widths)
        other = random_exact_params(rng, widths)
        depth = theta.depth
        replaced = theta.with_layer(depth, other.W(depth), other.b(depth))
        space = sample_activation_space(theta, n_samples=16, seed=k)
        moved = sample_activation_space(replaced, n_samples=16, seed=k)
        assert moved.actdim == space.actdim
        assert len(moved.witnesses) == len(space.witnesses)
        assert all(np.array_equal(a, b) for a, b in zip(moved.witnesses, space.witnesses))
        assert space.projection_residual(moved.spanning) < 1e-9


def test_activation_space_ignores_last_layer(rng):
    _assert_last_layer_irrelevant(rng, 24)


@pytest.mark.slow
def test_activation_space_ignores_last_layer_many_draws():
    _assert_last_layer_irrelevant(np.random.default_rng(42), 300)


def test_closed_form_ignores_last_layer(abs_theta):
    other = Params.from_lists([[[1], [1]], [[3, -5]]], [[0, 0], [7]])
    replaced = abs_theta.with_layer(2, other.W(2), other.b(2))
    assert shallow_activation_space(replaced).actdim == shallow_activation_space(abs_theta).actdim == 2
