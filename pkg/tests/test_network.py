from fractions import Fraction

import numpy as np
import pytest
from hypothesis import given, settings

from core.counterexamples import abs_shifted, identity_family
from core.errors import DomainError, ShapeError
from core.network import (Architecture, ConstraintSet, ParamKey, Params, ScalarMode, XContStatus,
                          activation_pattern, forward, forward_batch, hidden_admissibility, in_xcont, realize)
from factories import exact_params


def test_abs_network_output(abs_theta):
    out, _ = forward(abs_theta, [-3])
    assert list(out) == [3]


def test_nonlocal_output(nonlocal_thetas):
    theta, _ = nonlocal_thetas
    assert list(realize(theta, [2])) == [1]


def test_zero_network_outputs_zero():
    theta = Params.zeros([3, 4, 2])
    assert list(realize(theta, [Fraction(1, 3), -2, 7])) == [0, 0]


def test_trace_records_all_layers(abs_theta):
    _, trace = forward(abs_theta, [1])
    assert len(trace.pre_activations) == 2
    assert list(trace.z(1)) == [1, -1]
    assert list(trace.post_activations[1]) == [1, 0]


@pytest.mark.parametrize("x, expected", [(1, [1, 0]), (0, [0, 0])])
def test_activation_pattern_abs(abs_theta, x, expected):
    assert list(activation_pattern(abs_theta, [x])) == expected


def test_activation_pattern_identity_family():
    assert list(activation_pattern(identity_family(0), [5])) == [1, 0]


def test_in_xcont(abs_theta):
    assert in_xcont(abs_theta, [1], 1e-6) is XContStatus.INSIDE
    assert in_xcont(abs_theta, [0], 1e-6) is XContStatus.BOUNDARY_SUSPECT


def test_in_xcont_without_hidden_layers():
    theta = Params.from_lists([[[2, -1]]], [[3]])
    assert in_xcont(theta, [0, 0], 1e-6) is XContStatus.INSIDE


def test_in_xcont_rejects_nonpositive_margin(abs_theta):
    with pytest.raises(DomainError):
        in_xcont(abs_theta, [1], 0)


@pytest.mark.parametrize("widths", [[1], [1, 0], [2, 0, 1]])
def test_invalid_architectures(widths):
    with pytest.raises(ShapeError):
        Architecture(tuple(widths))


def test_shape_mismatch_between_layers():
    with pytest.raises(ShapeError):
        Params.from_lists([[[1], [2]], [[1, 1, 1]]], [[0, 0], [0]])


def test_input_with_wrong_length(abs_theta):
    with pytest.raises(ShapeError):
        forward(abs_theta, [1, 2])


def test_params_are_frozen(abs_theta):
    with pytest.raises(ValueError):
        abs_theta.W(1)[0, 0] = 5


def test_vector_round_trip():
    theta = abs_shifted(Fraction(1, 3))
    assert Params.from_vector(theta.architecture, theta.as_vector()) == theta
    assert len(theta.parameter_index()) == len(theta.as_vector())


def test_parameter_labels():
    assert ParamKey("w", 2, 0, 1).label() == "w[2][0,1]"
    assert ParamKey("b", 1, 3).label() == "b[1][3]"


@settings(max_examples=40, deadline=None)
@given(exact_params(max_depth=3, max_width=3))
def test_forward_batch_matches_exact_forward(theta):
    rng = np.random.default_rng(1)
    X = rng.uniform(-3, 3, size=(5, theta.architecture.n_inputs))
    batch = forward_batch(theta, X)
    for x, row in zip(X, batch):
        exact = np.asarray(realize(theta, x), dtype=np.float64)
        assert np.allclose(row, exact, rtol=1e-12, atol=1e-12)


def test_float_mode_evaluation(abs_theta):
    theta = abs_theta.to_float()
    assert theta.scalar_mode is ScalarMode.FLOAT
    assert realize(theta, [-2.5])[0] == pytest.approx(2.5)


def test_zero_output_bias_constraint():
    constraint = ConstraintSet.zero_output_bias()
    assert constraint.violations(abs_shifted(1)) == [ParamKey("b", 2, 0)]
    assert constraint.satisfied_by(abs_shifted(0))
    assert constraint.forces_zero_output_bias


def test_bias_shift_admissibility(abs_theta):
    neurons = [(1, 0), (1, 1), (2, 0)]
    assert ConstraintSet.unconstrained().admits_bias_shift(abs_theta, neurons)
    assert not ConstraintSet.zero_output_bias().admits_bias_shift(abs_theta, neurons)
    assert ConstraintSet.zero_output_bias().admits_bias_shift(abs_theta, [(1, 0), (1, 1)])
    assert not ConstraintSet.zero_all_bias().admits_bias_shift(abs_theta, [(1, 0)])


def test_sparsity_constraint(abs_theta):
    constraint = ConstraintSet.sparsity([[[True], [True]], [[True, False]]], [[True, True], [True]])
    assert constraint.violations(abs_theta) == [ParamKey("w", 2, 0, 1)]


def test_hidden_admissibility_reports_dead_neuron():
    theta = Params.from_lists([[[1], [-1]], [[1, 0]]], [[0, 0], [0]])
    assert hidden_admissibility(theta) == [((1, 1), "outgoing")]
