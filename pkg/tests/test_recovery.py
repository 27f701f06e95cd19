import sys

import numpy as np
import pytest

from core.equivalence import EquivalenceKind, check_ps_equivalent
from core.errors import BudgetExceededError, DomainError, MalformedInputError
from core.network import Params, ScalarMode
from core.recovery import (CommandOracle, NetworkOracle, cluster_kinks, count_units, default_budget,
                           detect_hyperplanes, normalize_hyperplane, recover_outer, recover_shallow)
from factories import planted_generic_shallow
from utils.network_io import round_params


def test_normalize_hyperplane():
    w, b = normalize_hyperplane(np.array([2.0, 0.0]), -1.0)
    assert np.allclose(w, [-1.0, 0.0])
    assert b == pytest.approx(0.5)
    w, b = normalize_hyperplane(np.array([0.0, -3.0]), 0.0)
    assert np.allclose(w, [0.0, 1.0])
    with pytest.raises(DomainError):
        normalize_hyperplane(np.zeros(2), 1.0)


def test_cluster_kinks_on_single_line():
    line = [[t, 0.5] for t in np.linspace(-2, 2, 10)]
    points = np.array(line + [[1.3, -2.2]])
    hyperplanes, dropped = cluster_kinks(points, box_radius=3.0)
    assert len(hyperplanes) == 1
    assert dropped == 1
    assert np.allclose(hyperplanes[0].w, [0.0, -1.0])
    assert hyperplanes[0].b == pytest.approx(0.5)
    assert hyperplanes[0].n_points == 10


def test_oracle_budget_and_dimension(abs_theta):
    oracle = NetworkOracle(abs_theta, budget=2)
    assert np.allclose(oracle([[-2.0], [3.0]]), [[2.0], [3.0]])
    assert oracle.queries == 2
    assert oracle.remaining == 0
    with pytest.raises(BudgetExceededError):
        oracle([[1.0]])
    with pytest.raises(DomainError):
        NetworkOracle(abs_theta)([[1.0, 2.0]])


def test_default_budget():
    assert default_budget(2, query_budget_per_unit=10, max_units=3) == 120


def test_command_oracle():
    script = "import sys; x = [float(v) for v in sys.stdin.read().split()]; print(abs(x[0]) + x[1])"
    oracle = CommandOracle([sys.executable, "-c", script], n_inputs=2, n_outputs=1)
    assert np.allclose(oracle([[-2.0, 0.5], [1.0, 1.0]]), [[2.5], [2.0]])


@pytest.mark.parametrize("script", ["print('nan-ish text')", "print('1 2')", "import sys; sys.exit(3)"])
def test_command_oracle_failures(script):
    oracle = CommandOracle([sys.executable, "-c", script], n_inputs=1, n_outputs=1)
    with pytest.raises(MalformedInputError):
        oracle([[0.0]])


def test_detect_nonlocal_hyperplanes(nonlocal_thetas):
    detection = detect_hyperplanes(NetworkOracle(nonlocal_thetas[0]), seed=0)
    roots = sorted(-h.b / float(h.w[0]) for h in detection.hyperplanes)
    assert len(roots) == 2
    assert abs(roots[0]) < 1e-8
    assert abs(roots[1] - 1.0) < 1e-8
    assert all(abs(float(h.w[0])) == pytest.approx(1.0) for h in detection.hyperplanes)
    assert not detection.partial


def test_recover_nonlocal(nonlocal_thetas):
    model = recover_shallow(NetworkOracle(nonlocal_thetas[0]), seed=0)
    assert model.verified
    assert model.violations == ()
    assert model.n_units == 2
    for unit in model.units:
        assert abs(float(unit.outer[0, 0])) == pytest.approx(1.0, abs=1e-6)
    assert model.to_params().W(1).shape == (2, 1)
    for x in (-2.0, 0.3, 2.5):
        expected = max(-x, 0) + max(x - 1, 0)
        assert float(np.asarray(NetworkOracle(model.to_params())([[x]]))[0, 0]) == pytest.approx(expected, abs=1e-6)


def test_negative_twin_plant_is_flagged():
    W1 = np.array([[1.0, 0.0], [-2.0, 0.0], [0.0, 1.0]])
    theta = Params((W1, np.ones((1, 3))), (np.array([0.5, -1.0, 0.3]), np.zeros(1)), ScalarMode.FLOAT)
    model = recover_shallow(NetworkOracle(theta), seed=0)
    assert len(model.detection.hyperplanes) == 2
    assert not model.verified
    assert any("subconjunto" in v for v in model.violations)


def test_affine_target_has_no_units():
    theta = Params((np.array([[2.0, -1.0]]),), (np.array([3.0]),), ScalarMode.FLOAT)
    model = recover_shallow(NetworkOracle(theta), seed=0)
    assert model.n_units == 0
    params = model.to_params()
    assert params.depth == 1
    assert np.allclose(params.W(1), [[2.0, -1.0]], atol=1e-8)
    assert model.verified


def test_budget_exhaustion_is_reported(nonlocal_thetas):
    model = recover_shallow(NetworkOracle(nonlocal_thetas[0]), budget=100, seed=0)
    assert not model.verified
    assert model.violations


def _assert_recovers(theta, seed):
    model = recover_shallow(NetworkOracle(theta), seed=seed)
    assert model.verified, model.violations
    assert model.n_units == theta.architecture.widths[1]
    recovered = round_params(model.to_params()).to_float()
    witness = check_ps_equivalent(theta.to_float(), recovered, atol=1e-6, rtol=1e-6)
    assert witness.kind is EquivalenceKind.PS


def test_recover_planted_network(rng):
    _assert_recovers(planted_generic_shallow(rng, 2, 3, 2), seed=0)


@pytest.mark.slow
def test_recover_many_planted_networks():
    rng = np.random.default_rng(11)
    for trial in range(50):
        d, h, k = int(rng.integers(2, 5)), int(rng.integers(1, 7)), int(rng.integers(1, 4))
        _assert_recovers(planted_generic_shallow(rng, d, h, k), seed=trial)


def test_count_units(nonlocal_thetas):
    theta, theta_prime = nonlocal_thetas
    result = count_units(NetworkOracle(theta), NetworkOracle(theta_prime), seed=0)
    assert result.equal
    assert result.count_a == 2


def test_recover_outer_single_unit():
    theta = Params((np.array([[2.0, 0.0]]), np.array([[3.0]])), (np.array([-1.0]), np.zeros(1)), ScalarMode.FLOAT)
    oracle = NetworkOracle(theta)
    detection = detect_hyperplanes(oracle, seed=0)
    assert len(detection.hyperplanes) == 1
    (estimate,) = recover_outer(oracle, detection.hyperplanes, seed=0)
    assert estimate.rank_one
    assert not estimate.ambiguous
    assert float(estimate.u[0]) == pytest.approx(6.0, rel=1e-4)
    assert np.allclose(np.abs(estimate.outer), [[6.0, 0.0]], atol=1e-3)
