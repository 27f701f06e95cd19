import os
import sys

sys.path.insert(0, os.path.dirname(os.path.dirname(os.path.abspath(__file__))))

import numpy as np
import pytest

from core.counterexamples import abs_network, nonlocal_pair


@pytest.fixture
def abs_theta():
    return abs_network()


@pytest.fixture
def nonlocal_thetas():
    pair = nonlocal_pair()
    return pair.theta, pair.theta_prime


@pytest.fixture
def rng():
    return np.random.default_rng(0)


@pytest.fixture(autouse=True)
def single_thread(monkeypatch):
    monkeypatch.delenv("RELU_IDENT_THREADS", raising=False)
