#!/usr/bin/env python3
"""
Counterexamples - Generadores de ejemplos y construcciones de colapso
Parejas de redes con igual realización en un dominio dado y distinta clase de equivalencia
"""

import logging
from dataclasses import dataclass
from enum import Enum
from fractions import Fraction
from typing import Any, Dict, Optional, Sequence, Tuple

import numpy as np

from .diagnostics import (analyze_single_negative_pair, collinear, collinearity_ratio, find_twins,
                          single_negative_pair, subset_product)
from .equivalence import EquivalenceKind, EquivalenceWitness, check_ps_equivalent, check_scaling_equivalent
from .errors import DomainError, UnsupportedDepthError
from .network import Neuron, Params, forward, forward_batch

logger = logging.getLogger(__name__)


class DomainKind(str, Enum):
    ALL_INPUTS = "all-inputs"
    HALF_LINE = "half-line"
    COMPACT = "compact"


@dataclass(frozen=True)
class EqualityDomain:
    """
    Dominio donde las realizaciones coinciden. HALF_LINE: z_ν(θ,x) >= -bound.
    COMPACT: |z_ν(θ,x)| >= bound (lejos del pliegue desplazado).
    """

    kind: DomainKind = DomainKind.ALL_INPUTS
    neuron: Optional[Neuron] = None
    bound: Any = None

    def contains(self, theta: Params, x: Any) -> bool:
        if self.kind is DomainKind.ALL_INPUTS:
            return True
        layer, i = self.neuron
        z = forward(theta, x)[1].z(layer)[i]
        if self.kind is DomainKind.HALF_LINE:
            return z >= -self.bound
        return abs(z) >= self.bound

    def to_dict(self) -> Dict[str, Any]:
        return {"kind": self.kind.value,
                "neuron": None if self.neuron is None else list(self.neuron),
                "bound": self.bound}


class ClaimedRelation(str, Enum):
    NOT_S = "not-S"
    NOT_PS = "not-PS"
    UNCLAIMED = "unclaimed"


@dataclass(frozen=True)
class PairVerification:
    points_checked: int
    realization_equal: bool
    max_difference: float
    witness: Optional[EquivalenceWitness]
    claim_holds: bool

    @property
    def passed(self) -> bool:
        return self.realization_equal and self.claim_holds


@dataclass(frozen=True)
class ExamplePair:
    name: str
    theta: Params
    theta_prime: Params
    equality_domain: EqualityDomain
    claimed_relation: ClaimedRelation

    def verify(self, n_points: int = 1000, seed: int = 0, box_radius: float = 3.0) -> PairVerification:
        """Compara las realizaciones en puntos del dominio y comprueba la no equivalencia afirmada."""
        rng = np.random.default_rng(seed)
        n_inputs = self.theta.architecture.n_inputs
        X = rng.uniform(-box_radius, box_radius, size=(n_points, n_inputs))
        checked, worst, equal = 0, 0.0, True
        exact = self.theta.is_exact and self.theta_prime.is_exact
        if not exact and self.equality_domain.kind is DomainKind.ALL_INPUTS:
            diff = np.abs(forward_batch(self.theta, X) - forward_batch(self.theta_prime, X))
            checked, worst = n_points, float(np.max(diff)) if diff.size else 0.0
            equal = worst <= 1e-9 * max(1.0, box_radius)
        else:
            for x in X:
                if not self.equality_domain.contains(self.theta, x):
                    continue
                checked += 1
                a, b = forward(self.theta, x)[0], forward(self.theta_prime, x)[0]
                if exact:
                    if not np.array_equal(a, b):
                        equal = False
                        worst = max(worst, float(np.max(np.abs((a - b).astype(np.float64)))))
                else:
                    d = float(np.max(np.abs(np.asarray(a - b, dtype=np.float64))))
                    worst = max(worst, d)
                    equal = equal and d <= 1e-9 * max(1.0, box_radius)

        witness = None
        claim_holds = True
        if self.claimed_relation is ClaimedRelation.NOT_S:
            witness = check_scaling_equivalent(self.theta, self.theta_prime)
            claim_holds = witness.kind is EquivalenceKind.NONE
        elif self.claimed_relation is ClaimedRelation.NOT_PS:
            witness = check_ps_equivalent(self.theta, self.theta_prime)
            claim_holds = witness.kind is EquivalenceKind.NONE
        if not equal:
            logger.warning("%s: realizaciones distintas (máx. %.3e)", self.name, worst)
        return PairVerification(checked, equal, worst, witness, claim_holds)


# -- redes de ejemplo --------------------------------------------------------------


def _exact(value: Any) -> Fraction:
    return Fraction(repr(value)) if isinstance(value, float) else Fraction(value)


def abs_network() -> Params:
    """|x| = ReLU(x) + ReLU(-x)."""
    return Params.from_lists([[[1], [-1]], [[1, 1]]], [[0, 0], [0]])


def abs_shifted(t: Any) -> Params:
    """ReLU(x - t) + ReLU(-(x + t)) + t: igual a |x| si |x| >= t, igual a t si |x| <= t."""
    t = _exact(t)
    return Params.from_lists([[[1], [-1]], [[1, 1]]], [[-t, -t], [t]])


def identity_family(t: Any) -> Params:
    """x = ReLU(x - t) - ReLU(-(x - t)) + t."""
    t = _exact(t)
    return Params.from_lists([[[1], [-1]], [[1, -1]]], [[-t, t], [t]])


def nonlocal_pair() -> ExamplePair:
    """ReLU(-x) + ReLU(x - 1) = ReLU(x) + ReLU(-(x - 1)) - 1, con sesgos de salida 0 y -1."""
    theta = Params.from_lists([[[-1], [1]], [[1, 1]]], [[0, -1], [0]])
    theta_prime = Params.from_lists([[[1], [-1]], [[1, 1]]], [[0, 1], [-1]])
    return ExamplePair("nonlocal", theta, theta_prime, EqualityDomain(), ClaimedRelation.NOT_PS)


# -- colapsos ------------------------------------------------------------------------


def _twin_ratio(theta: Params, nu1: Neuron, nu2: Neuron) -> Any:
    """λ con (w_{•→ν2}, b_{ν2}) = λ (w_{•→ν1}, b_{ν1}); DomainError si no son gemelas."""
    if nu1[0] != nu2[0] or nu1[0] not in theta.architecture.hidden_layers or nu1 == nu2:
        raise DomainError(f"{nu1} y {nu2} no son dos neuronas de la misma capa oculta")
    u, v = theta.incoming(nu1), theta.incoming(nu2)
    if all(x == 0 for x in u) or not collinear(u, v, theta.is_exact):
        raise DomainError(f"{nu1} y {nu2} no son gemelas")
    return collinearity_ratio(u, v, theta.is_exact)


def positive_twin_collapse(theta: Params, nu1: Neuron, nu2: Neuron, epsilon: Any) -> ExamplePair:
    """v'_1 = v_1 + λε·1 y v'_2 = v_2 - ε·1; R_θ' = R_θ en todo punto."""
    lam = _twin_ratio(theta, nu1, nu2)
    if not lam > 0:
        raise DomainError(f"{nu1} y {nu2} son gemelas negativas (λ = {lam})")
    layer = nu1[0]
    eps = theta.coerce([epsilon])[0]
    W_next = theta.W(layer + 1).copy()
    W_next[:, nu1[1]] = W_next[:, nu1[1]] + lam * eps
    W_next[:, nu2[1]] = W_next[:, nu2[1]] - eps
    theta_prime = theta.with_layer(layer + 1, W_next)
    return ExamplePair("positive-twin-collapse", theta, theta_prime, EqualityDomain(), ClaimedRelation.NOT_S)


def negative_twin_collapse(theta: Params, nu1: Neuron, nu2: Neuron, M: Any) -> ExamplePair:
    """
    Sustituye α ReLU(t) + β ReLU(-t) por (α+β) ReLU(t) - β ReLU(t+M) + βM,
    válido si t = z_{ν1}(θ,x) >= -M.
    """
    lam = _twin_ratio(theta, nu1, nu2)
    if not lam < 0:
        raise DomainError(f"{nu1} y {nu2} son gemelas positivas (λ = {lam})")
    M = theta.coerce([M])[0]
    if not M > 0:
        raise DomainError(f"M debe ser positivo, se recibió {M}")
    layer, i1 = nu1
    i2 = nu2[1]
    mag = abs(lam)
    W, b = theta.W(layer).copy(), theta.b(layer).copy()
    W[i2] = W[i1]
    b[i2] = b[i1] + M
    W_next, b_next = theta.W(layer + 1).copy(), theta.b(layer + 1).copy()
    v2 = theta.W(layer + 1)[:, i2]
    W_next[:, i1] = theta.W(layer + 1)[:, i1] + mag * v2
    W_next[:, i2] = -mag * v2
    b_next = b_next + mag * M * v2
    theta_prime = theta.with_layer(layer, W, b).with_layer(layer + 1, W_next, b_next)
    return ExamplePair("negative-twin-collapse", theta, theta_prime,
                       EqualityDomain(DomainKind.HALF_LINE, nu1, M), ClaimedRelation.NOT_PS)


def reducibility_collapse(theta: Params, layer: int, subset: Sequence[int]) -> ExamplePair:
    """
    Con W_{ℓ+1} I_T W_ℓ = 0: W'_ℓ = J_T W_ℓ, b'_ℓ = J_T b_ℓ y
    b'_{ℓ+1} = W_{ℓ+1} I_T b_ℓ + b_{ℓ+1}; W_{ℓ+1} no cambia.
    """
    if layer not in theta.architecture.hidden_layers:
        raise DomainError(f"la capa {layer} no es oculta")
    subset = sorted(set(int(i) for i in subset))
    if not subset:
        raise DomainError("T debe ser no vacío")
    if any(v != 0 for v in np.asarray(subset_product(theta, layer, subset)).flat):
        raise DomainError(f"W_{layer + 1} I_T W_{layer} ≠ 0 para T = {subset}")
    W, b = theta.W(layer).copy(), theta.b(layer).copy()
    W[subset] = -W[subset]
    b[subset] = -theta.b(layer)[subset]
    b_next = theta.b(layer + 1) + np.dot(theta.W(layer + 1)[:, subset], theta.b(layer)[subset])
    theta_prime = theta.with_layer(layer, W, b).with_layer(layer + 1, b=b_next)
    layer_twins = [c for c in find_twins(theta).layer_classes(layer) if not c.is_trivial]
    claim = ClaimedRelation.UNCLAIMED if layer_twins else ClaimedRelation.NOT_PS
    return ExamplePair("reducibility-collapse", theta, theta_prime, EqualityDomain(), claim)


def case2a_default_gamma(alpha: Any, outgoing: np.ndarray, one: Any = Fraction(1)) -> Any:
    """γ = min(1, |α|, 1/‖w_{ν1→•}‖_∞) / 2."""
    return min(one, abs(alpha), one / max(abs(v) for v in outgoing)) / 2


def case2a_bias_witness(theta: Params, epsilon: Any, gamma: Optional[Any] = None) -> ExamplePair:
    """
    Pareja negativa única con salientes dependientes (w_{ν2→•} = α w_{ν1→•}):
    b'_{ν1} = b_{ν1} + γε, b'_{ν2} = b_{ν2} + γε/α, b'_η = b_η - w_{ν1→η} γε.
    """
    if theta.depth != 2:
        raise UnsupportedDepthError("el testigo exige L = 2")
    pair = single_negative_pair(find_twins(theta))
    if pair is None:
        raise DomainError("θ no tiene exactamente una pareja de gemelas negativas")
    analysis = analyze_single_negative_pair(theta, pair)
    if analysis.outgoing_independent:
        raise DomainError("los vectores salientes de la pareja son independientes")
    alpha = analysis.outgoing_ratio
    v1 = theta.outgoing(pair.first)
    gamma = case2a_default_gamma(alpha, v1, theta.one()) if gamma is None else theta.coerce([gamma])[0]
    shift = gamma * theta.coerce([epsilon])[0]
    b1, b2 = theta.b(1).copy(), theta.b(2).copy()
    b1[pair.first[1]] = b1[pair.first[1]] + shift
    b1[pair.second[1]] = b1[pair.second[1]] + shift / alpha
    b2 = b2 - v1 * shift
    theta_prime = theta.replace(biases=[b1, b2])
    bound = shift * max(1, 1 / (abs(alpha) * abs(pair.ratio)))
    return ExamplePair("case2a-bias-witness", theta, theta_prime,
                       EqualityDomain(DomainKind.COMPACT, pair.first, bound), ClaimedRelation.NOT_S)


# -- identidades escalares ---------------------------------------------------------------


def _relu(t: Any) -> Any:
    return t if t > 0 else t * 0


def twin_fact_sides(alpha: Any, beta: Any, M: Any, t: Any) -> Tuple[Any, Any, Any]:
    """
    (α ReLU(t) + β ReLU(-t), (α+β) ReLU(t) - β ReLU(t+M) + βM, mismo con +M).
    Las dos primeras coinciden para t >= -M; la tercera solo si β = 1.
    """
    lhs = alpha * _relu(t) + beta * _relu(-t)
    common = (alpha + beta) * _relu(t) - beta * _relu(t + M)
    return lhs, common + beta * M, common + M


def flip_fact_sides(chi: int, t: Any) -> Tuple[Any, Any, Any]:
    """(ReLU(t), χt + ReLU(et), χt + e ReLU(et)) con e = (-1)^χ."""
    if chi not in (0, 1):
        raise DomainError(f"χ debe valer 0 o 1, se recibió {chi}")
    e = -1 if chi else 1
    return _relu(t), chi * t + _relu(e * t), chi * t + e * _relu(e * t)


GENERATORS = ("abs", "abs-shifted", "identity", "nonlocal", "positive-twin", "negative-twin",
              "reducibility", "case2a")
