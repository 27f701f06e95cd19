#!/usr/bin/env python3
"""
Identification - Conjuntos finitos de identificación local
Construcción de F alrededor de los testigos de Ā(θ) y validación por falsación
"""

import logging
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Any, Dict, List, Optional, Sequence, Tuple

import numpy as np

from utils.workers import parallel_map, spawn_generators

from .activation_spaces import ActivationSpace
from .counterexamples import positive_twin_collapse
from .diagnostics import find_twins
from .equivalence import EquivalenceKind, Rescaling, check_scaling_equivalent, is_admissible, rescale
from .errors import ConstructionFailureError, DomainError
from .network import Params, activation_pattern, forward

logger = logging.getLogger(__name__)

DEFAULT_MAX_HALVINGS = 30


@dataclass(frozen=True)
class IdentificationSet:
    points: Tuple[np.ndarray, ...]
    anchors: Tuple[Tuple[np.ndarray, float], ...]
    bound_used: int
    halvings: int = 0

    def __len__(self) -> int:
        return len(self.points)

    def blocks(self) -> List[List[np.ndarray]]:
        """F_z = {z} ∪ {z + (r/2) δ_i} por ancla, en el orden de `points`."""
        size = len(self.points) // max(1, len(self.anchors))
        return [list(self.points[k * size:(k + 1) * size]) for k in range(len(self.anchors))]

    def to_dict(self) -> Dict[str, Any]:
        return {
            "points": [p.tolist() for p in self.points],
            "anchors": [{"z": z.tolist(), "radius": r} for z, r in self.anchors],
            "bound": self.bound_used,
            "size": len(self.points),
        }


def _hidden_gradients(theta: Params, x: np.ndarray) -> Tuple[np.ndarray, np.ndarray]:
    """Pre-activaciones ocultas en x y sus gradientes respecto de x (filas)."""
    params = theta.to_float()
    y = np.asarray(x, dtype=np.float64)
    J = np.identity(len(y))
    values, grads = [], []
    for layer in range(1, params.depth):
        z = params.W(layer) @ y + params.b(layer)
        Jz = params.W(layer) @ J
        values.append(z)
        grads.append(Jz)
        active = z > 0
        y = np.where(active, z, 0.0)
        J = Jz * active[:, None]
    return np.concatenate(values), np.vstack(grads)


def estimate_radius(theta: Params, z: np.ndarray) -> float:
    """r(z) = min_ν |z_ν| / (‖∇z_ν‖ + 1), dividido por dos."""
    values, grads = _hidden_gradients(theta, z)
    if values.size == 0:
        return 1.0
    ratios = np.abs(values) / (np.linalg.norm(grads, axis=1) + 1.0)
    return float(np.min(ratios)) / 2


def construct_identification_set(theta: Params, space: ActivationSpace,
                                 max_halvings: int = DEFAULT_MAX_HALVINGS) -> IdentificationSet:
    """
    F = ∪_z ({z} ∪ {z + (r(z)/2) δ_i}). El radio se reduce a la mitad hasta que
    el patrón de activación es constante en cada bloque.
    """
    admissibility = is_admissible(theta)
    if not admissibility:
        raise DomainError("θ no es admisible", neurons=admissibility.offending_neurons)
    if not space.witnesses:
        raise DomainError("el espacio de activación no tiene testigos; usar el muestreado")
    n_inputs = theta.architecture.n_inputs
    points: List[np.ndarray] = []
    anchors = []
    total_halvings = 0
    for z in space.witnesses:
        z = np.asarray(z, dtype=np.float64)
        r = estimate_radius(theta, z)
        reference = activation_pattern(theta, z)
        for halving in range(max_halvings + 1):
            block = [z] + [z + (r / 2) * np.eye(n_inputs)[i] for i in range(n_inputs)]
            if all(np.array_equal(activation_pattern(theta, x), reference) for x in block[1:]):
                break
            r /= 2
            total_halvings += 1
        else:
            raise ConstructionFailureError(
                f"patrón no constante alrededor de {z.tolist()} tras {max_halvings} reducciones")
        anchors.append((z, r))
        points.extend(block)
    bound = (n_inputs + 1) * space.actdim
    logger.debug("conjunto de identificación con %d puntos (cota %d)", len(points), bound)
    return IdentificationSet(tuple(points), tuple(anchors), bound, total_halvings)


# -- validación ----------------------------------------------------------------


@dataclass(frozen=True)
class Falsifier:
    kind: str
    trial: int
    max_difference: float

    def to_dict(self) -> Dict[str, Any]:
        return {"kind": self.kind, "trial": self.trial, "max_difference": self.max_difference}


@dataclass(frozen=True)
class ValidationReport:
    rescaling_trials: int
    rescaling_failures: Tuple[int, ...]
    perturbation_trials: int
    skipped_equivalent: int
    structured_probes: int
    falsifiers: Tuple[Falsifier, ...] = field(default_factory=tuple)

    @property
    def passed(self) -> bool:
        return not self.rescaling_failures and not self.falsifiers

    def to_dict(self) -> Dict[str, Any]:
        return {
            "passed": self.passed,
            "rescaling_trials": self.rescaling_trials,
            "rescaling_failures": list(self.rescaling_failures),
            "perturbation_trials": self.perturbation_trials,
            "skipped_equivalent": self.skipped_equivalent,
            "structured_probes": self.structured_probes,
            "falsifiers": [f.to_dict() for f in self.falsifiers],
        }


def _outputs(theta: Params, points: Sequence[np.ndarray]) -> np.ndarray:
    return np.array([forward(theta, x)[0] for x in points], dtype=object)


def _max_difference(a: np.ndarray, b: np.ndarray) -> float:
    return float(np.max(np.abs(a.astype(np.float64) - b.astype(np.float64)))) if a.size else 0.0


def _same_on(theta: Params, theta_prime: Params, points: Sequence[np.ndarray], reference: np.ndarray,
             atol: float) -> Tuple[bool, float]:
    values = _outputs(theta_prime, points)
    if theta.is_exact and theta_prime.is_exact:
        return bool(np.array_equal(values, reference)), _max_difference(values, reference)
    diff = _max_difference(values, reference)
    return diff <= atol, diff


def _random_scalar(theta: Params, rng: np.random.Generator, low: int, high: int, denominator: int) -> Any:
    k = int(rng.integers(low, high + 1))
    return Fraction(k, denominator) if theta.is_exact else k / denominator


def validate_identification_set(theta: Params, identification_set: IdentificationSet, trials: int = 500,
                                epsilon: float = 1e-3, seed: int = 0, threads: Optional[int] = None,
                                atol: float = 1e-12) -> ValidationReport:
    """
    Protocolo de falsación: (i) reescalados cercanos a 1 coinciden en F y se
    detectan S-equivalentes; (ii) perturbaciones no S-equivalentes en B(θ, ε)
    deben diferir en algún punto de F; (iii) cada pareja de gemelas positivas
    aporta su colapso como candidato a contraejemplo.
    """
    points = identification_set.points
    reference = _outputs(theta, points)
    scale = max(1.0, float(np.max(np.abs(reference.astype(np.float64))))) if reference.size else 1.0
    tolerance = atol * scale
    arch = theta.architecture
    eps = Fraction(repr(float(epsilon))) if theta.is_exact else float(epsilon)

    def rescaling_trial(args: Tuple[int, np.random.Generator]) -> Optional[int]:
        trial, rng = args
        factors = [np.array([1 + _random_scalar(theta, rng, -10, 10, 100) for _ in range(arch.widths[l])],
                            dtype=object) for l in arch.hidden_layers]
        theta_prime = rescale(theta, Rescaling(tuple(factors)))
        same, _ = _same_on(theta, theta_prime, points, reference, tolerance)
        witness = check_scaling_equivalent(theta, theta_prime)
        return None if same and witness.kind is EquivalenceKind.S else trial

    def perturbation_trial(args: Tuple[int, np.random.Generator]) -> Tuple[bool, Optional[Falsifier]]:
        trial, rng = args
        vector = theta.as_vector()
        noise = [eps * _random_scalar(theta, rng, -1000, 1000, 1000) for _ in range(len(vector))]
        theta_prime = Params.from_vector(arch, list(vector + np.array(noise, dtype=object)), theta.scalar_mode)
        if check_scaling_equivalent(theta, theta_prime).kind is EquivalenceKind.S:
            return True, None
        same, diff = _same_on(theta, theta_prime, points, reference, tolerance)
        return False, Falsifier("random-perturbation", trial, diff) if same else None

    rescale_rngs = spawn_generators(seed, trials)
    perturb_rngs = spawn_generators(seed + 1, trials)
    failures = [t for t in parallel_map(rescaling_trial, list(enumerate(rescale_rngs)), threads) if t is not None]
    outcomes = parallel_map(perturbation_trial, list(enumerate(perturb_rngs)), threads)
    skipped = sum(1 for equivalent, _ in outcomes if equivalent)
    falsifiers = [f for _, f in outcomes if f is not None]

    probes = 0
    if theta.depth >= 2:
        for k, pair in enumerate(find_twins(theta).positive_pairs()):
            probes += 1
            collapsed = positive_twin_collapse(theta, pair.first, pair.second, eps).theta_prime
            if check_scaling_equivalent(theta, collapsed).kind is EquivalenceKind.S:
                continue
            same, diff = _same_on(theta, collapsed, points, reference, tolerance)
            if same:
                falsifiers.append(Falsifier("positive-twin-collapse", k, diff))

    if failures:
        logger.warning("%d reescalados no superaron la validación", len(failures))
    if falsifiers:
        logger.warning("%d contraejemplos encontrados para F", len(falsifiers))
    return ValidationReport(trials, tuple(failures), trials, skipped, probes, tuple(falsifiers))
