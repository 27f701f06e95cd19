#!/usr/bin/env python3
"""
ActivationSpaces - Espacios de activación Ā(θ), A(θ) y estructura de V(θ)
Muestreo con puntos separadores de gemelas, forma cerrada para L = 2 y certificados de no degeneración
"""

import logging
from dataclasses import dataclass
from enum import Enum
from typing import Any, Dict, List, Optional, Sequence, Tuple

import numpy as np
from scipy import linalg

from utils.exact_linalg import IncrementalReducer

from .diagnostics import (TwinClass, analyze_single_negative_pair, find_twins, single_negative_pair)
from .equivalence import is_admissible
from .errors import (ConstructionFailureError, DomainError, SamplingFailureError, ShapeError,
                     UnsupportedDepthError)
from .network import (ConstraintSet, Params, XContStatus, batch_hidden_pre_activations, forward, in_xcont)
from .paths import PathIndex, path_activations

logger = logging.getLogger(__name__)

DEFAULT_RADIUS_SWEEP = (0.25, 1.0, 4.0)
DEFAULT_MARGIN = 1e-6


@dataclass(frozen=True)
class ActivationSpace:
    """
    Ā(θ) ⊂ R^{|Q|+1}. `basis` tiene filas ortonormales; `spanning` son los
    vectores que lo generan (los ᾱ de los testigos en modo muestreado).
    """

    ambient: int
    n_q1: int
    basis: np.ndarray
    spanning: np.ndarray
    witnesses: Tuple[np.ndarray, ...] = ()
    method: str = "sampled"
    lower_bound: bool = False

    @property
    def actdim(self) -> int:
        return int(self.basis.shape[0])

    def complement(self) -> np.ndarray:
        """Base ortonormal (por filas) de Ā(θ)^⊥."""
        return _orthogonal_complement(self.basis, self.ambient)

    def restricted_basis(self) -> np.ndarray:
        """Base ortonormal de A(θ) = Q·Ā(θ), las |Q_1| primeras coordenadas."""
        if self.actdim == 0 or self.n_q1 == 0:
            return np.zeros((0, self.n_q1))
        return linalg.orth(self.basis[:, :self.n_q1].T, rcond=1e-9).T

    def restricted_complement(self) -> np.ndarray:
        return _orthogonal_complement(self.restricted_basis(), self.n_q1)

    def projection_residual(self, vectors: Any) -> float:
        """Máxima distancia de los vectores (filas) al subespacio."""
        V = np.atleast_2d(np.asarray(vectors, dtype=np.float64))
        if V.shape[1] != self.ambient:
            raise ShapeError(f"vectores de dimensión {V.shape[1]}, el ambiente es {self.ambient}")
        projected = V @ self.basis.T @ self.basis if self.actdim else np.zeros_like(V)
        return float(np.max(np.linalg.norm(V - projected, axis=1))) if len(V) else 0.0

    def to_dict(self) -> Dict[str, Any]:
        return {
            "actdim": self.actdim,
            "ambient": self.ambient,
            "method": self.method,
            "lower_bound": self.lower_bound,
            "basis": self.basis.tolist(),
            "witnesses": [np.asarray(w, dtype=np.float64).tolist() for w in self.witnesses],
        }


def _orthogonal_complement(basis: np.ndarray, ambient: int) -> np.ndarray:
    if basis.shape[0] == 0:
        return np.identity(ambient)
    if basis.shape[0] >= ambient:
        return np.zeros((0, ambient))
    return linalg.null_space(basis).T


def _orthonormal_rows(vectors: Sequence[np.ndarray], ambient: int) -> np.ndarray:
    if not vectors:
        return np.zeros((0, ambient))
    q, _ = linalg.qr(np.asarray(vectors, dtype=np.float64).T, mode="economic")
    return q.T


def path_activation_vector(theta: Params, x: Any) -> np.ndarray:
    """ᾱ(θ,x) ∈ {0,1}^{|Q|+1}."""
    if theta.depth < 2:
        raise UnsupportedDepthError("ᾱ requiere al menos una capa oculta")
    _, trace = forward(theta, x)
    return path_activations(trace.statuses, theta.architecture)


class _SpaceBuilder:
    """Acumula testigos cuyo ᾱ es independiente de los anteriores (decisión exacta sobre 0/1)."""

    def __init__(self, theta: Params, margin: float):
        self.theta = theta
        self.margin = margin
        self.index = PathIndex(theta.architecture)
        self.ambient = self.index.n_q + 1
        self.reducer = IncrementalReducer(self.ambient)
        self.vectors: List[np.ndarray] = []
        self.witnesses: List[np.ndarray] = []
        self.seen = set()
        self.valid = 0

    @property
    def full(self) -> bool:
        return self.reducer.rank >= self.ambient

    def consider(self, x: np.ndarray, statuses: Optional[Sequence[np.ndarray]] = None) -> bool:
        """Devuelve True si x pasa el test de margen."""
        if statuses is None:
            if in_xcont(self.theta, x, self.margin) is not XContStatus.INSIDE:
                return False
            statuses = forward(self.theta, x)[1].statuses
        alpha = path_activations(statuses, self.theta.architecture)
        self.valid += 1
        key = alpha.tobytes()
        if key in self.seen:
            return True
        self.seen.add(key)
        # En modo exacto el margen float se confirma antes de aceptar un testigo
        if self.theta.is_exact and in_xcont(self.theta, x, self.margin) is not XContStatus.INSIDE:
            self.valid -= 1
            return False
        if self.reducer.add(alpha):
            self.vectors.append(alpha)
            self.witnesses.append(np.asarray(x, dtype=np.float64).copy())
        return True

    def build(self, method: str = "sampled") -> ActivationSpace:
        return ActivationSpace(
            ambient=self.ambient,
            n_q1=self.index.n_q1,
            basis=_orthonormal_rows(self.vectors, self.ambient),
            spanning=np.asarray(self.vectors, dtype=np.int64).reshape(-1, self.ambient),
            witnesses=tuple(self.witnesses),
            method=method,
            lower_bound=self.theta.depth > 2,
        )


def twin_separating_points(theta: Params, twin_class: TwinClass, rng: Optional[np.random.Generator] = None,
                           ) -> Tuple[np.ndarray, np.ndarray]:
    """
    Pareja x^± que solo difiere en los estados de las neuronas de la clase:
    se parte de un punto del hiperplano común, lejos del resto, y se avanza
    ± a lo largo de w_{•→ν}.
    """
    if twin_class.layer != 1:
        raise DomainError("los puntos separadores se construyen para la primera capa oculta")
    rng = rng or np.random.default_rng(0)
    params = theta.to_float()
    layer = twin_class.layer
    rep = twin_class.members[0]
    w = params.W(layer)[rep]
    b = float(params.b(layer)[rep])
    norm = float(np.linalg.norm(w))
    if norm == 0:
        raise ConstructionFailureError(f"la neurona {(layer, rep)} tiene pesos entrantes nulos")
    unit = w / norm
    x0 = -b * unit / norm
    others = [i for i in range(params.architecture.widths[layer]) if i not in twin_class.members]
    if len(w) > 1:
        tangent = rng.standard_normal(len(w))
        tangent -= (tangent @ unit) * unit
        tangent /= max(float(np.linalg.norm(tangent)), 1e-300)
        x0 = x0 + float(rng.standard_normal()) * tangent
    distances = []
    for i in others:
        w_i = params.W(layer)[i]
        n_i = float(np.linalg.norm(w_i))
        if n_i == 0:
            continue
        distances.append(abs(float(w_i @ x0) + float(params.b(layer)[i])) / n_i)
    step = min(distances) / 2 if distances else 1.0
    if not step > 0:
        raise ConstructionFailureError(f"el punto base de la clase {twin_class.members} cae sobre otro hiperplano")
    return x0 + step * unit, x0 - step * unit


def sample_activation_space(theta: Params, n_samples: int = 64, seed: int = 0, margin: float = DEFAULT_MARGIN,
                            radius_sweep: Sequence[float] = DEFAULT_RADIUS_SWEEP,
                            max_resample_factor: int = 100, inject_twin_points: bool = True) -> ActivationSpace:
    """
    Ā(θ) = span{ᾱ(θ,x)} con x gaussianos escalados por cada radio. En redes
    poco profundas se añaden los puntos x^± de cada clase de gemelas.
    """
    if n_samples < 1:
        raise DomainError(f"n_samples debe ser >= 1, se recibió {n_samples}")
    if theta.depth < 2:
        raise UnsupportedDepthError("Ā(θ) requiere al menos una capa oculta")
    rng = np.random.default_rng(seed)
    builder = _SpaceBuilder(theta, margin)
    n_inputs = theta.architecture.n_inputs
    max_attempts = max_resample_factor * n_samples
    for radius in radius_sweep:
        attempts, valid_here = 0, 0
        while valid_here < n_samples and attempts < max_attempts and not builder.full:
            batch = min(n_samples, max_attempts - attempts)
            X = rng.standard_normal((batch, n_inputs)) * radius
            attempts += batch
            Z = batch_hidden_pre_activations(theta, X)
            margins = np.min(np.abs(np.hstack(Z)), axis=1)
            for k in range(batch):
                if margins[k] <= margin:
                    continue
                if builder.consider(X[k], [(z[k] > 0).astype(np.int8) for z in Z]):
                    valid_here += 1
        if valid_here == 0:
            logger.warning("radio %s: ninguna muestra válida en %d intentos", radius, attempts)

    if inject_twin_points and theta.depth == 2:
        twins = find_twins(theta)
        for twin_class in twins.layer_classes(1):
            try:
                pair = twin_separating_points(theta, twin_class, rng)
            except ConstructionFailureError as e:
                logger.warning("sin puntos separadores para %s: %s", twin_class.members, e)
                continue
            for x in pair:
                builder.consider(x)

    if builder.valid == 0:
        raise SamplingFailureError(f"ninguna muestra válida tras {max_attempts} intentos por radio",
                                   margin=margin, n_samples=n_samples)
    logger.debug("actdim muestreado %d de %d", builder.reducer.rank, builder.ambient)
    return builder.build()


def extend_activation_space(theta: Params, space: ActivationSpace, points: Sequence[Any],
                            margin: float = DEFAULT_MARGIN) -> ActivationSpace:
    """Añade puntos a un espacio muestreado; actdim nunca disminuye."""
    builder = _SpaceBuilder(theta, margin)
    for x in list(space.witnesses) + [np.asarray(p, dtype=np.float64) for p in points]:
        builder.consider(x)
    return builder.build(space.method)


def shallow_activation_space(theta: Params) -> ActivationSpace:
    """Forma cerrada: Ā(θ) = span{(1_H, 2), (σ_c, 0)} sobre las clases de gemelas."""
    if theta.depth != 2:
        raise UnsupportedDepthError(f"la forma cerrada exige L = 2, la red tiene L = {theta.depth}")
    admissibility = is_admissible(theta)
    if not admissibility:
        raise DomainError("la forma cerrada exige θ admisible", neurons=admissibility.offending_neurons)
    width = theta.architecture.widths[1]
    twins = find_twins(theta)
    spanning = [np.concatenate([np.ones(width), [2.0]])]
    for sigma in twins.signatures(1):
        spanning.append(np.concatenate([sigma.astype(np.float64), [0.0]]))
    spanning = np.asarray(spanning)
    basis = linalg.orth(spanning.T, rcond=1e-12).T
    return ActivationSpace(ambient=width + 1, n_q1=width, basis=basis, spanning=spanning,
                           method="closed-form")


@dataclass(frozen=True)
class VSpaceStructure:
    """V(θ) ≅ (A^⊥)^{N_L × N_0} × (Ā^⊥)^{N_L}."""

    n_inputs: int
    n_outputs: int
    a_complement: np.ndarray
    abar_complement: np.ndarray

    @property
    def dimension(self) -> int:
        return (self.n_outputs * self.n_inputs * self.a_complement.shape[0]
                + self.n_outputs * self.abar_complement.shape[0])

    def to_dict(self) -> Dict[str, Any]:
        return {
            "dimension": self.dimension,
            "a_complement": self.a_complement.tolist(),
            "abar_complement": self.abar_complement.tolist(),
        }


def v_space_dimension(theta: Params, space: ActivationSpace) -> VSpaceStructure:
    if theta.depth < 2:
        raise UnsupportedDepthError("V(θ) requiere al menos una capa oculta")
    arch = theta.architecture
    return VSpaceStructure(arch.n_inputs, arch.n_outputs, space.restricted_complement(), space.complement())


def v_space_basis_in_path_space(theta: Params, structure: VSpaceStructure,
                                index: Optional[PathIndex] = None) -> np.ndarray:
    """Filas: base de V(θ) como vectores de R^P (bloques Φ^i y Φ^h de cada salida)."""
    index = index or PathIndex(theta.architecture)
    rows = []
    for eta in range(structure.n_outputs):
        block_i = index.input_block_indices(eta)
        for a in structure.a_complement:
            for mu in range(structure.n_inputs):
                v = np.zeros(index.n_paths)
                v[block_i[:, mu]] = a
                rows.append(v)
        block_h = index.hidden_block_indices(eta)
        for abar in structure.abar_complement:
            v = np.zeros(index.n_paths)
            v[block_h] = abar
            rows.append(v)
    return np.asarray(rows).reshape(-1, index.n_paths)


class Nondegeneracy(str, Enum):
    CERTIFIED_NONDEGENERATE = "certified-nondegenerate"
    CERTIFIED_DEGENERATE = "certified-degenerate"
    INCONCLUSIVE = "inconclusive"


@dataclass(frozen=True)
class NondegeneracyCertificate:
    verdict: Nondegeneracy
    reason: str
    v_dimension: int

    def to_dict(self) -> Dict[str, Any]:
        return {"verdict": self.verdict.value, "reason": self.reason, "v_dimension": self.v_dimension}


def nondegeneracy_certificate(theta: Params, constraint: Optional[ConstraintSet] = None,
                              space: Optional[ActivationSpace] = None, seed: int = 0) -> NondegeneracyCertificate:
    """
    Casos decidibles: dim V = 0; pareja negativa única en L = 2; salida escalar
    en L = 2 con Ā^⊥ ≠ {0} y desplazamiento de sesgos admitido por Θ.
    """
    constraint = constraint or ConstraintSet.unconstrained()
    admissibility = is_admissible(theta)
    if not admissibility:
        raise DomainError("el certificado exige θ admisible", neurons=admissibility.offending_neurons)
    if space is None:
        space = shallow_activation_space(theta) if theta.depth == 2 else sample_activation_space(theta, seed=seed)
    structure = v_space_dimension(theta, space)
    dim_v = structure.dimension
    if dim_v == 0:
        return NondegeneracyCertificate(Nondegeneracy.CERTIFIED_NONDEGENERATE, "dim V(θ) = 0", 0)
    if theta.depth != 2:
        return NondegeneracyCertificate(Nondegeneracy.INCONCLUSIVE, "red profunda con dim V(θ) > 0", dim_v)

    pair = single_negative_pair(find_twins(theta))
    if pair is not None:
        analysis = analyze_single_negative_pair(theta, pair, constraint)
        if analysis.nondegenerate is True:
            return NondegeneracyCertificate(Nondegeneracy.CERTIFIED_NONDEGENERATE,
                                            f"pareja negativa única, caso {analysis.branch}", dim_v)
        if analysis.nondegenerate is False:
            return NondegeneracyCertificate(Nondegeneracy.CERTIFIED_DEGENERATE,
                                            f"pareja negativa única, caso {analysis.branch}", dim_v)

    arch = theta.architecture
    if arch.n_outputs == 1 and structure.abar_complement.shape[0] > 0:
        shifted = list(arch.hidden_neurons) + [(2, 0)]
        if constraint.admits_bias_shift(theta, shifted):
            return NondegeneracyCertificate(Nondegeneracy.CERTIFIED_DEGENERATE,
                                            "salida escalar con Ā(θ)^⊥ ≠ {0}", dim_v)
    return NondegeneracyCertificate(Nondegeneracy.INCONCLUSIVE, "ningún criterio aplicable", dim_v)


def scalar_bias_degeneracy_witness(theta: Params, z: Sequence[Any], scale: Any,
                                   residual_tol: float = 1e-10) -> Params:
    """θ' con b'_ν = b_ν + ε z_ν / v_ν y b'_η = b_η + ε z_*; los pesos no cambian."""
    if theta.depth != 2 or theta.architecture.n_outputs != 1:
        raise UnsupportedDepthError("el testigo exige L = 2 y salida escalar")
    if scale < 0:
        raise DomainError(f"la escala debe ser no negativa, se recibió {scale}")
    space = shallow_activation_space(theta)
    z_vec = theta.coerce(z)
    if len(z_vec) != space.ambient:
        raise ShapeError(f"z tiene {len(z_vec)} entradas, se esperaban {space.ambient}")
    z_float = np.asarray(z_vec, dtype=np.float64)
    residual = float(np.linalg.norm(space.basis @ z_float)) if space.actdim else 0.0
    if residual > residual_tol * max(1.0, float(np.linalg.norm(z_float))):
        raise DomainError(f"z no pertenece a Ā(θ)^⊥ (residuo {residual:.3e})")
    eps = theta.coerce([scale])[0]
    v = theta.W(2)[0]
    width = theta.architecture.widths[1]
    b1 = theta.b(1).copy()
    for i in range(width):
        if z_vec[i] != 0:
            b1[i] = b1[i] + eps * z_vec[i] / v[i]
    b2 = theta.b(2).copy()
    b2[0] = b2[0] + eps * z_vec[width]
    return theta.replace(biases=[b1, b2])
