#!/usr/bin/env python3
"""
Equivalence - Acciones de grupo y equivalencia por reescalado y permutación
Reescalados, permutaciones de capas ocultas, operador S_θ, testigos de equivalencia y forma canónica
"""

import logging
import math
from dataclasses import dataclass
from enum import Enum
from typing import Any, Dict, Iterator, List, Mapping, Optional, Sequence, Tuple

import numpy as np

from .errors import DomainError, ShapeError
from .network import Architecture, Neuron, ParamKey, Params, hidden_admissibility
from .paths import embed

logger = logging.getLogger(__name__)

DEFAULT_PS_SEARCH_BUDGET = 100000


@dataclass(frozen=True)
class Rescaling:
    """Factores λ_ν > 0 por neurona oculta; factors[ℓ-1] corresponde a la capa ℓ."""

    factors: Tuple[np.ndarray, ...]

    def __post_init__(self):
        factors = tuple(np.asarray(f, dtype=object) for f in self.factors)
        for layer, f in enumerate(factors, start=1):
            if f.ndim != 1:
                raise ShapeError(f"capa {layer}: los factores deben formar un vector")
            if any(not v > 0 for v in f):
                raise DomainError(f"capa {layer}: todos los factores deben ser estrictamente positivos")
        object.__setattr__(self, "factors", factors)

    @classmethod
    def identity(cls, arch: Architecture) -> "Rescaling":
        return cls(tuple(np.ones(arch.widths[l], dtype=int) for l in arch.hidden_layers))

    @classmethod
    def from_neurons(cls, arch: Architecture, values: Mapping[Neuron, Any]) -> "Rescaling":
        factors = [np.ones(arch.widths[l], dtype=object) for l in arch.hidden_layers]
        for (layer, i), value in values.items():
            factors[layer - 1][i] = value
        return cls(tuple(factors))

    def factor(self, neuron: Neuron) -> Any:
        layer, i = neuron
        return self.factors[layer - 1][i]

    def inverse(self) -> "Rescaling":
        return Rescaling(tuple(np.array([1 / v for v in f], dtype=object) for f in self.factors))

    def as_lists(self) -> List[List[Any]]:
        return [list(f) for f in self.factors]


@dataclass(frozen=True)
class Permutation:
    """π_ℓ por capa oculta: la neurona i de la capa ℓ pasa a la posición maps[ℓ-1][i]."""

    maps: Tuple[np.ndarray, ...]

    def __post_init__(self):
        maps = tuple(np.asarray(m, dtype=np.int64) for m in self.maps)
        for layer, m in enumerate(maps, start=1):
            if m.ndim != 1 or sorted(m.tolist()) != list(range(len(m))):
                raise DomainError(f"capa {layer}: {m.tolist()} no es una permutación")
        object.__setattr__(self, "maps", maps)

    @classmethod
    def identity(cls, arch: Architecture) -> "Permutation":
        return cls(tuple(np.arange(arch.widths[l]) for l in arch.hidden_layers))

    def inverse(self) -> "Permutation":
        return Permutation(tuple(np.argsort(m) for m in self.maps))

    def as_lists(self) -> List[List[int]]:
        return [m.tolist() for m in self.maps]


def _check_hidden_shapes(theta: Params, vectors: Sequence[np.ndarray], what: str) -> None:
    arch = theta.architecture
    expected = [arch.widths[l] for l in arch.hidden_layers]
    got = [len(v) for v in vectors]
    if got != expected:
        raise ShapeError(f"{what}: tamaños {got}, la arquitectura pide {expected}")


def _layer_vectors(theta: Params, per_hidden: Sequence[np.ndarray], fill: Any) -> List[np.ndarray]:
    """Extiende valores por capa oculta con `fill` en la entrada y la salida."""
    arch = theta.architecture
    ones_in = np.empty(arch.widths[0], dtype=object)
    ones_in[:] = fill
    ones_out = np.empty(arch.n_outputs, dtype=object)
    ones_out[:] = fill
    return [ones_in] + [theta.coerce(v) for v in per_hidden] + [ones_out]


def rescale(theta: Params, lam: Rescaling) -> Params:
    """W'_ℓ = Λ_ℓ W_ℓ Λ_{ℓ-1}^{-1} y b'_ℓ = Λ_ℓ b_ℓ."""
    _check_hidden_shapes(theta, lam.factors, "reescalado")
    lams = _layer_vectors(theta, lam.factors, theta.one())
    weights, biases = [], []
    for l in range(1, theta.depth + 1):
        weights.append(theta.W(l) * lams[l][:, None] / lams[l - 1][None, :])
        biases.append(theta.b(l) * lams[l])
    return theta.replace(weights, biases)


def permute(theta: Params, pi: Permutation) -> Params:
    """Permuta filas de W_ℓ y b_ℓ según π_ℓ y columnas de W_ℓ según π_{ℓ-1}."""
    _check_hidden_shapes(theta, pi.maps, "permutación")
    arch = theta.architecture
    inv = [np.arange(arch.widths[0])] + [np.argsort(m) for m in pi.maps] + [np.arange(arch.n_outputs)]
    weights = [theta.W(l)[inv[l]][:, inv[l - 1]] for l in range(1, theta.depth + 1)]
    biases = [theta.b(l)[inv[l]] for l in range(1, theta.depth + 1)]
    return theta.replace(weights, biases)


@dataclass(frozen=True)
class AdmissibilityReport:
    admissible: bool
    offending: Tuple[Tuple[Neuron, str], ...] = ()

    def __bool__(self) -> bool:
        return self.admissible

    @property
    def offending_neurons(self) -> List[Neuron]:
        return sorted({n for n, _ in self.offending})


def is_admissible(theta: Params, atol: float = 0.0) -> AdmissibilityReport:
    """Toda neurona oculta con pesos entrantes y salientes no nulos."""
    offending = hidden_admissibility(theta, atol)
    return AdmissibilityReport(not offending, tuple(offending))


# -- operador S_θ ------------------------------------------------------------


def supp_paths_to_output(theta: Params, neuron: Neuron) -> Iterator[List[ParamKey]]:
    """Caminos de ν a una salida con todos los pesos no nulos, en orden lexicográfico."""
    L = theta.depth
    layer, i = neuron
    if layer == L:
        yield []
        return
    column = theta.W(layer + 1)[:, i]
    for j, value in enumerate(column):
        if value != 0:
            edge = ParamKey("w", layer + 1, j, i)
            for rest in supp_paths_to_output(theta, (layer + 1, j)):
                yield [edge] + rest


def _first_supp_path(theta: Params, neuron: Neuron) -> List[ParamKey]:
    try:
        return next(supp_paths_to_output(theta, neuron))
    except StopIteration:
        raise DomainError(f"la neurona {neuron} no tiene camino de soporte hasta la salida")


def log_ratio_vector(theta: Params, theta_prime: Params) -> Dict[ParamKey, float]:
    """α_e = log(θ'_e/θ_e) sobre supp(θ) ∩ E; exige signos iguales en esas entradas."""
    alpha = {}
    for key in theta.parameter_index():
        if key.kind != "w":
            continue
        value = theta.value(key)
        if value == 0:
            continue
        ratio = theta_prime.value(key) / value
        if not ratio > 0:
            raise DomainError(f"{key.label()}: cociente {ratio} no positivo")
        alpha[key] = math.log(float(ratio))
    return alpha


def scaling_operator(theta: Params, alpha: Mapping[ParamKey, float],
                     paths: Optional[Mapping[Neuron, Sequence[ParamKey]]] = None) -> Tuple[np.ndarray, ...]:
    """
    (S_θ α)_ν = -Σ_{e∈p} α_e con p un camino de soporte de ν a la salida.

    Args:
        paths: caminos elegidos por neurona; por defecto el primero en orden lexicográfico

    Returns:
        β por capa oculta
    """
    arch = theta.architecture
    beta = []
    for layer in arch.hidden_layers:
        values = np.zeros(arch.widths[layer])
        for i in range(arch.widths[layer]):
            path = paths[(layer, i)] if paths and (layer, i) in paths else _first_supp_path(theta, (layer, i))
            values[i] = -sum(alpha[e] for e in path)
        beta.append(values)
    return tuple(beta)


def scaling_operator_inverse(theta: Params, beta: Sequence[np.ndarray]) -> Dict[ParamKey, float]:
    """α_{μ→ν} = β_ν - β_μ sobre supp(θ) ∩ E, con β nulo en entrada y salida."""
    _check_hidden_shapes(theta, beta, "β")
    arch = theta.architecture
    full = [np.zeros(arch.widths[0])] + [np.asarray(b, dtype=np.float64) for b in beta] + [np.zeros(arch.n_outputs)]
    alpha = {}
    for key in theta.parameter_index():
        if key.kind == "w" and theta.value(key) != 0:
            alpha[key] = float(full[key.layer][key.row] - full[key.layer - 1][key.col])
    return alpha


# -- testigos ------------------------------------------------------------------


class EquivalenceKind(str, Enum):
    S = "S"
    PS = "PS"
    NONE = "none"
    INCONCLUSIVE = "inconclusive"
    UNDECIDABLE = "undecidable"


@dataclass(frozen=True)
class EquivalenceWitness:
    kind: EquivalenceKind
    permutation: Optional[Permutation] = None
    rescaling: Optional[Rescaling] = None
    reason: str = ""
    candidates_tried: int = 0

    @property
    def relation(self) -> str:
        """Relación para los informes; "undecidable" se comunica como "inconclusive"."""
        if self.kind is EquivalenceKind.UNDECIDABLE:
            return EquivalenceKind.INCONCLUSIVE.value
        return self.kind.value

    @property
    def found(self) -> bool:
        return self.kind in (EquivalenceKind.S, EquivalenceKind.PS)

    def to_dict(self) -> Dict[str, Any]:
        return {
            "relation": self.relation,
            "witness": {
                "pi": None if self.permutation is None else self.permutation.as_lists(),
                "lambda": None if self.rescaling is None else self.rescaling.as_lists(),
            },
            "reason": self.reason,
            "candidates_tried": self.candidates_tried,
        }


def _same(a: np.ndarray, b: np.ndarray, exact: bool, rtol: float, atol: float) -> bool:
    if a.shape != b.shape:
        return False
    if exact:
        return bool(np.array_equal(a, b))
    return bool(np.allclose(np.asarray(a, dtype=np.float64), np.asarray(b, dtype=np.float64), rtol=rtol, atol=atol))


def _params_match(a: Params, b: Params, exact: bool, rtol: float, atol: float) -> bool:
    if exact:
        return a.to_exact() == b.to_exact()
    return a.allclose(b, rtol=rtol, atol=atol)


def _sign(value: Any, atol: float) -> int:
    if abs(value) <= atol:
        return 0
    return 1 if value > 0 else -1


def check_scaling_equivalent(theta: Params, theta_prime: Params, atol: float = 0.0,
                             rtol: float = 1e-9) -> EquivalenceWitness:
    """
    Decide θ ∼_S θ' por el criterio del embedding: Φ(θ') = Φ(θ) y mismos signos
    en los pesos. El reescalado se reconstruye y se verifica.
    """
    if theta.architecture != theta_prime.architecture:
        return EquivalenceWitness(EquivalenceKind.NONE, reason="arquitecturas distintas")
    admissibility = is_admissible(theta, atol)
    if not admissibility:
        return EquivalenceWitness(EquivalenceKind.UNDECIDABLE,
                                  reason=f"θ no es admisible: {admissibility.offending_neurons}")
    exact = theta.is_exact and theta_prime.is_exact
    if not exact:
        theta, theta_prime = theta.to_float(), theta_prime.to_float()
        atol = atol or 1e-12
    phi, phi_prime = embed(theta).phi, embed(theta_prime).phi
    if not _same(phi, phi_prime, exact, rtol, atol):
        return EquivalenceWitness(EquivalenceKind.NONE, reason="embeddings distintos")
    for key in theta.parameter_index():
        if key.kind == "w" and _sign(theta.value(key), atol) != _sign(theta_prime.value(key), atol):
            return EquivalenceWitness(EquivalenceKind.NONE, reason=f"signo distinto en {key.label()}")

    arch = theta.architecture
    if exact:
        factors = []
        for layer in arch.hidden_layers:
            values = np.empty(arch.widths[layer], dtype=object)
            for i in range(arch.widths[layer]):
                ratio = theta.one()
                for e in _first_supp_path(theta, (layer, i)):
                    ratio = ratio * theta.value(e) / theta_prime.value(e)
                values[i] = ratio
            factors.append(values)
    else:
        beta = scaling_operator(theta, log_ratio_vector(theta, theta_prime))
        factors = [np.exp(b) for b in beta]
    lam = Rescaling(tuple(factors))
    if not _params_match(rescale(theta, lam), theta_prime, exact, rtol, atol):
        logger.warning("Φ y signos coinciden pero el reescalado reconstruido no verifica")
        return EquivalenceWitness(EquivalenceKind.NONE, reason="verificación del reescalado fallida")
    return EquivalenceWitness(EquivalenceKind.S, rescaling=lam)


def _descriptor(vector: np.ndarray, exact: bool) -> np.ndarray:
    """Dirección invariante por escalas positivas (signo conservado)."""
    if exact:
        for v in vector:
            if v != 0:
                return vector / abs(v)
        return vector
    norm = float(np.linalg.norm(np.asarray(vector, dtype=np.float64)))
    return np.asarray(vector, dtype=np.float64) / norm if norm > 0 else np.asarray(vector, dtype=np.float64)


def _scale_of(vector: np.ndarray, exact: bool) -> Any:
    if exact:
        for v in vector:
            if v != 0:
                return abs(v)
        return 0
    return float(np.linalg.norm(np.asarray(vector, dtype=np.float64)))


def _apply_layer(theta: Params, layer: int, perm: np.ndarray, lam: np.ndarray) -> Params:
    """Permuta y reescala solo la capa `layer` (λ indexado por la posición nueva)."""
    inv = np.argsort(perm)
    lam = theta.coerce(lam)
    W = theta.W(layer)[inv] * lam[:, None]
    b = theta.b(layer)[inv] * lam
    W_next = theta.W(layer + 1)[:, inv] / lam[None, :]
    return theta.with_layer(layer, W, b).with_layer(layer + 1, W_next)


class _SearchBudgetExceeded(Exception):
    pass


def check_ps_equivalent(theta: Params, theta_prime: Params, budget: int = DEFAULT_PS_SEARCH_BUDGET,
                        atol: float = 0.0, rtol: float = 1e-9) -> EquivalenceWitness:
    """
    Busca (π, λ) con rescale(permute(θ, π), λ) == θ' capa a capa. Las neuronas
    se emparejan solo si sus descriptores de dirección coinciden.
    """
    if theta.architecture != theta_prime.architecture:
        return EquivalenceWitness(EquivalenceKind.NONE, reason="arquitecturas distintas")
    admissibility = is_admissible(theta, atol)
    if not admissibility:
        return EquivalenceWitness(EquivalenceKind.UNDECIDABLE,
                                  reason=f"θ no es admisible: {admissibility.offending_neurons}")
    exact = theta.is_exact and theta_prime.is_exact
    if not exact:
        theta, theta_prime = theta.to_float(), theta_prime.to_float()
        atol = atol or 1e-12
    L = theta.depth
    if not _same(theta.b(L), theta_prime.b(L), exact, rtol, atol):
        return EquivalenceWitness(EquivalenceKind.NONE, reason="sesgos de salida distintos")

    arch = theta.architecture
    match_tol = max(rtol, 1e-12) * 10
    counter = [0]

    def candidates(current: Params, layer: int) -> List[List[int]]:
        mine = [_descriptor(current.incoming((layer, i)), exact) for i in range(arch.widths[layer])]
        theirs = [_descriptor(theta_prime.incoming((layer, j)), exact) for j in range(arch.widths[layer])]
        out = []
        for d in mine:
            if exact:
                out.append([j for j, e in enumerate(theirs) if np.array_equal(d, e)])
            else:
                out.append([j for j, e in enumerate(theirs) if np.linalg.norm(d - e) <= match_tol])
        return out

    def assignments(options: List[List[int]]) -> Iterator[List[int]]:
        chosen: List[int] = []
        used = set()

        def rec(i: int) -> Iterator[List[int]]:
            if i == len(options):
                yield list(chosen)
                return
            for j in options[i]:
                if j not in used:
                    used.add(j)
                    chosen.append(j)
                    yield from rec(i + 1)
                    chosen.pop()
                    used.discard(j)

        yield from rec(0)

    def search(current: Params, layer: int, perms: List[np.ndarray],
               lams: List[np.ndarray]) -> Optional[Tuple[List[np.ndarray], List[np.ndarray]]]:
        if layer == L:
            if _same(current.W(L), theta_prime.W(L), exact, rtol, atol):
                return perms, lams
            return None
        options = candidates(current, layer)
        if any(not o for o in options):
            return None
        for assignment in assignments(options):
            counter[0] += 1
            if counter[0] > budget:
                raise _SearchBudgetExceeded()
            perm = np.array(assignment, dtype=np.int64)
            lam = np.empty(len(perm), dtype=object)
            for i, j in enumerate(assignment):
                lam[j] = _scale_of(theta_prime.incoming((layer, j)), exact) / _scale_of(current.incoming((layer, i)), exact)
            candidate = _apply_layer(current, layer, perm, lam)
            if not _same(candidate.W(layer), theta_prime.W(layer), exact, rtol, atol) or \
                    not _same(candidate.b(layer), theta_prime.b(layer), exact, rtol, atol):
                continue
            found = search(candidate, layer + 1, perms + [perm], lams + [lam])
            if found is not None:
                return found
        return None

    try:
        found = search(theta, 1, [], [])
    except _SearchBudgetExceeded:
        logger.warning("búsqueda de permutaciones interrumpida tras %d candidatos", budget)
        return EquivalenceWitness(EquivalenceKind.INCONCLUSIVE, reason="presupuesto de búsqueda agotado",
                                  candidates_tried=budget)
    if found is None:
        return EquivalenceWitness(EquivalenceKind.NONE, reason="ninguna permutación compatible",
                                  candidates_tried=counter[0])
    pi = Permutation(tuple(found[0]))
    lam = Rescaling(tuple(theta.coerce(l) if exact else np.asarray(l, dtype=np.float64) for l in found[1]))
    if not _params_match(rescale(permute(theta, pi), lam), theta_prime, exact, rtol, atol):
        return EquivalenceWitness(EquivalenceKind.NONE, reason="verificación del testigo fallida",
                                  candidates_tried=counter[0])
    return EquivalenceWitness(EquivalenceKind.PS, permutation=pi, rescaling=lam, candidates_tried=counter[0])


def canonical_form(theta: Params, norm: Optional[str] = None) -> Params:
    """
    Representante de la clase S: capa a capa (de 1 a L-1) cada neurona se
    reescala por 1/‖(w_{•→ν}, b_ν)‖.

    Args:
        norm: "linf", "l1" o "l2". Por defecto "linf" en modo exacto (racional,
            así el representante sigue siendo exacto) y "l2" en coma flotante.
            "l2" en modo exacto lanza DomainError.
    """
    admissibility = is_admissible(theta)
    if not admissibility:
        raise DomainError("forma canónica indefinida para θ no admisible",
                          neurons=admissibility.offending_neurons)
    norm = norm or ("linf" if theta.is_exact else "l2")
    if theta.is_exact and norm == "l2":
        raise DomainError("la norma euclídea no es racional; usar 'linf' o 'l1' en modo exacto")
    current = theta
    for layer in theta.architecture.hidden_layers:
        width = theta.architecture.widths[layer]
        lam = np.empty(width, dtype=object)
        for i in range(width):
            vec = current.incoming((layer, i))
            if norm == "linf":
                size = max(abs(v) for v in vec)
            elif norm == "l1":
                size = sum(abs(v) for v in vec)
            else:
                size = float(np.linalg.norm(np.asarray(vec, dtype=np.float64)))
            lam[i] = 1 / size
        current = _apply_layer(current, layer, np.arange(width), lam)
    return current
