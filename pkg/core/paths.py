#!/usr/bin/env python3
"""
Paths - Conjuntos de caminos y embedding invariante Φ(θ)
Enumeración de P_ℓ y Q_ℓ, operador P, bloques Φ^i_η / Φ^h_η y las tres fórmulas de realización
"""

import logging
from dataclasses import dataclass
from typing import Any, Callable, Iterator, List, Optional, Sequence, Set, Tuple, Union

import numpy as np

from .errors import BudgetExceededError, UnsupportedDepthError
from .network import (Architecture, ParamKey, Params, forward, hidden_admissibility)

logger = logging.getLogger(__name__)

DEFAULT_PATH_BUDGET = 10 ** 7

Path = Tuple[int, Tuple[int, ...]]


class PathIndex:
    """
    Índice de caminos. P_ℓ (ℓ = 0..L) son los caminos desde la capa ℓ hasta la
    salida, Q_ℓ (ℓ = 1..L-1) los caminos desde la capa oculta ℓ hasta la capa
    L-1. Dentro de cada conjunto el orden es lexicográfico en los índices de
    neurona, que coincide con el orden C de un tensor de forma widths[ℓ:].
    """

    def __init__(self, arch: Architecture, budget: Optional[int] = None):
        self.arch = arch
        self.budget = DEFAULT_PATH_BUDGET if budget is None else int(budget)
        widths = arch.widths
        L = arch.depth
        self.p_counts = [int(np.prod(widths[l:], dtype=object)) for l in range(L + 1)]
        self.q_counts = [int(np.prod(widths[l:L], dtype=object)) for l in range(1, L)]
        total = sum(self.p_counts) + sum(self.q_counts)
        if total > self.budget:
            raise BudgetExceededError(
                f"la arquitectura {list(widths)} tiene {total} caminos, por encima del límite {self.budget}",
                count=total, limit=self.budget)
        self.p_offsets = [int(v) for v in np.concatenate([[0], np.cumsum(self.p_counts)[:-1]])]
        self.q_offsets = [int(v) for v in np.concatenate([[0], np.cumsum(self.q_counts)[:-1]])] if self.q_counts else []

    @property
    def n_paths(self) -> int:
        return sum(self.p_counts)

    @property
    def n_q(self) -> int:
        return sum(self.q_counts)

    @property
    def n_q1(self) -> int:
        return self.q_counts[0] if self.q_counts else 0

    def p_count(self, layer: int) -> int:
        return self.p_counts[layer]

    def q_count(self, layer: int) -> int:
        return self.q_counts[layer - 1]

    def paths(self) -> Iterator[Path]:
        """Todos los caminos de P en el orden del vector plano."""
        widths = self.arch.widths
        for l in range(self.arch.depth + 1):
            for idx in np.ndindex(*widths[l:]):
                yield l, tuple(int(i) for i in idx)

    def q_paths(self) -> Iterator[Path]:
        widths = self.arch.widths
        for l in self.arch.hidden_layers:
            for idx in np.ndindex(*widths[l:self.arch.depth]):
                yield l, tuple(int(i) for i in idx)

    def flat_position(self, path: Path) -> int:
        start, idx = path
        return self.p_offsets[start] + int(np.ravel_multi_index(idx, self.arch.widths[start:]))

    def key(self, path: Path) -> str:
        """Clave legible: "μ3->ν1.2->η0"; los caminos parciales llevan el prefijo "b:"."""
        start, idx = path
        L = self.arch.depth
        names = []
        for layer, i in zip(range(start, L + 1), idx):
            if layer == 0:
                names.append(f"μ{i}")
            elif layer == L:
                names.append(f"η{i}")
            else:
                names.append(f"ν{layer}.{i}")
        text = "->".join(names)
        return text if start == 0 else "b:" + text

    def keys(self) -> List[str]:
        return [self.key(p) for p in self.paths()]

    def parameters_of(self, path: Path) -> List[ParamKey]:
        """Parámetros que intervienen en el valor del camino (sesgo inicial incluido)."""
        start, idx = path
        keys = []
        if start > 0:
            keys.append(ParamKey("b", start, idx[0]))
        for k in range(1, len(idx)):
            layer = start + k
            keys.append(ParamKey("w", layer, idx[k], idx[k - 1]))
        return keys

    def input_block_indices(self, eta: int) -> np.ndarray:
        """Posiciones planas del bloque Φ^i_η, matriz |Q_1| × N_0: [q, μ] → camino μ→q→η."""
        self._require_hidden()
        widths = self.arch.widths
        grid = np.arange(self.p_counts[0]).reshape(widths)
        return grid[..., eta].reshape(widths[0], self.n_q1).T.copy()

    def hidden_block_indices(self, eta: int) -> np.ndarray:
        """Posiciones planas del bloque Φ^h_η: caminos q→η para q ∈ Q y, al final, (η)."""
        self._require_hidden()
        widths = self.arch.widths
        L = self.arch.depth
        parts = []
        for l in range(1, L):
            grid = self.p_offsets[l] + np.arange(self.p_counts[l]).reshape(widths[l:])
            parts.append(grid[..., eta].reshape(-1))
        parts.append(np.array([self.p_offsets[L] + eta]))
        return np.concatenate(parts)

    def _require_hidden(self) -> None:
        if self.arch.depth < 2:
            raise UnsupportedDepthError("los bloques Φ^i/Φ^h requieren al menos una capa oculta (L >= 2)")


def enumerate_paths(arch: Architecture, budget: Optional[int] = None) -> PathIndex:
    return PathIndex(arch, budget)


def _path_tensors(weights: Sequence[np.ndarray], biases: Sequence[np.ndarray],
                  combine: Callable[[Any, Any], Any], unit: Any, n_inputs: int) -> List[np.ndarray]:
    """
    T_ℓ de forma widths[ℓ:]: combinación (producto o suma) de los parámetros de
    cada camino que empieza en la capa ℓ.
    """
    L = len(weights)
    tensors = []
    for start in range(L + 1):
        if start == 0:
            T = np.empty(n_inputs, dtype=object)
            T[:] = unit
        else:
            T = np.asarray(biases[start - 1], dtype=object)
        for layer in range(start + 1, L + 1):
            T = combine(T[..., None], np.asarray(weights[layer - 1], dtype=object).T)
        tensors.append(T)
    return tensors


@dataclass(frozen=True)
class Embedding:
    """Φ(θ) plano sobre P y sus bloques por neurona de salida (vistas del mismo vector)."""

    phi: np.ndarray
    index: PathIndex
    input_blocks: Tuple[np.ndarray, ...]
    hidden_blocks: Tuple[np.ndarray, ...]

    def __post_init__(self):
        if self.phi.shape != (self.index.n_paths,):
            raise ValueError("phi no coincide con el índice de caminos")
        if self.index.arch.depth >= 2:
            for blk_i, blk_h in zip(self.input_blocks, self.hidden_blocks):
                if (blk_i.shape != (self.index.n_q1, self.index.arch.n_inputs)
                        or blk_h.shape != (self.index.n_q + 1,)):
                    raise ValueError("bloques de forma inconsistente con el índice de caminos")

    @property
    def keys(self) -> List[str]:
        return self.index.keys()


def _blocks(phi: np.ndarray, index: PathIndex) -> Tuple[Tuple[np.ndarray, ...], Tuple[np.ndarray, ...]]:
    if index.arch.depth < 2:
        return (), ()
    n_out = index.arch.n_outputs
    return (tuple(phi[index.input_block_indices(eta)] for eta in range(n_out)),
            tuple(phi[index.hidden_block_indices(eta)] for eta in range(n_out)))


def embed(theta: Params, budget: Optional[int] = None) -> Embedding:
    """Φ(θ): producto de los pesos de cada camino, por el sesgo inicial en los parciales."""
    index = PathIndex(theta.architecture, budget)
    tensors = _path_tensors(theta.weights, theta.biases, np.multiply, theta.one(),
                            theta.architecture.n_inputs)
    phi = np.concatenate([T.reshape(-1) for T in tensors])
    if not theta.is_exact:
        phi = phi.astype(np.float64)
    input_blocks, hidden_blocks = _blocks(phi, index)
    return Embedding(phi, index, input_blocks, hidden_blocks)


def apply_P(u: Union[Params, Sequence[Any]], arch: Optional[Architecture] = None) -> np.ndarray:
    """(Pu)_p = suma de u_e sobre el camino, incluido el sesgo de la neurona inicial."""
    if not isinstance(u, Params):
        u = Params.from_vector(arch, u)
    tensors = _path_tensors(u.weights, u.biases, np.add, u.zero(), u.architecture.n_inputs)
    out = np.concatenate([T.reshape(-1) for T in tensors])
    return out if u.is_exact else out.astype(np.float64)


def path_activations(statuses: Sequence[np.ndarray], arch: Architecture) -> np.ndarray:
    """ᾱ: productos de estados a lo largo de cada q ∈ Q, con un 1 final."""
    L = arch.depth
    parts = []
    for start in range(1, L):
        A = np.asarray(statuses[start - 1], dtype=np.int64)
        for layer in range(start + 1, L):
            A = A[..., None] * np.asarray(statuses[layer - 1], dtype=np.int64)
        parts.append(A.reshape(-1))
    parts.append(np.ones(1, dtype=np.int64))
    return np.concatenate(parts)


def algebraic_realization(theta: Params, x: Any) -> np.ndarray:
    """R_θ(x) = (Π W_ℓ I_{ℓ-1}) x + Σ_{ℓ'} (Π_{ℓ>ℓ'} W_ℓ I_{ℓ-1}) b_{ℓ'}, con I_0 = Id."""
    _, trace = forward(theta, x)
    L = theta.depth
    x_vec = trace.post_activations[0]
    M = np.identity(theta.architecture.n_outputs, dtype=object if theta.is_exact else np.float64)
    if theta.is_exact:
        M = theta.coerce(M)
    result = M.dot(theta.b(L))
    for lp in range(L - 1, -1, -1):
        M = M.dot(theta.W(lp + 1))
        if lp >= 1:
            M = M * trace.statuses[lp - 1][None, :]
        result = result + M.dot(x_vec if lp == 0 else theta.b(lp))
    return result


def embedding_realization(theta: Params, x: Any, embedding: Optional[Embedding] = None) -> np.ndarray:
    """R_η(x) = ⟨Qᾱ, Φ^i_η x⟩ + ⟨ᾱ, Φ^h_η⟩ para cada salida η."""
    if theta.depth < 2:
        raise UnsupportedDepthError("la fórmula por bloques requiere L >= 2")
    if embedding is None:
        embedding = embed(theta)
    _, trace = forward(theta, x)
    x_vec = trace.post_activations[0]
    alpha_bar = path_activations(trace.statuses, theta.architecture)
    q_alpha = alpha_bar[:embedding.index.n_q1]
    out = [q_alpha.dot(blk_i.dot(x_vec)) + alpha_bar.dot(blk_h)
           for blk_i, blk_h in zip(embedding.input_blocks, embedding.hidden_blocks)]
    return theta.coerce(out)


def linear_form(theta: Params, x: Any, index: Optional[PathIndex] = None) -> np.ndarray:
    """Matriz L_{θ,x} de forma N_L × |P| con R_θ(x) = L_{θ,x} · Φ(θ)."""
    arch = theta.architecture
    if index is None:
        index = PathIndex(arch)
    _, trace = forward(theta, x)
    x_vec = trace.post_activations[0]
    form = np.empty((arch.n_outputs, index.n_paths), dtype=object)
    form[:] = theta.zero()
    if arch.depth == 1:
        grid = np.arange(index.p_counts[0]).reshape(arch.widths)
        for eta in range(arch.n_outputs):
            form[eta, grid[:, eta]] = x_vec
            form[eta, index.p_offsets[1] + eta] = theta.one()
    else:
        alpha_bar = path_activations(trace.statuses, arch)
        q_alpha = alpha_bar[:index.n_q1]
        for eta in range(arch.n_outputs):
            form[eta, index.input_block_indices(eta)] = np.outer(q_alpha, x_vec)
            form[eta, index.hidden_block_indices(eta)] = alpha_bar
    return form if theta.is_exact else form.astype(np.float64)


def evaluate_linear_form(theta: Params, x: Any, phi: np.ndarray) -> np.ndarray:
    """L_{θ,x} · φ: realización en x de cualquier θ' con Φ(θ') = φ y los estados de θ."""
    return linear_form(theta, x).dot(phi)


@dataclass(frozen=True)
class SupportReport:
    admissible: bool
    inclusion_holds: bool
    equality_holds: bool
    inclusion_violations: Tuple[ParamKey, ...]
    equality_violations: Tuple[ParamKey, ...]
    support_size: int
    covered_size: int

    @property
    def verified(self) -> bool:
        """Igualdad si θ es admisible, inclusión en otro caso."""
        return self.equality_holds if self.admissible else self.inclusion_holds

    @property
    def violations(self) -> Tuple[ParamKey, ...]:
        return self.equality_violations if self.admissible else self.inclusion_violations


def support_check(theta: Params, atol: float = 0.0) -> SupportReport:
    """Compara supp(θ) con la unión de los parámetros de los caminos de supp(Φ(θ))."""
    embedding = embed(theta)
    index = embedding.index
    covered: Set[ParamKey] = set()
    for path, value in zip(index.paths(), embedding.phi):
        if value != 0:
            covered.update(index.parameters_of(path))
    support = {key for key in theta.parameter_index() if theta.value(key) != 0}
    admissible = not hidden_admissibility(theta, atol)
    inclusion_violations = tuple(sorted(covered - support))
    equality_violations = tuple(sorted(support - covered)) + inclusion_violations
    return SupportReport(
        admissible=admissible,
        inclusion_holds=not inclusion_violations,
        equality_holds=not equality_violations,
        inclusion_violations=inclusion_violations,
        equality_violations=equality_violations,
        support_size=len(support),
        covered_size=len(covered),
    )
