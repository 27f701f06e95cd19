#!/usr/bin/env python3
"""
Network - Modelo de datos de redes ReLU totalmente conectadas
Arquitectura, parámetros exactos o float64, conjuntos de restricciones y evaluación con traza
"""

import logging
from dataclasses import dataclass, field
from enum import Enum
from fractions import Fraction
from typing import Any, Iterable, List, NamedTuple, Optional, Sequence, Tuple

import numpy as np

from utils.exact_linalg import exact_array, float_array
from .errors import DomainError, ShapeError

logger = logging.getLogger(__name__)

Neuron = Tuple[int, int]


class ScalarMode(str, Enum):
    EXACT = "exact"
    FLOAT = "float"


class ParamKey(NamedTuple):
    """Nombre de un parámetro: peso ("w", capa, fila, columna) o sesgo ("b", capa, fila, -1)."""

    kind: str
    layer: int
    row: int
    col: int = -1

    def label(self) -> str:
        if self.kind == "b":
            return f"b[{self.layer}][{self.row}]"
        return f"w[{self.layer}][{self.row},{self.col}]"


@dataclass(frozen=True)
class Architecture:
    """Anchos N_0, ..., N_L de las capas. H son las capas 1..L-1."""

    widths: Tuple[int, ...]

    def __post_init__(self):
        widths = tuple(int(w) for w in self.widths)
        if len(widths) < 2:
            raise ShapeError("una arquitectura necesita al menos capa de entrada y de salida",
                             widths=list(widths))
        if any(w < 1 for w in widths):
            raise ShapeError("todos los anchos deben ser positivos", widths=list(widths))
        object.__setattr__(self, "widths", widths)

    @property
    def depth(self) -> int:
        return len(self.widths) - 1

    @property
    def n_inputs(self) -> int:
        return self.widths[0]

    @property
    def n_outputs(self) -> int:
        return self.widths[-1]

    @property
    def hidden_layers(self) -> range:
        return range(1, self.depth)

    @property
    def hidden_neurons(self) -> List[Neuron]:
        return [(layer, i) for layer in self.hidden_layers for i in range(self.widths[layer])]

    @property
    def n_hidden(self) -> int:
        return sum(self.widths[1:-1])

    def hidden_position(self, neuron: Neuron) -> int:
        """Posición de la neurona en el vector de estados sobre H."""
        layer, index = neuron
        if layer not in self.hidden_layers or not 0 <= index < self.widths[layer]:
            raise DomainError(f"la neurona {neuron} no es oculta")
        return sum(self.widths[1:layer]) + index


def _freeze(arr: np.ndarray) -> np.ndarray:
    arr.setflags(write=False)
    return arr


@dataclass(frozen=True, eq=False)
class Params:
    """
    Parámetros θ de la red: W_ℓ de forma N_ℓ × N_{ℓ-1} y b_ℓ de longitud N_ℓ,
    ℓ = 1..L (weights[ℓ-1] es W_ℓ). En modo exacto las entradas son Fraction.
    """

    weights: Tuple[np.ndarray, ...]
    biases: Tuple[np.ndarray, ...]
    scalar_mode: ScalarMode = ScalarMode.EXACT
    architecture: Architecture = field(init=False)

    def __post_init__(self):
        mode = ScalarMode(self.scalar_mode)
        if len(self.weights) != len(self.biases) or not self.weights:
            raise ShapeError("se necesita el mismo número (>= 1) de matrices y de sesgos",
                             weights=len(self.weights), biases=len(self.biases))
        convert = exact_array if mode is ScalarMode.EXACT else float_array
        weights, biases = [], []
        for layer, (w, b) in enumerate(zip(self.weights, self.biases), start=1):
            w_arr = convert(w)
            b_arr = convert(b)
            if w_arr.ndim != 2 or b_arr.ndim != 1:
                raise ShapeError(f"capa {layer}: W debe ser matriz y b vector")
            if w_arr.shape[0] != b_arr.shape[0]:
                raise ShapeError(f"capa {layer}: W tiene {w_arr.shape[0]} filas y b {b_arr.shape[0]} entradas")
            if weights and w_arr.shape[1] != weights[-1].shape[0]:
                raise ShapeError(f"capa {layer}: se esperaban {weights[-1].shape[0]} columnas, hay {w_arr.shape[1]}")
            weights.append(_freeze(w_arr))
            biases.append(_freeze(b_arr))
        widths = (weights[0].shape[1],) + tuple(w.shape[0] for w in weights)
        object.__setattr__(self, "weights", tuple(weights))
        object.__setattr__(self, "biases", tuple(biases))
        object.__setattr__(self, "scalar_mode", mode)
        object.__setattr__(self, "architecture", Architecture(widths))

    # -- construcción --------------------------------------------------

    @classmethod
    def from_lists(cls, weights: Sequence[Any], biases: Sequence[Any],
                   scalar_mode: ScalarMode = ScalarMode.EXACT) -> "Params":
        return cls(tuple(np.array(w, dtype=object) for w in weights),
                   tuple(np.array(b, dtype=object) for b in biases), scalar_mode)

    @classmethod
    def zeros(cls, widths: Sequence[int], scalar_mode: ScalarMode = ScalarMode.EXACT) -> "Params":
        arch = Architecture(tuple(widths))
        ws = [np.zeros((arch.widths[l], arch.widths[l - 1]), dtype=int) for l in range(1, arch.depth + 1)]
        bs = [np.zeros(arch.widths[l], dtype=int) for l in range(1, arch.depth + 1)]
        return cls(tuple(ws), tuple(bs), scalar_mode)

    @classmethod
    def from_vector(cls, arch: Architecture, vector: Sequence[Any],
                    scalar_mode: ScalarMode = ScalarMode.EXACT) -> "Params":
        """Inversa de `as_vector`: pesos por capa en orden fila mayor y luego sesgos."""
        vector = list(vector)
        ws, bs, pos = [], [], 0
        for l in range(1, arch.depth + 1):
            rows, cols = arch.widths[l], arch.widths[l - 1]
            ws.append(np.array(vector[pos:pos + rows * cols], dtype=object).reshape(rows, cols))
            pos += rows * cols
            bs.append(np.array(vector[pos:pos + rows], dtype=object))
            pos += rows
        if pos != len(vector):
            raise ShapeError(f"vector de longitud {len(vector)}, se esperaban {pos}")
        return cls(tuple(ws), tuple(bs), scalar_mode)

    def replace(self, weights: Optional[Sequence[np.ndarray]] = None,
                biases: Optional[Sequence[np.ndarray]] = None) -> "Params":
        return Params(tuple(weights) if weights is not None else self.weights,
                      tuple(biases) if biases is not None else self.biases,
                      self.scalar_mode)

    def with_layer(self, layer: int, W: Optional[np.ndarray] = None, b: Optional[np.ndarray] = None) -> "Params":
        weights, biases = list(self.weights), list(self.biases)
        if W is not None:
            weights[layer - 1] = W
        if b is not None:
            biases[layer - 1] = b
        return Params(tuple(weights), tuple(biases), self.scalar_mode)

    def to_float(self) -> "Params":
        if self.scalar_mode is ScalarMode.FLOAT:
            return self
        return Params(self.weights, self.biases, ScalarMode.FLOAT)

    def to_exact(self) -> "Params":
        if self.scalar_mode is ScalarMode.EXACT:
            return self
        return Params(self.weights, self.biases, ScalarMode.EXACT)

    # -- acceso ----------------------------------------------------------

    @property
    def is_exact(self) -> bool:
        return self.scalar_mode is ScalarMode.EXACT

    @property
    def depth(self) -> int:
        return self.architecture.depth

    def W(self, layer: int) -> np.ndarray:
        return self.weights[layer - 1]

    def b(self, layer: int) -> np.ndarray:
        return self.biases[layer - 1]

    def incoming(self, neuron: Neuron) -> np.ndarray:
        """Vector extendido (w_{•→ν}, b_ν)."""
        layer, i = neuron
        return np.concatenate([self.W(layer)[i], self.b(layer)[i:i + 1]])

    def incoming_weights(self, neuron: Neuron) -> np.ndarray:
        layer, i = neuron
        return self.W(layer)[i]

    def outgoing(self, neuron: Neuron) -> np.ndarray:
        """Vector w_{ν→•} de pesos salientes."""
        layer, i = neuron
        return self.W(layer + 1)[:, i]

    def zero(self) -> Any:
        return Fraction(0) if self.is_exact else 0.0

    def one(self) -> Any:
        return Fraction(1) if self.is_exact else 1.0

    def coerce(self, values: Any) -> np.ndarray:
        """Convierte valores al modo escalar de estos parámetros."""
        return exact_array(values) if self.is_exact else float_array(values)

    def parameter_index(self) -> List[ParamKey]:
        keys = []
        for l in range(1, self.depth + 1):
            rows, cols = self.W(l).shape
            keys.extend(ParamKey("w", l, i, j) for i in range(rows) for j in range(cols))
            keys.extend(ParamKey("b", l, i) for i in range(rows))
        return keys

    def as_vector(self) -> np.ndarray:
        parts = []
        for W, b in zip(self.weights, self.biases):
            parts.append(W.reshape(-1))
            parts.append(b)
        return np.concatenate(parts)

    def value(self, key: ParamKey) -> Any:
        if key.kind == "b":
            return self.b(key.layer)[key.row]
        return self.W(key.layer)[key.row, key.col]

    # -- comparación -----------------------------------------------------

    def __eq__(self, other: object) -> bool:
        if not isinstance(other, Params):
            return NotImplemented
        if self.architecture != other.architecture or self.scalar_mode != other.scalar_mode:
            return False
        return all(np.array_equal(a, b) for a, b in zip(self.weights + self.biases,
                                                         other.weights + other.biases))

    __hash__ = None  # type: ignore[assignment]

    def allclose(self, other: "Params", rtol: float = 1e-9, atol: float = 1e-12) -> bool:
        if self.architecture != other.architecture:
            return False
        mine, theirs = self.to_float(), other.to_float()
        return all(np.allclose(a, b, rtol=rtol, atol=atol)
                   for a, b in zip(mine.weights + mine.biases, theirs.weights + theirs.biases))

    def max_abs_difference(self, other: "Params") -> float:
        return float(np.max(np.abs(self.to_float().as_vector() - other.to_float().as_vector())))


@dataclass(frozen=True)
class ForwardTrace:
    """Pre-activaciones z_ℓ (ℓ=1..L), post-activaciones y_ℓ (ℓ=0..L-1) y estados sobre H."""

    pre_activations: Tuple[np.ndarray, ...]
    post_activations: Tuple[np.ndarray, ...]
    statuses: Tuple[np.ndarray, ...]

    @property
    def hidden_statuses(self) -> np.ndarray:
        if not self.statuses:
            return np.zeros(0, dtype=np.int8)
        return np.concatenate(self.statuses)

    def z(self, layer: int) -> np.ndarray:
        return self.pre_activations[layer - 1]

    def hidden_pre_activations(self) -> np.ndarray:
        hidden = self.pre_activations[:-1]
        if not hidden:
            return np.zeros(0, dtype=object)
        return np.concatenate(hidden)


def _positive(z: np.ndarray) -> np.ndarray:
    if z.dtype != object:
        return z > 0
    return np.array([v > 0 for v in z.flat], dtype=bool).reshape(z.shape)


def _coerce_input(theta: Params, x: Any) -> np.ndarray:
    try:
        arr = theta.coerce(np.atleast_1d(np.asarray(x, dtype=object)))
    except (TypeError, ValueError) as e:
        raise ShapeError(f"entrada no válida: {e}")
    if arr.ndim != 1 or arr.shape[0] != theta.architecture.n_inputs:
        raise ShapeError(f"la entrada tiene forma {arr.shape}, se esperaba ({theta.architecture.n_inputs},)")
    return arr


def forward(theta: Params, x: Any) -> Tuple[np.ndarray, ForwardTrace]:
    """Realización R_θ(x) junto con la traza completa."""
    y = _coerce_input(theta, x)
    zero = theta.zero()
    pre, post, statuses = [], [y], []
    for layer in range(1, theta.depth + 1):
        z = theta.W(layer).dot(y) + theta.b(layer)
        pre.append(z)
        if layer < theta.depth:
            active = _positive(z)
            statuses.append(active.astype(np.int8))
            y = np.where(active, z, zero)
            post.append(y)
    return pre[-1], ForwardTrace(tuple(pre), tuple(post), tuple(statuses))


def realize(theta: Params, x: Any) -> np.ndarray:
    return forward(theta, x)[0]


def forward_batch(theta: Params, X: Any) -> np.ndarray:
    """Evaluación vectorizada en float64 de un lote X de forma (n, N_0)."""
    params = theta.to_float()
    Y = np.atleast_2d(np.asarray(X, dtype=np.float64))
    if Y.shape[1] != params.architecture.n_inputs:
        raise ShapeError(f"el lote tiene {Y.shape[1]} columnas, se esperaban {params.architecture.n_inputs}")
    for layer in range(1, params.depth + 1):
        Y = Y @ params.W(layer).T + params.b(layer)
        if layer < params.depth:
            Y = np.maximum(Y, 0.0)
    return Y


def batch_hidden_pre_activations(theta: Params, X: Any) -> List[np.ndarray]:
    """Pre-activaciones float64 de las capas ocultas para un lote, una matriz (n, N_ℓ) por capa."""
    params = theta.to_float()
    Y = np.atleast_2d(np.asarray(X, dtype=np.float64))
    if Y.shape[1] != params.architecture.n_inputs:
        raise ShapeError(f"el lote tiene {Y.shape[1]} columnas, se esperaban {params.architecture.n_inputs}")
    hidden = []
    for layer in range(1, params.depth):
        Z = Y @ params.W(layer).T + params.b(layer)
        hidden.append(Z)
        Y = np.maximum(Z, 0.0)
    return hidden


def activation_pattern(theta: Params, x: Any) -> np.ndarray:
    """Vector binario a(θ,x) sobre H: 1 si z_ν > 0."""
    return forward(theta, x)[1].hidden_statuses


class XContStatus(str, Enum):
    INSIDE = "inside"
    BOUNDARY_SUSPECT = "boundary-suspect"


def hidden_margin(theta: Params, x: Any) -> Optional[Any]:
    """min_ν |z_ν(θ,x)| sobre H, o None si no hay capas ocultas."""
    z = forward(theta, x)[1].hidden_pre_activations()
    if z.size == 0:
        return None
    return min(abs(v) for v in z)


def in_xcont(theta: Params, x: Any, margin: float) -> XContStatus:
    """Condición suficiente para x ∈ X_θ: todas las |z_ν| superan el margen."""
    if not margin > 0:
        raise DomainError(f"el margen debe ser positivo, se recibió {margin}")
    m = hidden_margin(theta, x)
    if m is None or m > margin:
        return XContStatus.INSIDE
    return XContStatus.BOUNDARY_SUSPECT


class ConstraintKind(str, Enum):
    UNCONSTRAINED = "unconstrained"
    ZERO_OUTPUT_BIAS = "zero-output-bias"
    ZERO_ALL_BIAS = "zero-all-bias"
    SPARSITY_MASK = "sparsity-mask"


@dataclass(frozen=True)
class ConstraintSet:
    """Conjunto Θ de parámetros admitidos. En las máscaras, True marca una entrada libre."""

    kind: ConstraintKind = ConstraintKind.UNCONSTRAINED
    weight_masks: Optional[Tuple[np.ndarray, ...]] = None
    bias_masks: Optional[Tuple[np.ndarray, ...]] = None

    @classmethod
    def unconstrained(cls) -> "ConstraintSet":
        return cls(ConstraintKind.UNCONSTRAINED)

    @classmethod
    def zero_output_bias(cls) -> "ConstraintSet":
        return cls(ConstraintKind.ZERO_OUTPUT_BIAS)

    @classmethod
    def zero_all_bias(cls) -> "ConstraintSet":
        return cls(ConstraintKind.ZERO_ALL_BIAS)

    @classmethod
    def sparsity(cls, weight_masks: Sequence[Any], bias_masks: Sequence[Any]) -> "ConstraintSet":
        return cls(ConstraintKind.SPARSITY_MASK,
                   tuple(np.asarray(m, dtype=bool) for m in weight_masks),
                   tuple(np.asarray(m, dtype=bool) for m in bias_masks))

    def _is_free(self, key: ParamKey, depth: int) -> bool:
        if self.kind is ConstraintKind.UNCONSTRAINED:
            return True
        if self.kind is ConstraintKind.ZERO_OUTPUT_BIAS:
            return not (key.kind == "b" and key.layer == depth)
        if self.kind is ConstraintKind.ZERO_ALL_BIAS:
            return key.kind != "b"
        if key.kind == "b":
            return bool(self.bias_masks[key.layer - 1][key.row])
        return bool(self.weight_masks[key.layer - 1][key.row, key.col])

    def violations(self, theta: Params) -> List[ParamKey]:
        """Entradas que deberían ser nulas y no lo son."""
        if self.kind is ConstraintKind.SPARSITY_MASK:
            self._check_mask_shapes(theta)
        return [key for key in theta.parameter_index()
                if not self._is_free(key, theta.depth) and theta.value(key) != 0]

    def satisfied_by(self, theta: Params) -> bool:
        return not self.violations(theta)

    @property
    def forces_zero_output_bias(self) -> bool:
        return self.kind in (ConstraintKind.ZERO_OUTPUT_BIAS, ConstraintKind.ZERO_ALL_BIAS)

    def admits_bias_shift(self, theta: Params, neurons: Iterable[Neuron]) -> bool:
        """True si perturbar solo los sesgos de estas neuronas mantiene θ dentro de Θ."""
        if not self.satisfied_by(theta):
            return False
        return all(self._is_free(ParamKey("b", layer, i), theta.depth) for layer, i in neurons)

    def _check_mask_shapes(self, theta: Params) -> None:
        for l in range(1, theta.depth + 1):
            if (self.weight_masks[l - 1].shape != theta.W(l).shape
                    or self.bias_masks[l - 1].shape != theta.b(l).shape):
                raise ShapeError(f"la máscara de la capa {l} no coincide con la arquitectura")


def hidden_admissibility(theta: Params, atol: float = 0.0) -> List[Tuple[Neuron, str]]:
    """Neuronas ocultas con vector entrante o saliente nulo (|·| <= atol)."""
    offending = []
    for neuron in theta.architecture.hidden_neurons:
        if all(abs(v) <= atol for v in theta.incoming_weights(neuron)):
            offending.append((neuron, "incoming"))
        if all(abs(v) <= atol for v in theta.outgoing(neuron)):
            offending.append((neuron, "outgoing"))
    return offending
