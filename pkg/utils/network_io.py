#!/usr/bin/env python3
"""
NetworkIO - Lectura y escritura de redes en JSON
Racionales como "p/q", flotantes con la representación más corta que recupera el valor
"""

import json
import logging
import os
from fractions import Fraction
from typing import Any, Dict, List, Tuple

import numpy as np

from core.errors import MalformedInputError, ShapeError
from core.network import Params, ScalarMode

logger = logging.getLogger(__name__)

FORMAT_NAME = "relu-network"
FORMAT_VERSION = 1


def format_scalar(value: Any, exact: bool) -> Any:
    if exact:
        value = Fraction(value)
        return f"{value.numerator}/{value.denominator}"
    return float(value)


def parse_scalar(value: Any, exact: bool) -> Any:
    """Admite enteros, flotantes y cadenas "p/q" (o enteros en cadena)."""
    if isinstance(value, bool) or value is None:
        raise MalformedInputError(f"entrada numérica no válida: {value!r}")
    try:
        if isinstance(value, str):
            parsed = Fraction(value.strip())
        elif isinstance(value, int):
            parsed = Fraction(value)
        elif isinstance(value, float):
            if not np.isfinite(value):
                raise MalformedInputError(f"valor no finito: {value!r}")
            parsed = Fraction(repr(value)) if exact else value
        else:
            raise MalformedInputError(f"entrada numérica no válida: {value!r}")
    except (ValueError, ZeroDivisionError) as e:
        raise MalformedInputError(f"entrada numérica no válida: {value!r} ({e})")
    return parsed if exact else float(parsed)


def params_to_dict(theta: Params) -> Dict[str, Any]:
    exact = theta.is_exact
    return {
        "format": FORMAT_NAME,
        "version": FORMAT_VERSION,
        "scalar_mode": theta.scalar_mode.value,
        "widths": list(theta.architecture.widths),
        "layers": [
            {"W": [[format_scalar(v, exact) for v in row] for row in W],
             "b": [format_scalar(v, exact) for v in b]}
            for W, b in zip(theta.weights, theta.biases)
        ],
    }


def _matrix(raw: Any, exact: bool, where: str) -> List[List[Any]]:
    if not isinstance(raw, list) or not all(isinstance(row, list) for row in raw):
        raise MalformedInputError(f"{where}: W debe ser una lista de filas")
    return [[parse_scalar(v, exact) for v in row] for row in raw]


def params_from_dict(document: Dict[str, Any]) -> Params:
    if not isinstance(document, dict):
        raise MalformedInputError("el documento de red debe ser un objeto JSON")
    if document.get("format", FORMAT_NAME) != FORMAT_NAME:
        raise MalformedInputError(f"formato desconocido: {document.get('format')!r}")
    try:
        mode = ScalarMode(document.get("scalar_mode", ScalarMode.EXACT.value))
    except ValueError:
        raise MalformedInputError(f"scalar_mode no válido: {document.get('scalar_mode')!r}")
    layers = document.get("layers")
    if not isinstance(layers, list) or not layers:
        raise MalformedInputError("falta la lista 'layers'")
    exact = mode is ScalarMode.EXACT
    weights, biases = [], []
    for l, layer in enumerate(layers, start=1):
        if not isinstance(layer, dict) or "W" not in layer or "b" not in layer:
            raise MalformedInputError(f"capa {l}: se esperan las claves 'W' y 'b'")
        rows = _matrix(layer["W"], exact, f"capa {l}")
        if len({len(r) for r in rows}) > 1:
            raise ShapeError(f"capa {l}: filas de W con longitudes distintas")
        if not isinstance(layer["b"], list):
            raise MalformedInputError(f"capa {l}: b debe ser una lista")
        weights.append(np.array(rows, dtype=object).reshape(len(rows), len(rows[0]) if rows else 0))
        biases.append(np.array([parse_scalar(v, exact) for v in layer["b"]], dtype=object))
    theta = Params(tuple(weights), tuple(biases), mode)
    widths = document.get("widths")
    if widths is not None and list(widths) != list(theta.architecture.widths):
        raise ShapeError(f"'widths' = {widths} no coincide con las capas {list(theta.architecture.widths)}")
    return theta


def load_document(path: str) -> Dict[str, Any]:
    if not os.path.exists(path):
        raise MalformedInputError(f"no existe el archivo {path}")
    try:
        with open(path, 'r', encoding='utf-8') as f:
            return json.load(f)
    except json.JSONDecodeError as e:
        raise MalformedInputError(f"{path}: JSON mal formado ({e})")


def load_network(path: str) -> Tuple[Params, Dict[str, Any]]:
    """Devuelve los parámetros y el documento leído (para calcular su huella)."""
    document = load_document(path)
    return params_from_dict(document), document


def save_network(theta: Params, path: str) -> None:
    with open(path, 'w', encoding='utf-8') as f:
        json.dump(params_to_dict(theta), f, indent=2, ensure_ascii=False)
        f.write("\n")
    logger.debug("red guardada en %s", path)


def round_params(theta: Params, quantum: Any = Fraction(1, 10 ** 8)) -> Params:
    """Parámetros exactos con cada entrada redondeada al múltiplo de `quantum` más cercano."""
    q = Fraction(repr(quantum)) if isinstance(quantum, float) else Fraction(quantum)
    if q <= 0:
        raise ValueError(f"el cuanto debe ser positivo, se recibió {quantum}")

    def snap(values: np.ndarray) -> np.ndarray:
        out = np.empty(values.shape, dtype=object)
        for idx in np.ndindex(values.shape):
            out[idx] = round(Fraction(values[idx]) / q) * q
        return out

    return Params(tuple(snap(W) for W in theta.weights), tuple(snap(b) for b in theta.biases), ScalarMode.EXACT)
