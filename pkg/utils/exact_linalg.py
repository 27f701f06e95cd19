#!/usr/bin/env python3
"""
ExactLinalg - Álgebra lineal racional exacta
Conversión a Fraction, eliminación gaussiana, rango y núcleo sin redondeo
"""

from fractions import Fraction
from numbers import Rational
from typing import Any, Iterable, List, Optional, Sequence

import numpy as np


def to_fraction(value: Any) -> Fraction:
    """Convierte un escalar (int, Fraction, float, "p/q") a Fraction exacta."""
    if isinstance(value, Fraction):
        return value
    if isinstance(value, (bool, np.bool_)):
        return Fraction(int(value))
    if isinstance(value, (int, np.integer)):
        return Fraction(int(value))
    if isinstance(value, Rational):
        return Fraction(value.numerator, value.denominator)
    if isinstance(value, str):
        return Fraction(value.strip())
    if isinstance(value, (float, np.floating)):
        if not np.isfinite(value):
            raise ValueError(f"valor no finito: {value}")
        # Fraction(float) es exacta: conserva el valor binario
        return Fraction(float(value))
    raise TypeError(f"tipo escalar no soportado: {type(value).__name__}")


def exact_array(values: Any) -> np.ndarray:
    """Array de objetos Fraction con la misma forma que `values`."""
    arr = np.asarray(values, dtype=object)
    out = np.empty(arr.shape, dtype=object)
    for idx in np.ndindex(arr.shape):
        out[idx] = to_fraction(arr[idx])
    return out


def float_array(values: Any) -> np.ndarray:
    return np.array(values, dtype=object).astype(np.float64)


def row_echelon(rows: Sequence[Sequence[Any]]) -> List[int]:
    """
    Reduce in situ una matriz racional (lista de listas) a forma escalonada.

    Returns:
        Lista de columnas pivote, en orden.
    """
    n_rows = len(rows)
    if n_rows == 0:
        return []
    n_cols = len(rows[0])
    pivots = []
    piv_r = 0
    for piv_c in range(n_cols):
        if piv_r >= n_rows:
            break
        for i_row in range(piv_r, n_rows):
            if rows[i_row][piv_c] != 0:
                break
        else:
            continue
        if i_row != piv_r:
            rows[piv_r], rows[i_row] = rows[i_row], rows[piv_r]
        fp = rows[piv_r][piv_c]
        for r in range(piv_r + 1, n_rows):
            fr = rows[r][piv_c]
            if fr == 0:
                continue
            frp = Fraction(fr) / fp
            for c in range(piv_c, n_cols):
                rows[r][c] -= rows[piv_r][c] * frp
        pivots.append(piv_c)
        piv_r += 1
    return pivots


def exact_rank(rows: Iterable[Sequence[Any]]) -> int:
    matrix = [[to_fraction(v) for v in row] for row in rows]
    return len(row_echelon(matrix))


def exact_nullspace(rows: Sequence[Sequence[Any]], n_cols: Optional[int] = None) -> List[List[Fraction]]:
    """Base racional del núcleo {x : A x = 0}."""
    matrix = [[to_fraction(v) for v in row] for row in rows]
    if n_cols is None:
        n_cols = len(matrix[0]) if matrix else 0
    if not matrix:
        return [[Fraction(int(i == j)) for j in range(n_cols)] for i in range(n_cols)]
    pivots = row_echelon(matrix)
    free = [c for c in range(n_cols) if c not in pivots]
    basis = []
    for f in free:
        sol = [Fraction(0)] * n_cols
        sol[f] = Fraction(1)
        for r in range(len(pivots) - 1, -1, -1):
            pc = pivots[r]
            s = sum((matrix[r][c] * sol[c] for c in range(pc + 1, n_cols)), Fraction(0))
            sol[pc] = -s / matrix[r][pc]
        basis.append(sol)
    return basis


class IncrementalReducer:
    """
    Mantiene una base escalonada racional y decide si un vector nuevo es
    independiente de los ya aceptados.
    """

    def __init__(self, dimension: int):
        self.dimension = dimension
        self._rows: List[List[Fraction]] = []
        self._pivots: List[int] = []

    @property
    def rank(self) -> int:
        return len(self._rows)

    def add(self, vector: Sequence[Any]) -> bool:
        """Añade el vector si es independiente. Devuelve True si aumentó el rango."""
        v = [to_fraction(x) for x in vector]
        for row, pc in zip(self._rows, self._pivots):
            if v[pc] != 0:
                factor = v[pc] / row[pc]
                v = [a - factor * b for a, b in zip(v, row)]
        for c, value in enumerate(v):
            if value != 0:
                self._rows.append(v)
                self._pivots.append(c)
                return True
        return False
