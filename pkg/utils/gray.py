#!/usr/bin/env python3
"""
Gray - Enumeración de subconjuntos en código Gray
Cada paso cambia un único elemento, así las sumas acumuladas se actualizan con un término
"""

from typing import Iterator, List, Tuple


def grayseq_iter(n: int) -> Iterator[int]:
    """
    Índices de bit a invertir partiendo de [0]*n para recorrer los 2^n - 1
    subconjuntos no vacíos en orden Gray.
    """
    for step in range(1, 1 << n):
        yield (step & -step).bit_length() - 1


def gray_subsets(n: int) -> Iterator[Tuple[int, bool, int]]:
    """
    Recorre los subconjuntos no vacíos de range(n).

    Yields:
        (índice invertido, True si entra en el subconjunto, máscara resultante)
    """
    mask = 0
    for bit in grayseq_iter(n):
        mask ^= 1 << bit
        yield bit, bool(mask >> bit & 1), mask


def mask_to_indices(mask: int) -> List[int]:
    indices = []
    i = 0
    while mask:
        if mask & 1:
            indices.append(i)
        mask >>= 1
        i += 1
    return indices
