#!/usr/bin/env python3
"""
Workers - Ejecución concurrente con orden determinista
Reparte tareas independientes en un ThreadPoolExecutor y devuelve los resultados en el orden de entrada
"""

import logging
from concurrent.futures import ThreadPoolExecutor
from typing import Callable, Iterable, List, Optional, TypeVar

import numpy as np

from .config_manager import thread_count

logger = logging.getLogger(__name__)

T = TypeVar("T")
R = TypeVar("R")


def parallel_map(func: Callable[[T], R], items: Iterable[T], threads: Optional[int] = None) -> List[R]:
    """Como map(), con hasta `threads` hilos; el resultado no depende del número de hilos."""
    items = list(items)
    workers = min(thread_count(threads), max(1, len(items)))
    if workers <= 1:
        return [func(item) for item in items]
    logger.debug("repartiendo %d tareas en %d hilos", len(items), workers)
    with ThreadPoolExecutor(max_workers=workers) as executor:
        return list(executor.map(func, items))


def spawn_generators(seed: int, count: int) -> List[np.random.Generator]:
    """Generadores independientes derivados de una semilla, uno por tarea."""
    return [np.random.default_rng(s) for s in np.random.SeedSequence(seed).spawn(count)]
