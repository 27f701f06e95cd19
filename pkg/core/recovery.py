#!/usr/bin/env python3
"""
Recovery - Reconstrucción por caja negra de redes poco profundas
Detección de hiperplanos de pliegue, saltos del jacobiano y orientación por el residuo afín
"""

import logging
import shlex
import subprocess
import threading
from dataclasses import dataclass, field
from typing import Any, Dict, List, Optional, Sequence, Tuple, Union

import numpy as np
from scipy import linalg

from utils.gray import gray_subsets, mask_to_indices
from utils.workers import parallel_map, spawn_generators

from .errors import BudgetExceededError, DomainError, MalformedInputError
from .network import Params, ScalarMode, forward_batch

logger = logging.getLogger(__name__)

DEFAULT_BOX_RADIUS = 3.0
DEFAULT_GRID_POINTS = 64
DEFAULT_KINK_TOL = 1e-6
DEFAULT_FIT_RESIDUAL = 1e-7
DEFAULT_RANSAC_TRIALS = 2000
DEFAULT_JACOBIAN_STEP = 1e-5
DEFAULT_RANK_ONE_RTOL = 1e-6
DEFAULT_QUERY_BUDGET_PER_UNIT = 2000
DEFAULT_MAX_UNITS = 8
DEFAULT_VERIFY_POINTS = 1000


# -- oráculos ---------------------------------------------------------------------


class Oracle:
    """Función de caja negra R^d → R^k con contador de consultas compartido entre hilos."""

    def __init__(self, n_inputs: int, n_outputs: int, budget: Optional[int] = None):
        self.n_inputs = n_inputs
        self.n_outputs = n_outputs
        self.budget = budget
        self._queries = 0
        self._lock = threading.Lock()

    @property
    def queries(self) -> int:
        return self._queries

    @property
    def remaining(self) -> Optional[int]:
        return None if self.budget is None else max(0, self.budget - self._queries)

    def __call__(self, X: Any) -> np.ndarray:
        X = np.atleast_2d(np.asarray(X, dtype=np.float64))
        if X.shape[1] != self.n_inputs:
            raise DomainError(f"consultas de dimensión {X.shape[1]}, el oráculo espera {self.n_inputs}")
        with self._lock:
            if self.budget is not None and self._queries + len(X) > self.budget:
                raise BudgetExceededError("presupuesto de consultas agotado",
                                          count=self._queries + len(X), limit=self.budget)
            self._queries += len(X)
        values = np.asarray(self._evaluate(X), dtype=np.float64)
        return values.reshape(len(X), self.n_outputs)

    def _evaluate(self, X: np.ndarray) -> np.ndarray:
        raise NotImplementedError


class NetworkOracle(Oracle):
    """Oráculo simulado a partir de unos parámetros conocidos."""

    def __init__(self, theta: Params, budget: Optional[int] = None):
        super().__init__(theta.architecture.n_inputs, theta.architecture.n_outputs, budget)
        self.theta = theta.to_float()

    def _evaluate(self, X: np.ndarray) -> np.ndarray:
        return forward_batch(self.theta, X)


class CommandOracle(Oracle):
    """
    Lanza un proceso por consulta: x en una línea separada por espacios por
    stdin, k valores por stdout.
    """

    def __init__(self, command: Union[str, Sequence[str]], n_inputs: int, n_outputs: int,
                 budget: Optional[int] = None, timeout: float = 30.0):
        super().__init__(n_inputs, n_outputs, budget)
        self.command = shlex.split(command) if isinstance(command, str) else list(command)
        self.timeout = timeout

    def _evaluate(self, X: np.ndarray) -> np.ndarray:
        rows = []
        for x in X:
            line = " ".join(repr(float(v)) for v in x) + "\n"
            try:
                completed = subprocess.run(self.command, input=line, capture_output=True, text=True,
                                           timeout=self.timeout, check=True)
            except (OSError, subprocess.SubprocessError) as e:
                raise MalformedInputError(f"el oráculo externo falló: {e}")
            try:
                values = [float(v) for v in completed.stdout.split()]
            except ValueError:
                raise MalformedInputError(f"salida no numérica del oráculo: {completed.stdout!r}")
            if len(values) != self.n_outputs:
                raise MalformedInputError(f"el oráculo devolvió {len(values)} valores, se esperaban {self.n_outputs}")
            rows.append(values)
        return np.asarray(rows)


def default_budget(n_inputs: int, query_budget_per_unit: int = DEFAULT_QUERY_BUDGET_PER_UNIT,
                   max_units: int = DEFAULT_MAX_UNITS) -> int:
    """Presupuesto de consultas por defecto: query_budget_per_unit·(d+2)·max_units."""
    return query_budget_per_unit * (n_inputs + 2) * max_units


# -- detección de hiperplanos ---------------------------------------------------------------


@dataclass(frozen=True)
class Hyperplane:
    """{x : ⟨w, x⟩ + b = 0} con ‖w‖ = 1 y b >= 0."""

    w: np.ndarray
    b: float
    n_points: int = 0
    residual: float = 0.0

    def value(self, X: np.ndarray) -> np.ndarray:
        return np.asarray(X, dtype=np.float64) @ self.w + self.b

    def distance(self, x: np.ndarray) -> float:
        return abs(float(self.value(x)))

    def to_dict(self) -> Dict[str, Any]:
        return {"w": self.w.tolist(), "b": self.b, "points": self.n_points, "residual": self.residual}


def normalize_hyperplane(w: np.ndarray, b: float) -> Tuple[np.ndarray, float]:
    norm = float(np.linalg.norm(w))
    if norm == 0:
        raise DomainError("hiperplano con normal nula")
    w, b = np.asarray(w, dtype=np.float64) / norm, float(b) / norm
    flip = b < 0 or (b == 0 and w[np.flatnonzero(w)[0]] < 0)
    return (-w, -b) if flip else (w, b)


@dataclass(frozen=True)
class HyperplaneDetection:
    hyperplanes: Tuple[Hyperplane, ...]
    kink_points: np.ndarray
    dropped_points: int = 0
    unresolved_cells: int = 0
    partial: bool = False

    def to_dict(self) -> Dict[str, Any]:
        return {
            "hyperplanes": [h.to_dict() for h in self.hyperplanes],
            "kink_points": len(self.kink_points),
            "dropped_points": self.dropped_points,
            "unresolved_cells": self.unresolved_cells,
            "partial": self.partial,
        }


def _refine_kink(oracle: Oracle, origin: np.ndarray, direction: np.ndarray, a: float, b: float,
                 left: Tuple[np.ndarray, np.ndarray], right: Tuple[np.ndarray, np.ndarray],
                 min_width: float, match_tol: float) -> Optional[float]:
    """
    Bisección en [a, b] comparando el punto medio con las piezas afines de
    izquierda y derecha. Devuelve la intersección de ambas piezas.
    """
    (fa, slope_l), (fb, slope_r) = left, right
    lo, hi = a, b

    def left_piece(s: float) -> np.ndarray:
        return fa + slope_l * (s - a)

    def right_piece(s: float) -> np.ndarray:
        return fb + slope_r * (s - b)

    while hi - lo > min_width:
        mid = (lo + hi) / 2
        value = oracle(origin + mid * direction)[0]
        on_left = np.max(np.abs(value - left_piece(mid))) <= match_tol
        on_right = np.max(np.abs(value - right_piece(mid))) <= match_tol
        if on_left and on_right:
            break
        if on_left:
            lo = mid
        elif on_right:
            hi = mid
        else:
            return None
    jump = slope_l - slope_r
    denom = float(jump @ jump)
    if denom == 0:
        return None
    rhs = fb - fa + slope_l * a - slope_r * b
    s = float(jump @ rhs) / denom
    if not lo - (hi - lo) - min_width <= s <= hi + (hi - lo) + min_width:
        s = (lo + hi) / 2
    return s


def _probe_line(oracle: Oracle, rng: np.random.Generator, box_radius: float, grid_points: int,
                kink_tol: float) -> Tuple[List[np.ndarray], int]:
    d = oracle.n_inputs
    origin = rng.uniform(-box_radius, box_radius, size=d)
    direction = rng.standard_normal(d)
    direction /= np.linalg.norm(direction)
    half = box_radius * np.sqrt(d)
    h = 2 * half / grid_points
    # una celda extra a cada lado para que toda celda interior tenga vecinas
    s = -half - h + h * np.arange(grid_points + 3)
    values = oracle(origin[None, :] + s[:, None] * direction[None, :])
    slopes = np.diff(values, axis=0) / h
    scale = max(1.0, float(np.max(np.abs(slopes))))
    tol = kink_tol * scale
    differs = np.max(np.abs(np.diff(slopes, axis=0)), axis=1) > tol  # entre celdas i e i+1
    min_width = 1e-10 * box_radius
    match_tol = 1e-9 * max(1.0, float(np.max(np.abs(values))))
    points, unresolved = [], 0
    n_cells = len(slopes)
    for i in range(1, n_cells - 1):
        if differs[i - 1] and differs[i]:
            left = (values[i], slopes[i - 1])
            right = (values[i + 1], slopes[i + 1])
            t = _refine_kink(oracle, origin, direction, s[i], s[i + 1], left, right, min_width, match_tol)
            if t is None:
                unresolved += 1
                continue
            points.append(origin + t * direction)
        elif differs[i - 1] and not differs[i] and (i < 2 or not differs[i - 2]):
            # pliegue justo en un nodo de la malla
            points.append(origin + s[i] * direction)
    return points, unresolved


def _tls_fit(P: np.ndarray) -> Tuple[np.ndarray, float]:
    centroid = P.mean(axis=0)
    _, _, vt = linalg.svd(P - centroid)
    w = vt[-1]
    return w, -float(w @ centroid)


def cluster_kinks(points: np.ndarray, box_radius: float, fit_residual: float = DEFAULT_FIT_RESIDUAL,
                  ransac_trials: int = DEFAULT_RANSAC_TRIALS, seed: int = 0) -> Tuple[List[Hyperplane], int]:
    """
    Agrupa puntos de pliegue en hiperplanos: ancla en el primer punto restante,
    d-1 puntos al azar, ajuste TLS y umbral de inliers fit_residual·R.
    """
    rng = np.random.default_rng(seed)
    n, d = points.shape if len(points) else (0, 0)
    remaining = list(range(n))
    threshold = fit_residual * box_radius
    hyperplanes, dropped = [], 0
    while remaining:
        anchor = remaining[0]
        others = remaining[1:]
        best: List[int] = []
        if len(others) >= d - 1:
            for _ in range(ransac_trials if d > 1 else 1):
                chosen = list(rng.choice(others, size=d - 1, replace=False)) if d > 1 else []
                w, b = _tls_fit(points[[anchor] + chosen])
                residuals = np.abs(points[remaining] @ w + b)
                inliers = [remaining[k] for k in np.flatnonzero(residuals <= threshold)]
                if len(inliers) > len(best):
                    best = inliers
                if len(best) == len(remaining):
                    break
        if len(best) >= d + 1:
            w, b = _tls_fit(points[best])
            residuals = np.abs(points[remaining] @ w + b)
            best = [remaining[k] for k in np.flatnonzero(residuals <= threshold)]
            w, b = _tls_fit(points[best])
            w, b = normalize_hyperplane(w, b)
            fit = float(np.max(np.abs(points[best] @ w + b)))
            hyperplanes.append(Hyperplane(w, b, len(best), fit))
            chosen_set = set(best)
            remaining = [k for k in remaining if k not in chosen_set]
        else:
            logger.warning("punto de pliegue %s descartado: grupo con menos de %d puntos",
                           points[anchor].tolist(), d + 1)
            dropped += 1
            remaining = remaining[1:]
    return _merge_duplicates(hyperplanes), dropped


def _merge_duplicates(hyperplanes: List[Hyperplane], tol: float = 1e-6) -> List[Hyperplane]:
    merged: List[Hyperplane] = []
    for h in hyperplanes:
        for k, g in enumerate(merged):
            if np.linalg.norm(h.w - g.w) <= tol and abs(h.b - g.b) <= tol:
                keep = g if g.n_points >= h.n_points else h
                merged[k] = Hyperplane(keep.w, keep.b, g.n_points + h.n_points, max(g.residual, h.residual))
                break
        else:
            merged.append(h)
    return merged


def detect_hyperplanes(oracle: Oracle, box_radius: float = DEFAULT_BOX_RADIUS, line_count: Optional[int] = None,
                       tol: float = DEFAULT_KINK_TOL, grid_points: int = DEFAULT_GRID_POINTS,
                       fit_residual: float = DEFAULT_FIT_RESIDUAL, ransac_trials: int = DEFAULT_RANSAC_TRIALS,
                       seed: int = 0, threads: Optional[int] = None) -> HyperplaneDetection:
    """Sondea rectas aleatorias por la caja, localiza los pliegues y los agrupa en hiperplanos."""
    d = oracle.n_inputs
    line_count = line_count or 6 * (d + 1) + 10
    rngs = spawn_generators(seed, line_count)
    partial = False

    def probe(rng: np.random.Generator) -> Tuple[List[np.ndarray], int, bool]:
        try:
            pts, unresolved = _probe_line(oracle, rng, box_radius, grid_points, tol)
            return pts, unresolved, False
        except BudgetExceededError:
            return [], 0, True

    results = parallel_map(probe, rngs, threads)
    points = [p for pts, _, _ in results for p in pts]
    unresolved = sum(u for _, u, _ in results)
    if any(flag for _, _, flag in results):
        partial = True
        logger.warning("presupuesto agotado durante el sondeo; resultado parcial")
    if unresolved:
        logger.warning("%d celdas con más de un pliegue sin resolver", unresolved)
    P = np.asarray(points, dtype=np.float64).reshape(-1, d)
    hyperplanes, dropped = cluster_kinks(P, box_radius, fit_residual, ransac_trials, seed)
    logger.debug("%d puntos de pliegue, %d hiperplanos", len(P), len(hyperplanes))
    return HyperplaneDetection(tuple(hyperplanes), P, dropped, unresolved, partial)


# -- saltos del jacobiano --------------------------------------------------------------------


@dataclass(frozen=True)
class OuterEstimate:
    hyperplane: Hyperplane
    outer: np.ndarray  # J(x^+) - J(x^-) ≈ u ŵᵀ
    u: np.ndarray
    anchor: Optional[np.ndarray]
    isolation: float
    ambiguous: bool = False
    rank_one: bool = True


def _jacobian(oracle: Oracle, x: np.ndarray, h: float) -> np.ndarray:
    d = len(x)
    X = np.vstack([x] + [x + h * np.eye(d)[j] for j in range(d)])
    F = oracle(X)
    return ((F[1:] - F[0]) / h).T


def _isolated_anchor(hyperplane: Hyperplane, others: Sequence[Hyperplane], box_radius: float,
                     rng: np.random.Generator, tries: int = 32) -> Tuple[Optional[np.ndarray], float]:
    """Punto del hiperplano dentro de la caja lo más lejos posible de los demás."""
    d = len(hyperplane.w)
    base = -hyperplane.b * hyperplane.w
    best, best_r = None, 0.0
    for _ in range(tries if d > 1 else 1):
        x0 = base.copy()
        if d > 1:
            t = rng.standard_normal(d)
            t -= (t @ hyperplane.w) * hyperplane.w
            x0 = base + rng.uniform(0, box_radius) * t / max(float(np.linalg.norm(t)), 1e-300)
        if np.max(np.abs(x0)) > box_radius:
            continue
        r = min((g.distance(x0) for g in others), default=box_radius)
        if r > best_r:
            best, best_r = x0, r
    return best, best_r


def recover_outer(oracle: Oracle, hyperplanes: Sequence[Hyperplane], step: float = DEFAULT_JACOBIAN_STEP,
                  box_radius: float = DEFAULT_BOX_RADIUS, rank_one_rtol: float = DEFAULT_RANK_ONE_RTOL,
                  seed: int = 0) -> List[OuterEstimate]:
    """Salto J(x^+) - J(x^-) a ambos lados de cada hiperplano, con x^± = x_0 ± δ ŵ."""
    rng = np.random.default_rng(seed)
    estimates = []
    for k, hyperplane in enumerate(hyperplanes):
        others = [g for j, g in enumerate(hyperplanes) if j != k]
        x0, isolation = _isolated_anchor(hyperplane, others, box_radius, rng)
        if x0 is None or isolation <= 1e-9 * box_radius:
            logger.warning("hiperplano %d sin bola aislada dentro de la caja", k)
            zero = np.zeros((oracle.n_outputs, oracle.n_inputs))
            estimates.append(OuterEstimate(hyperplane, zero, np.zeros(oracle.n_outputs), None, isolation,
                                           ambiguous=True, rank_one=False))
            continue
        delta = min(step * box_radius, isolation / 2)
        h = delta / 4
        outer = _jacobian(oracle, x0 + delta * hyperplane.w, h) - _jacobian(oracle, x0 - delta * hyperplane.w, h)
        u = outer @ hyperplane.w
        sv = linalg.svd(outer, compute_uv=False)
        residual = float(np.linalg.norm(outer - np.outer(u, hyperplane.w)))
        norm = float(np.linalg.norm(outer))
        rank_one = norm > 0 and (len(sv) < 2 or sv[1] <= rank_one_rtol * sv[0]) and residual <= rank_one_rtol * norm * 10
        if not rank_one:
            logger.warning("hiperplano %d: salto del jacobiano no es de rango uno", k)
        estimates.append(OuterEstimate(hyperplane, outer, u, x0, isolation, rank_one=rank_one))
    return estimates


# -- ensamblado --------------------------------------------------------------------------------


@dataclass(frozen=True)
class RecoveredUnit:
    w: np.ndarray
    b: float
    u: np.ndarray
    outer: np.ndarray
    active_on_negative_side: bool

    def incoming(self) -> Tuple[np.ndarray, float]:
        return (-self.w, -self.b) if self.active_on_negative_side else (self.w, self.b)

    def to_dict(self) -> Dict[str, Any]:
        w, b = self.incoming()
        return {"w": w.tolist(), "b": b, "v": self.u.tolist(),
                "orientation": "negative" if self.active_on_negative_side else "positive"}


@dataclass(frozen=True)
class RecoveredModel:
    units: Tuple[RecoveredUnit, ...]
    c: np.ndarray
    detection: Optional[HyperplaneDetection] = None
    violations: Tuple[str, ...] = ()
    verification_error: Optional[float] = None
    verified: bool = False
    queries: int = 0
    diagnostics: Dict[str, Any] = field(default_factory=dict)

    @property
    def n_units(self) -> int:
        return len(self.units)

    def to_params(self) -> Params:
        """Parámetros float; sin unidades se devuelve la aplicación afín de profundidad 1."""
        k = len(self.c)
        if not self.units:
            A = self.diagnostics.get("affine_part")
            A = np.zeros((k, 0)) if A is None else np.asarray(A)
            return Params((A,), (self.c,), ScalarMode.FLOAT)
        W1 = np.array([unit.incoming()[0] for unit in self.units])
        b1 = np.array([unit.incoming()[1] for unit in self.units])
        W2 = np.array([unit.u for unit in self.units]).T.reshape(k, len(self.units))
        return Params((W1, W2), (b1, self.c), ScalarMode.FLOAT)

    def to_dict(self) -> Dict[str, Any]:
        return {
            "units": [u.to_dict() for u in self.units],
            "c": self.c.tolist(),
            "violations": list(self.violations),
            "verification_error": self.verification_error,
            "verified": self.verified,
            "queries": self.queries,
            "detection": None if self.detection is None else self.detection.to_dict(),
        }


def _fit_affine(X: np.ndarray, Y: np.ndarray) -> Tuple[np.ndarray, np.ndarray, float]:
    design = np.hstack([X, np.ones((len(X), 1))])
    coef, _, _, _ = linalg.lstsq(design, Y)
    residual = float(np.max(np.abs(design @ coef - Y))) if len(X) else 0.0
    return coef[:-1].T, coef[-1], residual


def _orientation_subset(estimates: Sequence[OuterEstimate], A0: np.ndarray, tol: float) -> Optional[List[int]]:
    """T único con Σ_T u ŵᵀ = -A_0."""
    target = -A0
    if target.size == 0 or np.max(np.abs(target)) <= tol:
        return []
    terms = [np.outer(e.u, e.hyperplane.w) for e in estimates]
    running = np.zeros_like(target)
    for bit, entered, mask in gray_subsets(len(terms)):
        running = running + terms[bit] if entered else running - terms[bit]
        if np.max(np.abs(running - target)) <= tol:
            return mask_to_indices(mask)
    return None


def recover_shallow(oracle: Oracle, budget: Optional[int] = None, box_radius: float = DEFAULT_BOX_RADIUS,
                    seed: int = 0, grid_points: int = DEFAULT_GRID_POINTS, kink_tol: float = DEFAULT_KINK_TOL,
                    fit_residual: float = DEFAULT_FIT_RESIDUAL, ransac_trials: int = DEFAULT_RANSAC_TRIALS,
                    jacobian_step: float = DEFAULT_JACOBIAN_STEP, rank_one_rtol: float = DEFAULT_RANK_ONE_RTOL,
                    query_budget_per_unit: int = DEFAULT_QUERY_BUDGET_PER_UNIT, max_units: int = DEFAULT_MAX_UNITS,
                    verify_points: int = DEFAULT_VERIFY_POINTS, line_count: Optional[int] = None,
                    threads: Optional[int] = None) -> RecoveredModel:
    """
    Detección + saltos del jacobiano + orientación. Verifica el resultado
    contra el oráculo en `verify_points` puntos nuevos de la caja.
    """
    d, k = oracle.n_inputs, oracle.n_outputs
    if budget is not None:
        oracle.budget = budget
    elif oracle.budget is None:
        oracle.budget = default_budget(d, query_budget_per_unit, max_units)
    violations: List[str] = []

    detection = detect_hyperplanes(oracle, box_radius, line_count, kink_tol, grid_points, fit_residual,
                                   ransac_trials, seed, threads)
    if detection.partial:
        violations.append("presupuesto agotado durante la detección")
    if len(detection.hyperplanes) > max_units:
        violations.append(f"{len(detection.hyperplanes)} hiperplanos, más que max_units = {max_units}")

    rng = np.random.default_rng(seed + 1)
    try:
        estimates = recover_outer(oracle, detection.hyperplanes, jacobian_step, box_radius, rank_one_rtol, seed)
        X = rng.uniform(-box_radius, box_radius, size=(8 * (d + 1) + 16, d))
        Y = oracle(X)
    except BudgetExceededError as e:
        violations.append(str(e))
        return RecoveredModel((), np.zeros(k), detection, tuple(violations), queries=oracle.queries)

    for j, e in enumerate(estimates):
        if e.ambiguous:
            violations.append(f"unidad {j} ambigua: sin bola aislada")
        elif not e.rank_one:
            violations.append(f"unidad {j}: salto de rango mayor que uno")
    kept = [e for e in estimates if not e.ambiguous and e.rank_one]

    relu_part = np.zeros_like(Y)
    for e in kept:
        relu_part += np.maximum(e.hyperplane.value(X), 0.0)[:, None] * e.u[None, :]
    A0, c0, fit = _fit_affine(X, Y - relu_part)
    scale = max(1.0, float(np.max(np.abs(Y))))
    if fit > 1e-6 * scale:
        violations.append(f"residuo afín {fit:.3e}: faltan pliegues o sobran unidades")
    subset = _orientation_subset(kept, A0, 1e-6 * scale) if kept else []
    if subset is None:
        violations.append("ningún subconjunto de unidades explica la parte afín (gemelas o reducibilidad)")
        subset = []
    c = c0 + sum((kept[j].u * kept[j].hyperplane.b for j in subset), np.zeros(k))
    units = tuple(RecoveredUnit(e.hyperplane.w, e.hyperplane.b, e.u, e.outer, j in subset)
                  for j, e in enumerate(kept))
    diagnostics = {"affine_fit_residual": fit, "affine_part": A0 if not units else None,
                   "kink_points": len(detection.kink_points)}
    model = RecoveredModel(units, np.asarray(c, dtype=np.float64), detection, tuple(violations),
                           queries=oracle.queries, diagnostics=diagnostics)

    try:
        X_check = rng.uniform(-box_radius, box_radius, size=(verify_points, d))
        expected = oracle(X_check)
    except BudgetExceededError as e:
        violations.append(str(e))
        return RecoveredModel(units, model.c, detection, tuple(violations), queries=oracle.queries,
                              diagnostics=diagnostics)
    error = float(np.max(np.abs(forward_batch(model.to_params(), X_check) - expected))) if verify_points else 0.0
    verified = error <= 1e-6 * max(1.0, float(np.max(np.abs(expected))) if verify_points else 1.0)
    if not verified:
        logger.warning("la reconstrucción difiere del oráculo (error máx. %.3e)", error)
    return RecoveredModel(units, model.c, detection, tuple(violations), error, verified and not violations,
                          oracle.queries, diagnostics)


@dataclass(frozen=True)
class UnitCount:
    count_a: int
    count_b: int

    @property
    def equal(self) -> bool:
        return self.count_a == self.count_b

    def to_dict(self) -> Dict[str, Any]:
        return {"count_a": self.count_a, "count_b": self.count_b, "equal": self.equal}


def count_units(oracle_a: Oracle, oracle_b: Oracle, **detection_options: Any) -> UnitCount:
    """Compara el número de hiperplanos de pliegue de dos oráculos."""
    a = detect_hyperplanes(oracle_a, **detection_options)
    b = detect_hyperplanes(oracle_b, **detection_options)
    return UnitCount(len(a.hyperplanes), len(b.hyperplanes))
