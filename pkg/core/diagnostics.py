#!/usr/bin/env python3
"""
Diagnostics - Diagnósticos estructurales de identificabilidad
Clases de gemelas, irreducibilidad por subconjuntos y clasificación de redes poco profundas
"""

import logging
import math
from dataclasses import dataclass, field
from enum import Enum
from typing import Any, Dict, List, Optional, Sequence, Tuple

import numpy as np
from scipy import linalg

from utils.exact_linalg import exact_rank
from utils.gray import gray_subsets, mask_to_indices
from utils.workers import parallel_map

from .errors import UnsupportedDepthError
from .network import ConstraintSet, Neuron, Params
from .equivalence import is_admissible

logger = logging.getLogger(__name__)

DEFAULT_SUBSET_CAP = 22
DEFAULT_COLLINEARITY_RTOL = 1e-9
# Reparto de la búsqueda de subconjuntos en bloques por prefijo
MIN_SPLIT_WIDTH = 8
MAX_PREFIX_BITS = 6


# -- colinealidad ------------------------------------------------------------


def collinear(u: np.ndarray, v: np.ndarray, exact: bool, rtol: float = DEFAULT_COLLINEARITY_RTOL) -> bool:
    """
    Exacto: todos los menores 2×2 nulos. Flotante: el menor valor singular de
    la pila [u; v] no supera rtol veces el mayor.
    """
    if exact:
        n = len(u)
        return all(u[i] * v[j] - u[j] * v[i] == 0 for i in range(n) for j in range(i + 1, n))
    s = linalg.svd(np.vstack([np.asarray(u, dtype=np.float64), np.asarray(v, dtype=np.float64)]),
                   compute_uv=False)
    if s[0] == 0:
        return True
    return bool(s[-1] <= rtol * s[0]) if len(s) > 1 else True


def collinearity_ratio(u: np.ndarray, v: np.ndarray, exact: bool) -> Any:
    """λ con v = λ u, suponiendo colinealidad y u no nulo."""
    if exact:
        for a, b in zip(u, v):
            if a != 0:
                return b / a
        return 0
    uf, vf = np.asarray(u, dtype=np.float64), np.asarray(v, dtype=np.float64)
    return float(uf @ vf / (uf @ uf))


def _is_zero(vector: np.ndarray, exact: bool) -> bool:
    return all(v == 0 for v in vector) if exact else not np.any(np.asarray(vector, dtype=np.float64))


# -- gemelas -------------------------------------------------------------------


class TwinKind(str, Enum):
    POSITIVE = "positive"
    NEGATIVE = "negative"


@dataclass(frozen=True)
class TwinPair:
    first: Neuron
    second: Neuron
    ratio: Any  # z_second = ratio · z_first

    @property
    def kind(self) -> TwinKind:
        return TwinKind.POSITIVE if self.ratio > 0 else TwinKind.NEGATIVE


@dataclass(frozen=True)
class TwinClass:
    """Clase T_c de una capa, separada en I_c (λ > 0) y J_c (λ < 0) respecto del primer miembro."""

    layer: int
    members: Tuple[int, ...]
    positive: Tuple[int, ...]
    negative: Tuple[int, ...]
    ratios: Tuple[Any, ...]  # respecto de members[0], en el orden de members

    @property
    def size(self) -> int:
        return len(self.members)

    @property
    def is_trivial(self) -> bool:
        return self.size == 1

    def signature(self, width: int) -> np.ndarray:
        """σ_c = 1_{I_c} - 1_{J_c} sobre la capa."""
        sigma = np.zeros(width, dtype=np.int64)
        sigma[list(self.positive)] = 1
        sigma[list(self.negative)] = -1
        return sigma

    def pairs(self) -> List[TwinPair]:
        out = []
        for a in range(self.size):
            for c in range(a + 1, self.size):
                out.append(TwinPair((self.layer, self.members[a]), (self.layer, self.members[c]),
                                    self.ratios[c] / self.ratios[a]))
        return out


@dataclass(frozen=True)
class TwinReport:
    widths: Tuple[int, ...]
    classes: Tuple[Tuple[TwinClass, ...], ...]  # classes[ℓ-1] para la capa oculta ℓ
    zero_vectors: Tuple[Neuron, ...] = ()

    def layer_classes(self, layer: int) -> Tuple[TwinClass, ...]:
        return self.classes[layer - 1]

    def nontrivial_classes(self) -> List[TwinClass]:
        return [c for layer in self.classes for c in layer if not c.is_trivial]

    @property
    def has_twins(self) -> bool:
        return bool(self.nontrivial_classes())

    def pairs(self, kind: Optional[TwinKind] = None) -> List[TwinPair]:
        out = [p for c in self.nontrivial_classes() for p in c.pairs()]
        return [p for p in out if kind is None or p.kind is kind]

    def positive_pairs(self) -> List[TwinPair]:
        return self.pairs(TwinKind.POSITIVE)

    def negative_pairs(self) -> List[TwinPair]:
        return self.pairs(TwinKind.NEGATIVE)

    def signatures(self, layer: int) -> List[np.ndarray]:
        return [c.signature(self.widths[layer]) for c in self.layer_classes(layer)]

    def to_dict(self) -> Dict[str, Any]:
        return {
            "classes": [
                {"layer": c.layer, "members": list(c.members), "positive": list(c.positive),
                 "negative": list(c.negative), "ratios": list(c.ratios)}
                for c in self.nontrivial_classes()
            ],
            "positive_pairs": len(self.positive_pairs()),
            "negative_pairs": len(self.negative_pairs()),
            "zero_vectors": [list(n) for n in self.zero_vectors],
        }


def find_twins(theta: Params, rtol: float = DEFAULT_COLLINEARITY_RTOL) -> TwinReport:
    """Agrupa las neuronas de cada capa oculta cuyos vectores (w_{•→ν}, b_ν) son colineales."""
    arch = theta.architecture
    exact = theta.is_exact
    all_classes = []
    zero_vectors = []
    for layer in arch.hidden_layers:
        width = arch.widths[layer]
        vectors = [theta.incoming((layer, i)) for i in range(width)]
        zero = [_is_zero(v, exact) for v in vectors]
        zero_vectors.extend((layer, i) for i in range(width) if zero[i])
        assigned = [False] * width
        layer_classes = []
        for i in range(width):
            if assigned[i]:
                continue
            assigned[i] = True
            members, ratios = [i], [theta.one()]
            if not zero[i]:
                for j in range(i + 1, width):
                    if not assigned[j] and not zero[j] and collinear(vectors[i], vectors[j], exact, rtol):
                        assigned[j] = True
                        members.append(j)
                        ratios.append(collinearity_ratio(vectors[i], vectors[j], exact))
            layer_classes.append(TwinClass(
                layer=layer,
                members=tuple(members),
                positive=tuple(m for m, r in zip(members, ratios) if r > 0),
                negative=tuple(m for m, r in zip(members, ratios) if r < 0),
                ratios=tuple(ratios),
            ))
        all_classes.append(tuple(layer_classes))
    if zero_vectors:
        logger.warning("neuronas con vector entrante nulo: %s", zero_vectors)
    return TwinReport(arch.widths, tuple(all_classes), tuple(zero_vectors))


# -- irreducibilidad --------------------------------------------------------------


class IrreducibilityVerdict(str, Enum):
    IRREDUCIBLE = "irreducible"
    REDUCIBLE = "reducible"
    INCONCLUSIVE = "inconclusive"


@dataclass(frozen=True)
class LayerSubsetScan:
    layer: int
    width: int
    subsets_checked: int
    vanishing: int
    first_witness: Optional[Tuple[int, ...]]
    capped: bool = False


@dataclass(frozen=True)
class IrreducibilityReport:
    verdict: IrreducibilityVerdict
    witness: Optional[Tuple[int, Tuple[int, ...]]]
    subsets_checked: int
    layers: Tuple[LayerSubsetScan, ...] = ()
    subset_cap: int = DEFAULT_SUBSET_CAP

    @property
    def irreducible(self) -> Optional[bool]:
        if self.verdict is IrreducibilityVerdict.INCONCLUSIVE:
            return None
        return self.verdict is IrreducibilityVerdict.IRREDUCIBLE

    def to_dict(self) -> Dict[str, Any]:
        return {
            "verdict": self.verdict.value,
            "witness": None if self.witness is None else {"layer": self.witness[0],
                                                          "subset": list(self.witness[1])},
            "subsets_checked": self.subsets_checked,
            "capped_layers": [s.layer for s in self.layers if s.capped],
            "subset_cap": self.subset_cap,
        }


def subset_product(theta: Params, layer: int, subset: Sequence[int]) -> np.ndarray:
    """W_{ℓ+1} I_T W_ℓ."""
    idx = list(subset)
    return np.dot(theta.W(layer + 1)[:, idx], theta.W(layer)[idx, :])


def _rank_one_terms(theta: Params, layer: int) -> Tuple[List[np.ndarray], Any]:
    """Matrices M_ν = w_{ν→•} w_{•→ν}ᵀ y la tolerancia de cero a usar con ellas."""
    width = theta.architecture.widths[layer]
    terms = [np.outer(theta.outgoing((layer, i)), theta.incoming_weights((layer, i))) for i in range(width)]
    if not theta.is_exact:
        terms = [np.asarray(t, dtype=np.float64) for t in terms]
        scale = max((float(np.max(np.abs(t))) for t in terms), default=0.0)
        return terms, DEFAULT_COLLINEARITY_RTOL * scale
    # Entero común: lcm de denominadores, así la suma Gray se hace con enteros
    denominator = 1
    for t in terms:
        for v in t.flat:
            denominator = denominator * v.denominator // math.gcd(denominator, v.denominator)
    int_terms = [np.array([[int(v * denominator) for v in row] for row in t], dtype=object) for t in terms]
    bound = sum(int(max((abs(v) for v in t.flat), default=0)) for t in int_terms)
    if bound < 2 ** 62:
        int_terms = [t.astype(np.int64) for t in int_terms]
    return int_terms, 0


def prefix_bits(width: int) -> int:
    """Bits altos fijados por bloque; las capas estrechas se recorren en un único bloque."""
    if width < MIN_SPLIT_WIDTH:
        return 0
    return min(MAX_PREFIX_BITS, width - MIN_SPLIT_WIDTH // 2)


@dataclass(frozen=True)
class _BlockScan:
    checked: int
    vanishing: int
    first_witness: Optional[Tuple[int, ...]]


def _scan_block(terms: List[np.ndarray], tol: Any, width: int, n_prefix: int, prefix: int) -> _BlockScan:
    """
    Subconjuntos cuyos n_prefix bits altos valen `prefix`; los bits bajos se
    recorren en código Gray partiendo de la suma del prefijo.
    """
    low = width - n_prefix
    running = np.zeros_like(terms[0])
    for i in mask_to_indices(prefix):
        running = running + terms[low + i]
    head = prefix << low
    vanishing, checked = 0, 0
    best: Optional[Tuple[int, ...]] = None

    def visit(mask: int) -> None:
        nonlocal vanishing, checked, best
        checked += 1
        is_zero = not np.any(running) if tol == 0 else float(np.max(np.abs(running))) <= tol
        if is_zero:
            vanishing += 1
            subset = tuple(mask_to_indices(mask))
            if best is None or subset < best:
                best = subset

    if prefix:
        visit(head)
    for bit, entered, mask in gray_subsets(low):
        if entered:
            running = running + terms[bit]
        else:
            running = running - terms[bit]
        visit(head | mask)
    return _BlockScan(checked, vanishing, best)


def _merge_blocks(layer: int, width: int, blocks: Sequence[_BlockScan]) -> LayerSubsetScan:
    witnesses = [b.first_witness for b in blocks if b.first_witness is not None]
    return LayerSubsetScan(layer, width, sum(b.checked for b in blocks), sum(b.vanishing for b in blocks),
                           min(witnesses) if witnesses else None)


def is_irreducible(theta: Params, subset_cap: int = DEFAULT_SUBSET_CAP,
                   threads: Optional[int] = None) -> IrreducibilityReport:
    """
    Recorre todos los T ⊆ N_ℓ no vacíos (capa completa incluida) de cada capa
    oculta buscando W_{ℓ+1} I_T W_ℓ = 0. Cada capa se parte en bloques por
    prefijo de código Gray y los bloques se reparten entre los hilos.
    """
    arch = theta.architecture
    layers = list(arch.hidden_layers)
    capped = [l for l in layers if arch.widths[l] > subset_cap]
    to_scan = [l for l in layers if l not in capped]
    terms = {l: _rank_one_terms(theta, l) for l in to_scan}
    tasks = [(l, prefix) for l in to_scan for prefix in range(1 << prefix_bits(arch.widths[l]))]

    def run(task: Tuple[int, int]) -> _BlockScan:
        layer, prefix = task
        width = arch.widths[layer]
        layer_terms, tol = terms[layer]
        return _scan_block(layer_terms, tol, width, prefix_bits(width), prefix)

    results = parallel_map(run, tasks, threads)
    scans = [_merge_blocks(l, arch.widths[l], [r for (layer, _), r in zip(tasks, results) if layer == l])
             for l in to_scan]
    scans += [LayerSubsetScan(l, arch.widths[l], 0, 0, None, capped=True) for l in capped]
    scans.sort(key=lambda s: s.layer)
    checked = sum(s.subsets_checked for s in scans)
    for scan in scans:
        if scan.first_witness is not None:
            logger.debug("capa %d reducible, testigo %s", scan.layer, scan.first_witness)
            return IrreducibilityReport(IrreducibilityVerdict.REDUCIBLE, (scan.layer, scan.first_witness),
                                        checked, tuple(scans), subset_cap)
    if capped:
        logger.warning("capas %s superan el límite de %d neuronas; irreducibilidad sin decidir",
                       capped, subset_cap)
        return IrreducibilityReport(IrreducibilityVerdict.INCONCLUSIVE, None, checked, tuple(scans), subset_cap)
    return IrreducibilityReport(IrreducibilityVerdict.IRREDUCIBLE, None, checked, tuple(scans), subset_cap)


# -- clasificación poco profunda ------------------------------------------------------


class ShallowClass(str, Enum):
    PS_IDENTIFIABLE = "ps-identifiable-from-bounded-set"
    EXCLUDED_BY_TWINS = "excluded-by-twins"
    EXCLUDED_BY_REDUCIBILITY = "excluded-by-reducibility"
    NOT_ADMISSIBLE = "not-admissible"
    INCONCLUSIVE = "inconclusive"


@dataclass(frozen=True)
class SingleNegativePairAnalysis:
    """
    Análisis de una única pareja de gemelas negativas.

    branch "i": salientes independientes; "ii": Θ fuerza sesgo de salida nulo;
    "iii": salientes dependientes con Θ admitiendo el desplazamiento de sesgos.
    """

    pair: TwinPair
    outgoing_independent: bool
    outgoing_ratio: Optional[Any]  # α con w_{ν2→•} = α w_{ν1→•}
    branch: Optional[str]
    nondegenerate: Optional[bool]

    def to_dict(self) -> Dict[str, Any]:
        return {
            "pair": [list(self.pair.first), list(self.pair.second)],
            "twin_ratio": self.pair.ratio,
            "outgoing_independent": self.outgoing_independent,
            "outgoing_ratio": self.outgoing_ratio,
            "branch": self.branch,
            "nondegenerate": self.nondegenerate,
        }


@dataclass(frozen=True)
class ShallowClassification:
    verdict: ShallowClass
    twins: Optional[TwinReport] = None
    irreducibility: Optional[IrreducibilityReport] = None
    twin_kinds: Tuple[str, ...] = ()
    single_negative_pair: Optional[SingleNegativePairAnalysis] = None
    offending: Tuple[Neuron, ...] = field(default_factory=tuple)

    def to_dict(self) -> Dict[str, Any]:
        return {
            "verdict": self.verdict.value,
            "twin_kinds": list(self.twin_kinds),
            "single_negative_pair": None if self.single_negative_pair is None
            else self.single_negative_pair.to_dict(),
            "offending": [list(n) for n in self.offending],
        }


def single_negative_pair(twins: TwinReport) -> Optional[TwinPair]:
    """La pareja si la única clase no trivial es una pareja negativa."""
    nontrivial = twins.nontrivial_classes()
    if len(nontrivial) != 1 or nontrivial[0].size != 2 or not nontrivial[0].negative:
        return None
    return nontrivial[0].pairs()[0]


def analyze_single_negative_pair(theta: Params, pair: TwinPair,
                                 constraint: Optional[ConstraintSet] = None,
                                 rtol: float = DEFAULT_COLLINEARITY_RTOL) -> SingleNegativePairAnalysis:
    constraint = constraint or ConstraintSet.unconstrained()
    out1, out2 = theta.outgoing(pair.first), theta.outgoing(pair.second)
    if theta.is_exact:
        independent = exact_rank([list(out1), list(out2)]) == 2
    else:
        independent = not collinear(out1, out2, exact=False, rtol=rtol)
    alpha = None if independent else collinearity_ratio(out1, out2, theta.is_exact)
    if independent:
        return SingleNegativePairAnalysis(pair, True, None, "i", True)
    if constraint.forces_zero_output_bias and constraint.satisfied_by(theta):
        return SingleNegativePairAnalysis(pair, False, alpha, "ii", True)
    L = theta.depth
    shifted = [pair.first, pair.second] + [(L, k) for k in range(theta.architecture.n_outputs)]
    if constraint.admits_bias_shift(theta, shifted):
        return SingleNegativePairAnalysis(pair, False, alpha, "iii", False)
    return SingleNegativePairAnalysis(pair, False, alpha, None, None)


def classify_shallow(theta: Params, constraint: Optional[ConstraintSet] = None,
                     subset_cap: int = DEFAULT_SUBSET_CAP,
                     rtol: float = DEFAULT_COLLINEARITY_RTOL) -> ShallowClassification:
    """
    Sin gemelas e irreducible ⟹ PS-identificable desde un conjunto acotado.
    Cualquier gemela o testigo de reducibilidad lo excluye.
    """
    if theta.depth != 2:
        raise UnsupportedDepthError(f"la clasificación exige L = 2, la red tiene L = {theta.depth}")
    admissibility = is_admissible(theta)
    if not admissibility:
        return ShallowClassification(ShallowClass.NOT_ADMISSIBLE, offending=tuple(admissibility.offending_neurons))

    twins = find_twins(theta, rtol)
    irreducibility = is_irreducible(theta, subset_cap)
    if twins.has_twins:
        kinds = tuple(sorted({p.kind.value for p in twins.pairs()}))
        pair = single_negative_pair(twins)
        analysis = analyze_single_negative_pair(theta, pair, constraint, rtol) if pair else None
        return ShallowClassification(ShallowClass.EXCLUDED_BY_TWINS, twins, irreducibility, kinds, analysis)
    if irreducibility.verdict is IrreducibilityVerdict.REDUCIBLE:
        return ShallowClassification(ShallowClass.EXCLUDED_BY_REDUCIBILITY, twins, irreducibility)
    if irreducibility.verdict is IrreducibilityVerdict.INCONCLUSIVE:
        return ShallowClassification(ShallowClass.INCONCLUSIVE, twins, irreducibility)
    return ShallowClassification(ShallowClass.PS_IDENTIFIABLE, twins, irreducibility)
