#!/usr/bin/env python3
"""
ReluIdentApp - Interfaz de línea de comandos
Subcomandos embed, compare, analyze, actspace, identset, recover y examples con informes JSON deterministas
"""

import argparse
import logging
import os
import time
from fractions import Fraction
from typing import Any, Callable, Dict, List, Optional, Sequence, Tuple

from core.activation_spaces import (nondegeneracy_certificate, sample_activation_space,
                                    shallow_activation_space, v_space_dimension)
from core.counterexamples import (GENERATORS, ExamplePair, abs_network, abs_shifted, case2a_bias_witness,
                                  identity_family, negative_twin_collapse, nonlocal_pair,
                                  positive_twin_collapse, reducibility_collapse)
from core.diagnostics import classify_shallow, find_twins, is_irreducible
from core.equivalence import check_ps_equivalent, check_scaling_equivalent, is_admissible
from core.errors import DomainError, ReluIdentError
from core.identification import construct_identification_set, validate_identification_set
from core.network import ConstraintSet, Neuron, Params
from core.paths import embed, support_check
from core.recovery import CommandOracle, NetworkOracle, recover_shallow
from utils.config_manager import ConfigManager
from utils.network_io import load_network, params_to_dict, round_params, save_network
from utils.report_manager import ReportManager

logger = logging.getLogger(__name__)

EXIT_OK = 0
EXIT_ERROR = 1
EXIT_MISMATCH = 2

CONSTRAINTS = {
    "none": ConstraintSet.unconstrained,
    "zero-output-bias": ConstraintSet.zero_output_bias,
    "zero-all-bias": ConstraintSet.zero_all_bias,
}

# Resultado de un subcomando: veredicto principal (para --expect), informe
CommandResult = Tuple[str, Dict[str, Any]]


def rational(text: str) -> Fraction:
    try:
        return Fraction(text)
    except (ValueError, ZeroDivisionError):
        raise argparse.ArgumentTypeError(f"no es un racional: {text!r}")


def neuron_pair(text: str) -> Tuple[Neuron, Neuron]:
    """"1:0,1:1" -> ((1, 0), (1, 1))."""
    try:
        first, second = (tuple(int(p) for p in part.split(":")) for part in text.split(","))
        if len(first) != 2 or len(second) != 2:
            raise ValueError
        return first, second
    except ValueError:
        raise argparse.ArgumentTypeError(f"pareja de neuronas no válida: {text!r} (formato capa:i,capa:j)")


def index_list(text: str) -> List[int]:
    try:
        return [int(p) for p in text.split(",") if p.strip()]
    except ValueError:
        raise argparse.ArgumentTypeError(f"lista de índices no válida: {text!r}")


class ReluIdentApp:
    """Aplicación de línea de comandos del identificador de redes ReLU."""

    def __init__(self):
        self.config: Optional[ConfigManager] = None
        self.parser = self.create_parser()
        self.commands: Dict[str, Callable[[argparse.Namespace], CommandResult]] = {
            "embed": self.cmd_embed,
            "compare": self.cmd_compare,
            "analyze": self.cmd_analyze,
            "actspace": self.cmd_actspace,
            "identset": self.cmd_identset,
            "recover": self.cmd_recover,
            "examples": self.cmd_examples,
        }

    # -- parser -------------------------------------------------------------------

    def create_parser(self) -> argparse.ArgumentParser:
        parser = argparse.ArgumentParser(
            prog="relu-ident",
            description="Identificabilidad de redes ReLU: embebido de caminos, equivalencias y reconstrucción")
        common = argparse.ArgumentParser(add_help=False)
        common.add_argument("--config", default="relu_ident_config.json", help="archivo de configuración JSON")
        common.add_argument("--out", help="escribir el informe en este archivo en lugar de stdout")
        common.add_argument("--expect", help="veredicto esperado; si no coincide el código de salida es 2")
        common.add_argument("--history", metavar="FILE", help="añadir la ejecución a un historial JSON")
        common.add_argument("--timings", action="store_true", help="incluir tiempos en el informe")
        common.add_argument("--verbose", action="store_true", help="registro INFO en stderr")
        common.add_argument("--debug", action="store_true", help="registro DEBUG en stderr")

        sampling = argparse.ArgumentParser(add_help=False)
        sampling.add_argument("--seed", type=int, help="semilla (por defecto la de la configuración, 0)")
        sampling.add_argument("--samples", type=int, help="muestras por radio")
        sampling.add_argument("--margin", type=float, help="margen mínimo |z_ν| para X_θ")

        sub = parser.add_subparsers(dest="command", required=True)

        p = sub.add_parser("embed", parents=[common], help="embebido de caminos Φ(θ)")
        p.add_argument("network")
        p.add_argument("--budget", type=int, help="máximo número de caminos")
        p.add_argument("--blocks", metavar="DIR", help="escribir un archivo por neurona de salida con sus bloques")

        p = sub.add_parser("compare", parents=[common], help="equivalencia S / PS entre dos redes")
        p.add_argument("first")
        p.add_argument("second")
        p.add_argument("--mode", choices=["auto", "s", "ps"], default="auto")
        p.add_argument("--ps-budget", type=int, help="presupuesto de la búsqueda de permutaciones")

        p = sub.add_parser("analyze", parents=[common, sampling], help="diagnóstico estructural")
        p.add_argument("network")
        p.add_argument("--constraint", choices=sorted(CONSTRAINTS), default="none")
        p.add_argument("--subset-cap", type=int, help="anchura máxima para la búsqueda exhaustiva de subconjuntos")

        p = sub.add_parser("actspace", parents=[common, sampling], help="espacio de activación Ā(θ)")
        p.add_argument("network")
        p.add_argument("--closed-form", action="store_true", help="forma cerrada (solo L = 2)")

        p = sub.add_parser("identset", parents=[common, sampling], help="conjunto finito de identificación")
        p.add_argument("network")
        p.add_argument("--trials", type=int, help="ensayos por dirección en la validación")
        p.add_argument("--epsilon", type=float, help="radio de las perturbaciones")
        p.add_argument("--no-validate", action="store_true", help="omitir la validación por falsación")

        p = sub.add_parser("recover", parents=[common], help="reconstrucción de redes de una capa oculta")
        source = p.add_mutually_exclusive_group(required=True)
        source.add_argument("--target", help="red JSON usada como oráculo simulado")
        source.add_argument("--exec", dest="exec_command", help="orden externa que actúa de oráculo")
        p.add_argument("--inputs", type=int, help="dimensión de entrada del oráculo externo")
        p.add_argument("--outputs", type=int, default=1, help="dimensión de salida del oráculo externo")
        p.add_argument("--budget", type=int,
                       help="presupuesto de consultas; por defecto query_budget_per_unit·(d+2)·max_units "
                            "(con la configuración inicial 2000·(d+2)·8)")
        p.add_argument("--seed", type=int)
        p.add_argument("--box-radius", type=float)
        p.add_argument("--save-network", metavar="FILE", help="guardar la red reconstruida")

        p = sub.add_parser("examples", parents=[common], help="familias de contraejemplos")
        p.add_argument("name", choices=GENERATORS)
        p.add_argument("--network", help="red base (por defecto la del ejemplo)")
        p.add_argument("--pair", type=neuron_pair, help="neuronas gemelas, formato capa:i,capa:j")
        p.add_argument("--layer", type=int, help="capa del subconjunto reducible")
        p.add_argument("--subset", type=index_list, help="índices del subconjunto reducible, p. ej. 0,1")
        p.add_argument("--t", type=rational, help="parámetro t de las familias abs-shifted e identity")
        p.add_argument("--m", type=rational, help="parámetro M del colapso de gemelas negativas")
        p.add_argument("--epsilon", type=rational, help="ε de los colapsos y del testigo de sesgos")
        p.add_argument("--out-dir", default=".", help="directorio de salida de las redes")
        p.add_argument("--verify-points", type=int, default=1000)
        p.add_argument("--seed", type=int)
        return parser

    def parse_args(self, argv: Optional[Sequence[str]] = None) -> argparse.Namespace:
        return self.parser.parse_args(argv)

    # -- ejecución ------------------------------------------------------------------

    def run(self, argv: Optional[Sequence[str]] = None) -> int:
        return self.execute(self.parse_args(argv))

    def execute(self, args: argparse.Namespace) -> int:
        """Ejecuta un subcomando; 0 éxito, 1 error, 2 veredicto distinto de --expect."""
        self.config = ConfigManager(args.config)
        self.config.update_multiple({
            "seed": getattr(args, "seed", None),
            "samples": getattr(args, "samples", None),
            "margin": getattr(args, "margin", None),
            "subset_cap": getattr(args, "subset_cap", None),
            "validation_trials": getattr(args, "trials", None),
            "validation_epsilon": getattr(args, "epsilon", None) if args.command == "identset" else None,
            "ps_search_budget": getattr(args, "ps_budget", None),
            "box_radius": getattr(args, "box_radius", None),
        })

        started = time.perf_counter()
        history = ReportManager(args.history) if args.history else None
        try:
            verdict, report = self.commands[args.command](args)
        except (ReluIdentError, ValueError, OSError) as e:
            result = e.to_result() if isinstance(e, ReluIdentError) else {
                "success": False, "error": "invalid_argument", "message": str(e)}
            logger.error("%s: %s", args.command, result["message"])
            self._emit(ReportManager.dumps(result), args.out)
            if history:
                history.add_entry({"command": args.command}, success=False, message=result["message"])
            return EXIT_ERROR

        if args.timings:
            report["timings"] = {"total": round(time.perf_counter() - started, 6)}
        self._emit(ReportManager.dumps(report), args.out)
        if history:
            history.add_entry(report, success=True, message=verdict)
        if args.expect is not None and args.expect != verdict:
            logger.warning("veredicto %r distinto del esperado %r", verdict, args.expect)
            return EXIT_MISMATCH
        return EXIT_OK

    @staticmethod
    def _emit(text: str, out: Optional[str]) -> None:
        if out:
            with open(out, 'w', encoding='utf-8') as f:
                f.write(text)
        else:
            print(text, end="")

    def _constraint(self, args: argparse.Namespace) -> ConstraintSet:
        return CONSTRAINTS[args.constraint]()

    # -- subcomandos ----------------------------------------------------------------

    def cmd_embed(self, args: argparse.Namespace) -> CommandResult:
        theta, document = load_network(args.network)
        budget = args.budget or self.config.get("path_budget")
        embedding = embed(theta, budget)
        support = support_check(theta)
        if args.blocks:
            os.makedirs(args.blocks, exist_ok=True)
            for eta, (blk_i, blk_h) in enumerate(zip(embedding.input_blocks, embedding.hidden_blocks)):
                path = os.path.join(args.blocks, f"block_eta{eta}.json")
                with open(path, 'w', encoding='utf-8') as f:
                    f.write(ReportManager.dumps({"eta": eta, "input_block": blk_i, "hidden_block": blk_h}))
        verdict = "supported" if support.verified else "unsupported"
        report = ReportManager.build_report(
            "embed", {"network": document}, None,
            {"n_paths": embedding.index.n_paths, "support": verdict},
            {"paths": embedding.keys, "phi": embedding.phi,
             "support_violations": [k.label() for k in support.violations]})
        return verdict, report

    def cmd_compare(self, args: argparse.Namespace) -> CommandResult:
        theta, doc_a = load_network(args.first)
        theta_prime, doc_b = load_network(args.second)
        settings = self.config.get_path_settings()
        atol = settings["atol"] or 0.0
        witness = None
        if args.mode in ("auto", "s"):
            witness = check_scaling_equivalent(theta, theta_prime, atol=atol)
        if args.mode == "ps" or (args.mode == "auto" and not witness.found):
            witness = check_ps_equivalent(theta, theta_prime, settings["ps_search_budget"], atol=atol)
        report = ReportManager.build_report(
            "compare", {"first": doc_a, "second": doc_b}, None,
            {"relation": witness.relation}, witness.to_dict())
        return witness.relation, report

    def cmd_analyze(self, args: argparse.Namespace) -> CommandResult:
        theta, document = load_network(args.network)
        settings = self.config.get_path_settings()
        constraint = self._constraint(args)
        admissibility = is_admissible(theta)
        twins = find_twins(theta, settings["collinearity_rtol"])
        irreducibility = is_irreducible(theta, settings["subset_cap"], self.config.thread_count())
        verdicts: Dict[str, Any] = {
            "admissible": bool(admissibility),
            "twins": {"positive_pairs": len(twins.positive_pairs()),
                      "negative_pairs": len(twins.negative_pairs())},
            "irreducible": irreducibility.irreducible,
            "irreducibility_witness": irreducibility.to_dict()["witness"],
            "actdim": None,
            "nondegeneracy": None,
        }
        witnesses: Dict[str, Any] = {
            "offending": [{"neuron": list(n), "vector": side} for n, side in admissibility.offending],
            "twins": twins.to_dict(),
            "irreducibility": irreducibility.to_dict(),
        }
        if theta.depth == 2:
            shallow = classify_shallow(theta, constraint, settings["subset_cap"], settings["collinearity_rtol"])
            verdicts["shallow_class"] = shallow.verdict.value
            witnesses["shallow"] = shallow.to_dict()
        verdict = "not-admissible"
        if admissibility and theta.depth >= 2:
            sampling = self.config.get_sampling_settings()
            space = shallow_activation_space(theta) if theta.depth == 2 else sample_activation_space(
                theta, sampling["n_samples"], sampling["seed"], sampling["margin"],
                sampling["radius_sweep"], sampling["max_resample_factor"])
            certificate = nondegeneracy_certificate(theta, constraint, space, sampling["seed"])
            verdicts["actdim"] = space.actdim
            verdicts["nondegeneracy"] = certificate.verdict.value
            witnesses["nondegeneracy"] = certificate.to_dict()
            verdict = certificate.verdict.value
        elif admissibility:
            verdict = "affine"
        seed = self.config.get("seed") if theta.depth > 2 else None
        report = ReportManager.build_report("analyze", {"network": document}, seed, verdicts, witnesses)
        return verdict, report

    def cmd_actspace(self, args: argparse.Namespace) -> CommandResult:
        theta, document = load_network(args.network)
        sampling = self.config.get_sampling_settings()
        if args.closed_form:
            space = shallow_activation_space(theta)
        else:
            space = sample_activation_space(theta, sampling["n_samples"], sampling["seed"], sampling["margin"],
                                            sampling["radius_sweep"], sampling["max_resample_factor"])
        structure = v_space_dimension(theta, space)
        report = ReportManager.build_report(
            "actspace", {"network": document}, None if args.closed_form else sampling["seed"],
            {"actdim": space.actdim, "v_dimension": structure.dimension, "lower_bound": space.lower_bound},
            space.to_dict())
        return str(space.actdim), report

    def cmd_identset(self, args: argparse.Namespace) -> CommandResult:
        theta, document = load_network(args.network)
        sampling = self.config.get_sampling_settings()
        validation = self.config.get_validation_settings()
        space = sample_activation_space(theta, sampling["n_samples"], sampling["seed"], sampling["margin"],
                                        sampling["radius_sweep"], sampling["max_resample_factor"])
        identification_set = construct_identification_set(theta, space, validation["max_halvings"])
        verdicts: Dict[str, Any] = {"size": len(identification_set), "bound": identification_set.bound_used,
                                    "actdim": space.actdim}
        witnesses: Dict[str, Any] = {"identification_set": identification_set.to_dict()}
        verdict = "not-validated"
        if not args.no_validate:
            summary = validate_identification_set(theta, identification_set, validation["trials"],
                                                  validation["epsilon"], validation["seed"],
                                                  self.config.thread_count())
            verdict = "passed" if summary.passed else "falsified"
            witnesses["validation"] = summary.to_dict()
        verdicts["validation"] = verdict
        report = ReportManager.build_report("identset", {"network": document}, sampling["seed"], verdicts, witnesses)
        return verdict, report

    def cmd_recover(self, args: argparse.Namespace) -> CommandResult:
        settings = self.config.get_recovery_settings()
        inputs: Dict[str, Any] = {}
        planted: Optional[Params] = None
        if args.target:
            planted, document = load_network(args.target)
            oracle = NetworkOracle(planted)
            inputs["target"] = document
        else:
            if not args.inputs:
                raise DomainError("--exec necesita --inputs con la dimensión de entrada")
            oracle = CommandOracle(args.exec_command, args.inputs, args.outputs)
            inputs["exec"] = args.exec_command
        model = recover_shallow(oracle, budget=args.budget, threads=self.config.thread_count(), **settings)
        recovered = model.to_params()
        if args.save_network:
            save_network(recovered, args.save_network)
        verdict = "verified" if model.verified else "unverified"
        verdicts: Dict[str, Any] = {"units": model.n_units, "verified": model.verified, "queries": model.queries}
        if planted is not None:
            rounded = round_params(recovered).to_float()
            relation = check_ps_equivalent(planted.to_float(), rounded, atol=1e-6, rtol=1e-6)
            verdicts["relation_to_target"] = relation.relation
        report = ReportManager.build_report("recover", inputs, settings["seed"], verdicts,
                                            {"network": params_to_dict(recovered), "model": model.to_dict()})
        return verdict, report

    def cmd_examples(self, args: argparse.Namespace) -> CommandResult:
        base = load_network(args.network)[0] if args.network else None
        written: List[str] = []
        os.makedirs(args.out_dir, exist_ok=True)
        single = self._single_example(args)
        if single is not None:
            path = os.path.join(args.out_dir, f"{args.name}.json")
            save_network(single, path)
            report = ReportManager.build_report("examples", {"name": args.name}, None, {"generated": True},
                                                {"files": [path]})
            return "written", report

        pair = self._example_pair(args, base)
        for suffix, theta in (("theta", pair.theta), ("theta_prime", pair.theta_prime)):
            path = os.path.join(args.out_dir, f"{args.name}_{suffix}.json")
            save_network(theta, path)
            written.append(path)
        seed = args.seed if args.seed is not None else self.config.get("seed")
        check = pair.verify(n_points=args.verify_points, seed=seed)
        verdict = "passed" if check.passed else "failed"
        verdicts = {"realization_equal": check.realization_equal, "claimed_relation": pair.claimed_relation.value,
                    "claim_holds": check.claim_holds, "points_checked": check.points_checked}
        witnesses = {"files": written, "equality_domain": pair.equality_domain.to_dict(),
                     "max_difference": check.max_difference,
                     "equivalence": None if check.witness is None else check.witness.to_dict()}
        report = ReportManager.build_report("examples", {"name": args.name}, seed, verdicts, witnesses)
        return verdict, report

    @staticmethod
    def _single_example(args: argparse.Namespace) -> Optional[Params]:
        if args.name == "abs":
            return abs_network()
        if args.name == "abs-shifted":
            return abs_shifted(args.t if args.t is not None else 1)
        if args.name == "identity":
            return identity_family(args.t if args.t is not None else 0)
        return None

    @staticmethod
    def _example_pair(args: argparse.Namespace, base: Optional[Params]) -> ExamplePair:
        if args.name == "nonlocal":
            return nonlocal_pair()
        if args.name == "positive-twin":
            theta = base or Params.from_lists([[[1], [2]], [[1, 1]]], [[1, 2], [0]])
            pair = args.pair or _first_pair(theta, positive=True)
            return positive_twin_collapse(theta, pair[0], pair[1],
                                          args.epsilon if args.epsilon is not None else Fraction(1, 10))
        if args.name == "negative-twin":
            theta = base or abs_network()
            pair = args.pair or _first_pair(theta, positive=False)
            return negative_twin_collapse(theta, pair[0], pair[1], args.m if args.m is not None else 1)
        if args.name == "reducibility":
            theta = base or nonlocal_pair().theta
            layer, subset = args.layer, args.subset
            if layer is None or subset is None:
                report = is_irreducible(theta)
                if report.witness is None:
                    raise DomainError("la red no tiene subconjuntos reducibles; indicar --layer y --subset")
                layer, subset = report.witness
            return reducibility_collapse(theta, layer, subset)
        theta = base or abs_network()
        return case2a_bias_witness(theta, args.epsilon if args.epsilon is not None else Fraction(1, 10))


def _first_pair(theta: Params, positive: bool) -> Tuple[Neuron, Neuron]:
    twins = find_twins(theta)
    pairs = twins.positive_pairs() if positive else twins.negative_pairs()
    if not pairs:
        raise DomainError(f"la red no tiene gemelas {'positivas' if positive else 'negativas'}")
    return pairs[0].first, pairs[0].second


def main(argv: Optional[Sequence[str]] = None) -> int:
    return ReluIdentApp().run(argv)


if __name__ == "__main__":
    raise SystemExit(main())
