"""
Command-line entry point

Subcommands: optimize, bench, gen-dataset, train, db-build, evaluate.
Each prints one JSON summary line on stdout; logs go to stderr.

Exit codes:
  0  success
  1  usage, input/output or file format error
  2  verification failure (optimize)
  3  at least one bench run failed verification
"""

import argparse
import json
import logging
import math
import re
import sys
from typing import Callable, Dict, List, Optional

from pydantic import ValidationError

from config.presets import (
    GATE_SET_PRESETS, get_available_templates, get_config_template, get_gate_set, merge_with_template,
)
from src.circuits import read_qasm_file, write_qasm_file
from src.gates import GateSet, gate_registry
from src.gates.gate_factory import PREDEFINED_KINDS, register_kind_from_config, register_predefined_kinds
from src.monitoring.logger import end_run_monitoring, get_logger, start_run_monitoring
from src.utils.errors import QoptError, UsageError, VerificationError
from src.utils.settings import get_settings

logger = logging.getLogger(__name__)

EXIT_OK = 0
EXIT_USAGE = 1
EXIT_VERIFICATION = 2
EXIT_BENCH_VERIFICATION = 3


class UsageErrorParser(argparse.ArgumentParser):
    """argparse that raises UsageError instead of exiting with status 2"""

    def error(self, message):
        raise UsageError(f"{self.prog}: {message}")


def emit(summary: Dict) -> None:
    print(json.dumps(summary, sort_keys=True), flush=True)


def parse_grid(text: str) -> int:
    """'pi/4' or '4' -> 4 steps per pi"""
    match = re.fullmatch(r"\s*(?:pi\s*/\s*)?(\d+)\s*", text)
    if not match or int(match.group(1)) < 1:
        raise UsageError(f"grid must look like 'pi/4', got {text!r}")
    return int(match.group(1))


def register_extra_kinds(specs: Optional[List[str]]) -> None:
    for spec in specs or []:
        name, sep, generator = spec.partition("=")
        if not sep or not register_kind_from_config({"name": name, "generator": generator}):
            raise UsageError(f"cannot register gate kind {spec!r}; expected NAME=PAULI, e.g. RYY=YY")


def resolve_gate_set(spec: str) -> GateSet:
    """Preset name, or a comma-separated list of kind names (RYY, RZZ, RZX are registered on demand)"""
    if spec.lower() in GATE_SET_PRESETS:
        return get_gate_set(spec)
    names = [n.strip() for n in spec.split(",") if n.strip()]
    missing = [n for n in names if n.upper() in PREDEFINED_KINDS and gate_registry.get_kind(n) is None]
    if missing:
        register_predefined_kinds(missing)
    try:
        return GateSet.from_names("custom", names)
    except (KeyError, ValueError) as e:
        raise UsageError(f"unknown gate set {spec!r}: {e}") from None


def _synthesis_config(args):
    from src.rewrite import SynthesisConfig
    return SynthesisConfig(**get_config_template("synthesis")) if args.synth else None


def _sampler_limits(args):
    from src.sampling import SamplerLimits
    return SamplerLimits(**merge_with_template("sampler", {
        "max_qubit_span": args.max_qubits, "max_slot_span": args.max_slots,
        "shuffle_moves": args.shuffle_moves}))


def _workers(args) -> int:
    return args.workers if args.workers is not None else get_settings().workers


def _load_db(path):
    from src.rewrite import load_db
    return load_db(path) if path else None


def _load_model(path):
    from src.guidance import load_model
    return load_model(path) if path else None


def cmd_optimize(args) -> int:
    from src.workflows.optimization_workflow import OptimizeConfig, VerificationStatus, optimize

    if args.strategy == "guided" and not args.weights:
        raise UsageError("--strategy guided requires --weights")
    gate_set = resolve_gate_set(args.gateset)
    circuit = read_qasm_file(args.input)
    settings = merge_with_template("optimize", {
        "strategy": args.strategy, "max_iterations": args.iters, "budget_seconds": args.budget_s,
        "target_gates": args.target, "seed": args.seed, "verification": args.verify,
    }, template_name=args.profile)
    config = OptimizeConfig(**settings, limits=_sampler_limits(args), synthesis=_synthesis_config(args),
                            record_timing=not args.no_timing)

    db = _load_db(args.db)
    model = _load_model(args.weights) if args.strategy == "guided" else None
    try:
        result = optimize(circuit, gate_set, db, model, config)
    except VerificationError as e:
        logger.error(f"❌ {e}")
        return EXIT_VERIFICATION

    if args.trace:
        result.trace.write_csv(args.trace)
    if result.verification == VerificationStatus.FAILED:
        return EXIT_VERIFICATION
    write_qasm_file(result.circuit, args.output)
    emit({
        "command": "optimize",
        "initial_gates": len(circuit),
        "final_gates": len(result.circuit),
        "initial_kinds": circuit.kind_counts(),
        "final_kinds": result.circuit.kind_counts(),
        "iterations": result.trace.iterations,
        "verification": result.verification.value,
    })
    return EXIT_OK


def cmd_bench(args) -> int:
    from src.experiments import BenchConfig, BenchOrchestrator

    strategies = [s.strip() for s in args.strategies.split(",") if s.strip()]
    if "guided" in strategies and not args.weights:
        raise UsageError("strategy guided requires --weights")
    gate_set = resolve_gate_set(args.gateset)
    config = BenchConfig(
        circuits=args.circuits, width=args.width, length=args.length, strategies=strategies,
        iterations=args.iters, seed=args.seed, workers=_workers(args), verification=args.verify,
        reference=args.reference, record_timing=not args.no_timing,
        limits=_sampler_limits(args), synthesis=_synthesis_config(args),
    )
    model = _load_model(args.weights) if "guided" in strategies else None
    report = BenchOrchestrator(gate_set, _load_db(args.db), model, config).run(args.out_dir)
    emit({"command": "bench", **report.summary()})
    return EXIT_BENCH_VERIFICATION if report.failed_runs else EXIT_OK


def cmd_gen_dataset(args) -> int:
    from src.datasets import DatasetConfig, LabelConfig, generate_dataset

    gate_set = resolve_gate_set(args.gateset)
    settings = merge_with_template("dataset", {
        "count": args.count, "width": args.width, "length": args.length, "seed": args.seed,
        "chunk_size": args.chunk_size, "probes": args.probes, "anchor_rounds": args.anchor_rounds,
    })
    label = LabelConfig(probes=settings.pop("probes"), anchor_rounds=settings.pop("anchor_rounds"),
                        limits=_sampler_limits(args), synthesis=_synthesis_config(args), blur_sigma=args.blur)
    config = DatasetConfig(**settings, workers=_workers(args), label=label)
    dataset = generate_dataset(gate_set, config, _load_db(args.db), args.out)
    reducible = sum(1 for s in dataset.samples if s.target.any())
    emit({
        "command": "gen-dataset",
        "samples": len(dataset),
        "reducible_fraction": reducible / len(dataset) if len(dataset) else 0.0,
        "out": args.out,
    })
    return EXIT_OK


def cmd_train(args) -> int:
    from src.datasets import read_dataset, split_dataset
    from src.guidance import (
        ArchitectureConfig, TrainConfig, UNetModel, evaluate_attention, prepare_examples, save_model,
        train, write_loss_history,
    )

    dataset = read_dataset(args.dataset)
    if not dataset.samples:
        raise UsageError(f"{args.dataset} holds no samples")
    train_samples, held_out = split_dataset(dataset.samples, args.holdout)
    config = TrainConfig(**merge_with_template("train", {
        "epochs": args.epochs, "batch_size": args.batch_size, "learning_rate": args.lr, "seed": args.seed,
    }))
    architecture = ArchitectureConfig(dropout=args.dropout) if args.dropout is not None else ArchitectureConfig()
    model = UNetModel.initialize(dataset.gate_set, architecture, seed=args.seed)
    model, history = train(model, prepare_examples(train_samples, dataset.gate_set), config)
    save_model(model, args.out)
    if args.history:
        write_loss_history(history, args.history)

    summary = {"command": "train", "samples": len(train_samples), "epochs": len(history),
               "first_loss": history[0] if history else None,
               "final_loss": history[-1] if history else None, "out": args.out}
    if held_out:
        summary["holdout"] = _json_safe(evaluate_attention(model, held_out, dataset.gate_set))
    emit(summary)
    return EXIT_OK


def cmd_db_build(args) -> int:
    from src.rewrite import angle_grid, build_db, save_db

    gate_set = resolve_gate_set(args.gateset)
    settings = merge_with_template("db", {
        "qubits": args.qubits, "depth": args.depth, "max_entries": args.max_entries,
        "angle_steps": parse_grid(args.grid) if args.grid else None,
    })
    db = build_db(gate_set, settings["qubits"], angle_grid(settings["angle_steps"]), settings["depth"],
                  max_entries=settings["max_entries"], workers=_workers(args))
    save_db(db, args.out)
    emit({
        "command": "db-build",
        "entries": len(db),
        "has_identity": 0 in db.length_histogram(),
        "truncated": db.truncated,
        "completed_depth": db.completed_depth,
        "length_histogram": {str(k): v for k, v in db.length_histogram().items()},
        "out": args.out,
    })
    return EXIT_OK


def cmd_evaluate(args) -> int:
    from src.datasets import read_dataset
    from src.guidance import evaluate_attention

    model = _load_model(args.weights)
    dataset = read_dataset(args.dataset)
    emit({"command": "evaluate", **_json_safe(evaluate_attention(model, dataset.samples, dataset.gate_set))})
    return EXIT_OK


def _json_safe(metrics: Dict) -> Dict:
    return {k: (None if isinstance(v, float) and math.isnan(v) else v) for k, v in metrics.items()}


def _add_sampler_flags(parser):
    parser.add_argument("--max-qubits", type=int, help="largest window qubit span")
    parser.add_argument("--max-slots", type=int, help="largest window slot span")
    parser.add_argument("--shuffle-moves", type=int, help="commuting swaps per 1d iteration")
    parser.add_argument("--synth", action="store_true", help="enable continuous-angle synthesis")


def build_parser() -> argparse.ArgumentParser:
    parser = UsageErrorParser(prog="qopt", description="Neural-guided quantum circuit peephole optimizer")
    parser.add_argument("--log-level", help="DEBUG, INFO, WARNING or ERROR")
    parser.add_argument("--metrics-out", help="export timing and run events as JSON")
    parser.add_argument("--extra-kind", action="append", metavar="NAME=PAULI",
                        help="register a rotation kind, e.g. RYY=YY (repeatable)")
    sub = parser.add_subparsers(dest="command", parser_class=UsageErrorParser)

    p = sub.add_parser("optimize", help="optimize one QASM circuit")
    p.add_argument("--in", dest="input", required=True)
    p.add_argument("--out", dest="output", required=True)
    p.add_argument("--gateset", required=True)
    p.add_argument("--db")
    p.add_argument("--weights")
    p.add_argument("--strategy", choices=["1d", "2d", "guided"], default="2d")
    p.add_argument("--iters", type=int)
    p.add_argument("--budget-s", type=float)
    p.add_argument("--target", type=int)
    p.add_argument("--seed", type=int)
    p.add_argument("--trace")
    p.add_argument("--verify", choices=["every", "final", "off"])
    p.add_argument("--profile", choices=get_available_templates("optimize"), default="default",
                   help="optimize settings template")
    p.add_argument("--no-timing", action="store_true", help="write 0 for elapsed times")
    _add_sampler_flags(p)
    p.set_defaults(handler=cmd_optimize)

    p = sub.add_parser("bench", help="compare strategies on random circuits")
    p.add_argument("--gateset", required=True)
    p.add_argument("--db")
    p.add_argument("--weights")
    p.add_argument("--circuits", type=int, default=100)
    p.add_argument("--width", type=int, default=8)
    p.add_argument("--length", type=int, default=100)
    p.add_argument("--strategies", default="1d,2d,guided")
    p.add_argument("--iters", type=int, default=2000)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--workers", type=int, help="process pool size (default QOPT_WORKERS)")
    p.add_argument("--verify", choices=["every", "final", "off"], default="final")
    p.add_argument("--reference", type=int, help="gate count for time_to_target.csv")
    p.add_argument("--no-timing", action="store_true")
    p.add_argument("--out-dir", required=True)
    _add_sampler_flags(p)
    p.set_defaults(handler=cmd_bench)

    p = sub.add_parser("gen-dataset", help="generate labeled training data")
    p.add_argument("--gateset", required=True)
    p.add_argument("--db")
    p.add_argument("--count", type=int)
    p.add_argument("--width", type=int)
    p.add_argument("--length", type=int)
    p.add_argument("--probes", type=int)
    p.add_argument("--anchor-rounds", type=int, help="anchored windows per occupied cell")
    p.add_argument("--seed", type=int)
    p.add_argument("--chunk-size", type=int)
    p.add_argument("--workers", type=int, help="process pool size (default QOPT_WORKERS)")
    p.add_argument("--blur", type=float, default=0.0, help="Gaussian sigma applied to targets")
    p.add_argument("--out", required=True)
    _add_sampler_flags(p)
    p.set_defaults(handler=cmd_gen_dataset)

    p = sub.add_parser("train", help="train the attention model")
    p.add_argument("--dataset", required=True)
    p.add_argument("--epochs", type=int)
    p.add_argument("--batch-size", type=int)
    p.add_argument("--lr", type=float)
    p.add_argument("--seed", type=int)
    p.add_argument("--dropout", type=float)
    p.add_argument("--holdout", type=int, default=0, help="evaluate on the last N samples")
    p.add_argument("--history", help="write epoch,mean_loss CSV")
    p.add_argument("--out", required=True)
    p.set_defaults(handler=cmd_train)

    p = sub.add_parser("db-build", help="build a rewrite database")
    p.add_argument("--gateset", required=True)
    p.add_argument("--qubits", type=int)
    p.add_argument("--depth", type=int)
    p.add_argument("--grid", help="angle grid, e.g. pi/4")
    p.add_argument("--max-entries", type=int)
    p.add_argument("--workers", type=int, help="process pool size (default QOPT_WORKERS)")
    p.add_argument("--out", required=True)
    p.set_defaults(handler=cmd_db_build)

    p = sub.add_parser("evaluate", help="attention quality on a labeled dataset")
    p.add_argument("--weights", required=True)
    p.add_argument("--dataset", required=True)
    p.set_defaults(handler=cmd_evaluate)

    return parser


def main(argv: Optional[List[str]] = None) -> int:
    enhanced = get_logger()
    try:
        args = build_parser().parse_args(argv)
        if args.command is None:
            raise UsageError("a subcommand is required")
        if args.log_level:
            enhanced.set_level(args.log_level)
        register_extra_kinds(args.extra_kind)
    except UsageError as e:
        print(str(e), file=sys.stderr)
        return EXIT_USAGE

    handler: Callable = args.handler
    start_run_monitoring(args.command)
    try:
        code = handler(args)
    except (UsageError, ValidationError) as e:
        logger.error(f"❌ Invalid arguments: {e}")
        code = EXIT_USAGE
    except (QoptError, OSError, KeyError, ValueError) as e:
        logger.error(f"❌ {args.command} failed: {e}")
        code = EXIT_USAGE
    end_run_monitoring(success=code == EXIT_OK)

    if args.metrics_out:
        enhanced.export_metrics(args.metrics_out)
    return code
