"""
Command line entry point: `python -m app <subcommand>`.
"""

from typing import List, Optional
import argparse
import logging
import sys

from app import __version__, exports
from app.config import ConfigManager, dump_config, dump_defaults, settings
from app.errors import RecombinationError
from app.ingest.synthetic import generate_synthetic_corpus, write_jsonl
from app.models import InputFormat, Outcome
from app.simulation.model import ValueModel, feasible_s_set, optimal_s
from app.tasks import PipelineRunner

logger = logging.getLogger(__name__)


def _columns_help() -> str:
    lines = ["artifacts (written to the output directory, each CSV led by a '# recombination-lab' comment line):"]
    for name, (stage, columns) in exports.ARTIFACTS.items():
        lines.append(f"  {name:<26} [{stage}] {columns}")
    lines.append("  *_citations variants      [regress/quantiles --outcome c_p] same columns")
    lines.append("figure data (export-figure-data):")
    for which, files in exports.FIGURE_FILES.items():
        for name in files:
            kind = next(k for k in exports.FIGURE_COLUMNS if name.endswith(f"{k}.csv"))
            lines.append(f"  {name:<30} {exports.FIGURE_COLUMNS[kind]}")
    return "\n".join(lines)


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="recombination-lab",
        description="Word-pair novelty, knowledge differentiation, regression and matching simulation for patent corpora.",
        epilog=_columns_help() + "\n\nexit status: 0 success, 1 computation error, 2 usage or input error",
        formatter_class=argparse.RawDescriptionHelpFormatter,
    )
    parser.add_argument("--version", action="version", version=f"%(prog)s {__version__}")
    parser.add_argument("--config", default=settings.config_path, help="pipeline YAML config (default: %(default)s)")
    parser.add_argument("--output", default=settings.output_dir, help="artifact directory (default: %(default)s)")
    parser.add_argument("--threads", type=int, default=settings.threads, help="worker thread cap (default: %(default)s)")
    parser.add_argument("--log-level", default=settings.log_level, help="logging level (default: %(default)s)")

    sub = parser.add_subparsers(dest="command", required=True, metavar="command")
    epilog = _columns_help()

    def add(name: str, help: str) -> argparse.ArgumentParser:
        return sub.add_parser(name, help=help, description=help, epilog=epilog,
                              formatter_class=argparse.RawDescriptionHelpFormatter)

    ingest = add("ingest", "parse and standardize the patent file into documents.jsonl")
    ingest.add_argument("--input", help="patent file (default: ingest.input_path)")
    ingest.add_argument("--format", choices=[f.value for f in InputFormat], help="input format (default: ingest.format)")

    add("index", "build the novelty index snapshot and patent_novelty.csv")
    add("metrics", "knowledge sweep: write patent_metrics.csv")

    regress = add("regress", "BIC order selection and expectation curve: fit.json, curve_expectation.csv")
    regress.add_argument("--outcome", choices=[o.value for o in Outcome], default=Outcome.NOVELTY.value)

    quantiles = add("quantiles", "conditional quantile curves: curve_quantiles.csv")
    quantiles.add_argument("--outcome", choices=[o.value for o in Outcome], default=Outcome.NOVELTY.value)
    quantiles.add_argument("--order", type=int, help="polynomial order (default: chosen order in fit.json)")

    simulate = add("simulate", "matching simulation: matches.csv, sim_summary.csv, sim_value_quantiles.csv")
    simulate.add_argument("--from-fit", help="take the value polynomial from a fit.json written by regress")
    simulate.add_argument("--seed", type=int, help="override simulation.seed")
    simulate.add_argument("--c0", type=float, help="override simulation.c0")

    opt = add("optimal-s", "print the feasible s set and its maximizers for given K, value coefficients and c0")
    opt.add_argument("--knowledge-size", type=int, required=True, help="K, the agents' knowledge size")
    opt.add_argument("--v0", type=float, help="value intercept (default: simulation.v0)")
    opt.add_argument("--coefficients", help="comma-separated b_1..b_m (default: simulation.value_coefficients)")
    opt.add_argument("--c0", type=float, help="cost slope (default: simulation.c0)")

    export = add("export-figure-data", "write plot-ready CSVs for one figure")
    export.add_argument("figure", choices=list(exports.FIGURE_FILES))

    config = add("config", "print configuration")
    group = config.add_mutually_exclusive_group(required=True)
    group.add_argument("--defaults", action="store_true", help="print every default setting")
    group.add_argument("--show", action="store_true", help="print the effective configuration and its hash")

    synth = add("synthesize", "write a deterministic synthetic patents.jsonl")
    synth.add_argument("--out", default="data/patents.jsonl", help="destination (default: %(default)s)")
    synth.add_argument("--patents", type=int, default=500)
    synth.add_argument("--seed", type=int, help="generator seed (default: top-level seed)")

    run = add("run", "ingest, index, metrics, regress and quantiles in order")
    run.add_argument("--input", help="patent file (default: ingest.input_path)")
    return parser


def _parse_coefficients(text: str) -> List[float]:
    try:
        return [float(x) for x in text.split(",") if x.strip()]
    except ValueError:
        raise argparse.ArgumentTypeError(f"invalid coefficient list '{text}'")


def dispatch(args: argparse.Namespace) -> int:
    if args.command == "config" and args.defaults:
        sys.stdout.write(dump_defaults())
        return 0

    manager = ConfigManager(args.config)
    if args.command == "ingest" and args.format:
        manager.override(**{"ingest.format": args.format})
    if args.command == "simulate":
        if args.seed is not None:
            manager.override(**{"simulation.seed": args.seed})
        if args.c0 is not None:
            manager.override(**{"simulation.c0": args.c0})
    config = manager.config

    if args.command == "config":
        sys.stdout.write(f"# config={manager.config_hash()}\n" + dump_config(config))
        return 0

    if args.command == "optimal-s":
        sim = config.simulation
        coefficients = _parse_coefficients(args.coefficients) if args.coefficients else sim.value_coefficients
        model = ValueModel(
            v0=sim.v0 if args.v0 is None else args.v0,
            c0=sim.c0 if args.c0 is None else args.c0,
            coefficients=tuple(coefficients),
        )
        feasible = feasible_s_set(args.knowledge_size)
        best = optimal_s(args.knowledge_size, model.value, model.cost)
        print("feasible_s: " + ",".join(f"{s:.12g}" for s in feasible))
        print("optimal_s: " + ",".join(f"{s:.12g}" for s in best))
        return 0

    if args.command == "synthesize":
        seed = config.seed if args.seed is None else args.seed
        path = write_jsonl(generate_synthetic_corpus(args.patents, seed), args.out)
        logger.info(f"💾 Wrote synthetic corpus to {path}")
        return 0

    runner = PipelineRunner(config, args.output, args.threads)
    if args.command == "ingest":
        runner.ingest(args.input)
    elif args.command == "index":
        runner.index()
    elif args.command == "metrics":
        runner.metrics()
    elif args.command == "regress":
        runner.regress(Outcome(args.outcome))
    elif args.command == "quantiles":
        runner.quantiles(Outcome(args.outcome), args.order)
    elif args.command == "simulate":
        runner.simulate(args.from_fit)
    elif args.command == "export-figure-data":
        runner.export(args.figure)
    elif args.command == "run":
        runner.run(args.input)
    return 0


def main(argv: Optional[List[str]] = None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    logging.basicConfig(
        level=getattr(logging, str(args.log_level).upper(), logging.INFO),
        format="%(asctime)s %(levelname)s %(name)s: %(message)s",
    )
    try:
        return dispatch(args)
    except argparse.ArgumentTypeError as e:
        parser.error(str(e))
    except RecombinationError as e:
        stage = getattr(e, "failed_stage", None)
        if stage is None:
            stage = args.command
            logger.error(f"❌ {stage} failed: {e}")
        print(f"error: {stage}: {e}", file=sys.stderr)
        return e.exit_code


if __name__ == "__main__":
    sys.exit(main())
