"""Command-line entry point.

Subcommands wrap the library one to one: ``match`` builds a half
agreement, ``compare`` and ``bind`` run phase 2 on two half-agreement
files, ``eval`` and ``sweep`` score mappings against gold files (and
can render figures next to the delimited output), and ``simulate``
replays a scenario script as a JSONL event trace.

Exit codes: 0 ok, 1 usage (bad flags or missing files), 2 parse errors,
3 validation errors, 4 runtime errors.
"""

from __future__ import annotations

import argparse
import json
import os
import sys
from pathlib import Path

from . import bundled
from .agreement import PhaseTwoConfig, compare_half_agreements, compose
from .errors import ParseError, SemmatchError, ValidationError
from .evaluation import load_gold, evaluate, threshold_sweep
from .matcher import HalfAgreement, MatchConfig, build_half_agreement
from .p2psim import SimConfig, run_scenario
from .report import (
    full_agreement_table,
    half_agreement_table,
    match_result_table,
    render_report_table,
    save_report_figure,
    save_sweep_figure,
    sweep_to_csv,
)
from .schema import load_schema
from .taxonomy import MEASURES, load_taxonomy

EXIT_OK = 0
EXIT_USAGE = 1
EXIT_PARSE = 2
EXIT_VALIDATION = 3
EXIT_RUNTIME = 4

TAXONOMY_ENV_VAR = "SEMMATCH_TAXONOMY"


class _ArgumentParser(argparse.ArgumentParser):
    # argparse exits with 2 on usage errors; this project reserves 2 for
    # parse errors in input files, so remap usage problems to 1.
    def error(self, message):
        self.print_usage(sys.stderr)
        self.exit(EXIT_USAGE, f"{self.prog}: error: {message}\n")


def _add_taxonomy_flag(parser: argparse.ArgumentParser) -> None:
    parser.add_argument(
        "--taxonomy",
        metavar="PATH",
        default=None,
        help=f"taxonomy file (default: ${TAXONOMY_ENV_VAR} or the bundled taxonomy)",
    )


def _add_match_flags(parser: argparse.ArgumentParser) -> None:
    parser.add_argument("--label-threshold", type=float, default=0.9, metavar="X")
    parser.add_argument("--external-threshold", type=float, default=0.49, metavar="X")
    parser.add_argument("--confidence-threshold", type=float, default=0.75, metavar="X")
    parser.add_argument("--label-weight", type=float, default=0.7, metavar="X")
    parser.add_argument("--external-weight", type=float, default=0.3, metavar="X")
    parser.add_argument("--internal-weight", type=float, default=0.0, metavar="X")
    parser.add_argument("--measure", choices=MEASURES, default="wup")
    parser.add_argument(
        "--one-to-one",
        action=argparse.BooleanOptionalAction,
        default=True,
        help="keep at most one unit per source and per target (default: on)",
    )
    parser.add_argument(
        "--flat-neutral",
        action="store_true",
        help="shift external weight to the label score for depth-1 schemas",
    )


def _add_phase_two_flags(parser: argparse.ArgumentParser) -> None:
    parser.add_argument("--exact-floor", type=float, default=0.9, metavar="X")
    parser.add_argument("--similar-floor", type=float, default=0.5, metavar="X")


def _add_format_flag(parser: argparse.ArgumentParser) -> None:
    parser.add_argument("--format", choices=("json", "table"), default="json")


def _match_config(args: argparse.Namespace) -> MatchConfig:
    return MatchConfig(
        label_threshold=args.label_threshold,
        external_threshold=args.external_threshold,
        confidence_threshold=args.confidence_threshold,
        label_weight=args.label_weight,
        external_weight=args.external_weight,
        internal_weight=args.internal_weight,
        measure=args.measure,
        one_to_one=args.one_to_one,
        flat_neutral=args.flat_neutral,
    )


def _taxonomy(args: argparse.Namespace):
    path = args.taxonomy or os.environ.get(TAXONOMY_ENV_VAR) or bundled.taxonomy_path()
    return load_taxonomy(path)


def _read_half_agreement(path: str) -> HalfAgreement:
    return HalfAgreement.from_json(Path(path).read_text(encoding="utf-8"))


def _cmd_match(args: argparse.Namespace) -> int:
    tax = _taxonomy(args)
    export = load_schema(args.export)
    ontology = load_schema(args.common_ontology)
    half = build_half_agreement(tax, export, ontology, _match_config(args))
    sys.stdout.write(half.to_json() if args.format == "json" else half_agreement_table(half))
    return EXIT_OK


def _cmd_compare(args: argparse.Namespace) -> int:
    requester = _read_half_agreement(args.ha1)
    provider = _read_half_agreement(args.ha2)
    config = PhaseTwoConfig(exact_floor=args.exact_floor, similar_floor=args.similar_floor)
    result = compare_half_agreements(requester, provider, config)
    sys.stdout.write(result.to_json() if args.format == "json" else match_result_table(result))
    return EXIT_OK


def _cmd_bind(args: argparse.Namespace) -> int:
    requester = _read_half_agreement(args.ha1)
    provider = _read_half_agreement(args.ha2)
    full = compose(requester, provider)
    sys.stdout.write(full.to_json() if args.format == "json" else full_agreement_table(full))
    return EXIT_OK


def _load_produced(path: str):
    text = Path(path).read_text(encoding="utf-8")
    try:
        doc = json.loads(text)
    except json.JSONDecodeError as exc:
        raise ParseError(f"invalid JSON in {path}: {exc}", line=exc.lineno) from exc
    if isinstance(doc, dict) and "units" in doc:
        return HalfAgreement.from_dict(doc)
    if isinstance(doc, dict) and "links" in doc:
        from .agreement import FullAgreement

        return FullAgreement.from_dict(doc)
    raise ParseError(f"{path} is neither a half nor a full agreement document")


def _cmd_eval(args: argparse.Namespace) -> int:
    produced = _load_produced(args.produced)
    gold = load_gold(args.gold)
    report = evaluate(produced, gold)
    sys.stdout.write(report.to_json() if args.format == "json" else render_report_table(report))
    if args.plot:
        save_report_figure(report, args.plot, title=gold.schema_pair_id or None)
    return EXIT_OK


def _cmd_sweep(args: argparse.Namespace) -> int:
    fixture = Path(args.fixture_dir)
    export = load_schema(fixture / "export.json")
    ontology = load_schema(fixture / "co.json")
    gold = load_gold(fixture / "gold.tsv")
    grid_text = Path(args.grid).read_text(encoding="utf-8")
    try:
        grid_doc = json.loads(grid_text)
    except json.JSONDecodeError as exc:
        raise ParseError(f"invalid JSON in {args.grid}: {exc}", line=exc.lineno) from exc
    if not isinstance(grid_doc, list) or not all(isinstance(row, dict) for row in grid_doc):
        raise ParseError("grid file must be a JSON array of config objects")
    base = _match_config(args)
    tax = _taxonomy(args)
    grid = [MatchConfig.from_dict(row, base=base) for row in grid_doc]
    rows = threshold_sweep(tax, export, ontology, gold, grid)
    sys.stdout.write(sweep_to_csv(rows))
    if args.plot:
        save_sweep_figure(rows, args.plot, title=fixture.name)
    return EXIT_OK


def _cmd_simulate(args: argparse.Namespace) -> int:
    scenario_file = Path(args.scenario)
    script = scenario_file.read_text(encoding="utf-8")
    tax = _taxonomy(args)
    ontology_path = args.common_ontology or bundled.default_common_ontology_path()
    ontology = load_schema(ontology_path)
    sim = SimConfig(
        seed=args.seed,
        latency_ticks=args.latency_ticks,
        drop_probability=args.drop_probability,
        max_ticks=args.max_ticks,
    )
    phase_two = PhaseTwoConfig(exact_floor=args.exact_floor, similar_floor=args.similar_floor)
    run = run_scenario(
        script,
        taxonomy=tax,
        common_ontology=ontology,
        base_dir=scenario_file.parent,
        match_config=_match_config(args),
        phase_two_config=phase_two,
        sim_config=sim,
    )
    sys.stdout.write(run.to_jsonl())
    if not run.completed:
        print(f"simulation stopped early: {run.stop_reason}", file=sys.stderr)
        return EXIT_RUNTIME
    return EXIT_OK


def build_parser() -> argparse.ArgumentParser:
    parser = _ArgumentParser(
        prog="semmatch",
        description="Schema matchmaking over a shared ontology, with discovery simulation.",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    p_match = sub.add_parser("match", help="build a half agreement for an export schema")
    p_match.add_argument("export", help="export schema JSON file")
    p_match.add_argument("common_ontology", help="common ontology JSON file")
    _add_taxonomy_flag(p_match)
    _add_match_flags(p_match)
    _add_format_flag(p_match)
    p_match.set_defaults(func=_cmd_match)

    p_compare = sub.add_parser("compare", help="phase-2 comparison of two half agreements")
    p_compare.add_argument("ha1", help="requester half agreement JSON file")
    p_compare.add_argument("ha2", help="provider half agreement JSON file")
    _add_phase_two_flags(p_compare)
    _add_format_flag(p_compare)
    p_compare.set_defaults(func=_cmd_compare)

    p_bind = sub.add_parser("bind", help="compose two half agreements into a full agreement")
    p_bind.add_argument("ha1", help="requester half agreement JSON file")
    p_bind.add_argument("ha2", help="provider half agreement JSON file")
    _add_format_flag(p_bind)
    p_bind.set_defaults(func=_cmd_bind)

    p_eval = sub.add_parser("eval", help="score a produced mapping against a gold file")
    p_eval.add_argument("produced", help="half or full agreement JSON file")
    p_eval.add_argument("gold", help="gold mapping TSV file")
    _add_format_flag(p_eval)
    p_eval.add_argument("--plot", metavar="PATH", default=None,
                        help="also render the report as a figure to PATH")
    p_eval.set_defaults(func=_cmd_eval)

    p_sweep = sub.add_parser("sweep", help="evaluate a fixture dir over a config grid")
    p_sweep.add_argument("fixture_dir", help="directory with export.json, co.json, gold.tsv")
    p_sweep.add_argument("grid", help="JSON array of match-config overrides")
    _add_taxonomy_flag(p_sweep)
    _add_match_flags(p_sweep)
    p_sweep.add_argument("--plot", metavar="PATH", default=None,
                         help="also render the sweep curves to PATH")
    p_sweep.set_defaults(func=_cmd_sweep)

    p_sim = sub.add_parser("simulate", help="run a scenario script, print the event trace")
    p_sim.add_argument("scenario", help="scenario script file")
    _add_taxonomy_flag(p_sim)
    _add_match_flags(p_sim)
    _add_phase_two_flags(p_sim)
    p_sim.add_argument("--common-ontology", metavar="PATH", default=None,
                       help="ontology held by the super peer (default: bundled)")
    p_sim.add_argument("--seed", type=int, default=0)
    p_sim.add_argument("--latency-ticks", type=int, default=1)
    p_sim.add_argument("--drop-probability", type=float, default=0.0)
    p_sim.add_argument("--max-ticks", type=int, default=10_000)
    p_sim.set_defaults(func=_cmd_simulate)

    return parser


def main(argv: list[str] | None = None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return int(exc.code or 0)
    try:
        return args.func(args)
    except ParseError as exc:
        print(f"semmatch: parse error: {exc}", file=sys.stderr)
        return EXIT_PARSE
    except ValidationError as exc:
        print(f"semmatch: validation error: {exc}", file=sys.stderr)
        return EXIT_VALIDATION
    except (FileNotFoundError, IsADirectoryError, NotADirectoryError, PermissionError) as exc:
        print(f"semmatch: {exc}", file=sys.stderr)
        return EXIT_USAGE
    except SemmatchError as exc:
        print(f"semmatch: {exc}", file=sys.stderr)
        return EXIT_RUNTIME


def run() -> None:
    raise SystemExit(main())


if __name__ == "__main__":
    run()
