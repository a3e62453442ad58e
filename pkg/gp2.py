#!/usr/bin/env python3
"""
Graph program runner
Run, enumerate and trace graph programs on host graph files, export DOT, verify the corpus
"""

import argparse
import json
import sys
from dataclasses import replace

from dot_export import to_dot, write_dot
from elaborate import StaticError, elaborate
from gp_syntax import ParseError, load_program
from harness import VERIFY_CASES, Harness, HarnessConfig
from host_format import format_host_graph, load_host_graph
from host_graph import GraphError
from interpreter import (
    DEFAULT_BRANCH_CAP,
    DEFAULT_FUEL,
    DEFAULT_SEED,
    ExecConfig,
    StateSpaceLimit,
    outcome_label,
    outcomes,
    run,
)
from rules import RuleError

EXIT_SUCCESS = 0
EXIT_FAIL = 1
EXIT_USAGE = 2
EXIT_DIVERGE = 3
EXIT_CRASH = 4

EXIT_CODES = {"success": EXIT_SUCCESS, "fail": EXIT_FAIL, "diverge": EXIT_DIVERGE, "crash": EXIT_CRASH}

QUICK_CONFIG = HarnessConfig(
    seeds=10,
    corpus_seeds=3,
    random_graphs=10,
    closure_graphs=10,
    exhaustive_nodes=2,
    cycle_graphs=10,
    sp_graphs=10,
    sp_max_edges=6,
    mutants=3,
)


def build_parser():
    parser = argparse.ArgumentParser(
        description="Run graph programs on host graphs",
        formatter_class=argparse.RawDescriptionHelpFormatter,
        epilog="""
Examples:
  %(prog)s run corpus/transclosure/program.gp corpus/transclosure/inputs/cycle4.host --seed 7
  %(prog)s run program.gp graph.host --dot result.dot      # Also write the result as DOT
  %(prog)s outcomes corpus/cyclecheck/program.gp corpus/cyclecheck/inputs/dag3.host --fuel 100
  %(prog)s trace corpus/transclosure/program.gp corpus/transclosure/inputs/cycle4.host
  %(prog)s trace program.gp graph.host --json-trace         # One JSON object per application
  %(prog)s verify seriesparallel                            # Claim checks for one case study
  %(prog)s verify all --quick                               # Reduced sizes, all cases
  %(prog)s export-dot graph.host -o graph.dot
        """,
    )
    parser.add_argument(
        "-q",
        "--quiet",
        action="store_true",
        help="Suppress progress messages (stderr only)",
    )
    commands = parser.add_subparsers(dest="command", required=True)

    def program_command(name, help_text):
        sub = commands.add_parser(name, help=help_text)
        sub.add_argument("program", help="Program file (.gp)")
        sub.add_argument("graph", help="Host graph file (.host)")
        sub.add_argument("--seed", type=int, default=DEFAULT_SEED, help=f"Chooser seed (default: {DEFAULT_SEED})")
        sub.add_argument(
            "--fuel", type=int, default=DEFAULT_FUEL, help=f"Maximum rule applications (default: {DEFAULT_FUEL})"
        )
        sub.add_argument(
            "--branch-cap",
            type=int,
            default=DEFAULT_BRANCH_CAP,
            help=f"Maximum explored states for outcomes (default: {DEFAULT_BRANCH_CAP})",
        )
        return sub

    run_cmd = program_command("run", "Execute once with a seeded chooser and print the result graph")
    run_cmd.add_argument("--dot", help="Also write the result graph as DOT to this path")
    program_command("outcomes", "Print every outcome class with its execution count")
    trace_cmd = program_command("trace", "Print one line per rule application")
    trace_cmd.add_argument("--json-trace", action="store_true", help="Emit JSON lines instead of text")

    verify_cmd = commands.add_parser("verify", help="Run the claim checks of a case study")
    verify_cmd.add_argument("case", choices=[*VERIFY_CASES, "all"], help="Case study to verify")
    verify_cmd.add_argument("--quick", action="store_true", help="Reduced graph counts and sizes")
    verify_cmd.add_argument("--seed", type=int, default=DEFAULT_SEED, help="Generator seed (default: 0)")

    dot_cmd = commands.add_parser("export-dot", help="Render a host graph file as DOT")
    dot_cmd.add_argument("graph", help="Host graph file (.host)")
    dot_cmd.add_argument("-o", "--output", default="-", help='Output file (default: "-" for stdout)')
    return parser


def load_inputs(args):
    """Program and graph from the command line; raises the parse and static errors"""
    program = elaborate(load_program(args.program), path=args.program)
    return program, load_host_graph(args.graph)


def exec_config(args, trace=False):
    return ExecConfig(seed=args.seed, fuel=args.fuel, trace=trace, branch_cap=args.branch_cap)


def print_outcome(outcome):
    if outcome.kind == "success":
        sys.stdout.write(format_host_graph(outcome.graph))
    elif outcome.kind == "crash":
        print(f"CRASH: {outcome.message}")
    else:
        print(outcome_label(outcome))


def cmd_run(args, log):
    program, graph = load_inputs(args)
    log(f"🚀 Running {args.program} on {args.graph} (seed {args.seed}, fuel {args.fuel})")
    result = run(program, graph, exec_config(args))
    print_outcome(result.outcome)
    if args.dot and result.outcome.kind == "success":
        write_dot(result.outcome.graph, args.dot)
        log(f"🖼️  DOT written to {args.dot}")
    log(f"✅ {outcome_label(result.outcome)} after {result.steps} rule applications")
    return EXIT_CODES[result.outcome.kind]


def cmd_outcomes(args, log):
    program, graph = load_inputs(args)
    log(f"🔍 Enumerating outcomes of {args.program} on {args.graph} (fuel {args.fuel})")
    cfg = exec_config(args)
    found = outcomes(program, graph, fuel=cfg.fuel, branch_cap=cfg.branch_cap)
    for i, key in enumerate(sorted(found.successes), 1):
        result, executions = found.successes[key]
        print(f"# success {i}: {executions} executions")
        sys.stdout.write(format_host_graph(result))
    if found.fail:
        print(f"# FAIL: {found.fail} executions")
    if found.diverge:
        print(f"# DIVERGE: {found.diverge} executions")
    for message, executions in sorted(found.crashes.items()):
        print(f"# CRASH {message}: {executions} executions")
    log(f"✅ {len(found.classes)} outcome classes, {found.states} states explored")
    # a single failure-like class is reported like the matching `run` outcome
    if len(found.classes) == 1:
        (only,) = found.classes
        return EXIT_CODES[only[0]]
    return EXIT_SUCCESS


def cmd_trace(args, log):
    program, graph = load_inputs(args)
    result = run(program, graph, exec_config(args, trace=True))
    for step in result.trace:
        print(json.dumps(step.to_json(), sort_keys=True) if args.json_trace else step.format())
    log(f"✅ {outcome_label(result.outcome)} after {result.steps} rule applications")
    return EXIT_CODES[result.outcome.kind]


def cmd_verify(args, log):
    config = QUICK_CONFIG if args.quick else HarnessConfig()
    if args.seed:
        config = replace(config, seed=args.seed)
    harness = Harness(config, log=log)
    harness.verify(args.case)

    summary = harness.summary()
    print(summary.to_string(index=False))
    failures = harness.failures()
    if not failures.empty:
        print("\nFailed checks:")
        print(failures.to_string(index=False))
        log(f"❌ {len(failures)} of {len(harness.rows)} checks failed")
        return EXIT_FAIL
    log(f"✅ All {len(harness.rows)} checks passed")
    return EXIT_SUCCESS


def cmd_export_dot(args, log):
    graph = load_host_graph(args.graph)
    if args.output == "-":
        sys.stdout.write(to_dot(graph))
    else:
        write_dot(graph, args.output)
        log(f"🖼️  DOT written to {args.output}")
    return EXIT_SUCCESS


COMMANDS = {
    "run": cmd_run,
    "outcomes": cmd_outcomes,
    "trace": cmd_trace,
    "verify": cmd_verify,
    "export-dot": cmd_export_dot,
}


def main(argv=None):
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as e:
        return EXIT_USAGE if e.code else EXIT_SUCCESS

    # stdout carries graphs and traces, so progress always goes to stderr
    def log(msg):
        if not args.quiet:
            print(msg, file=sys.stderr)

    try:
        return COMMANDS[args.command](args, log)
    except (ParseError, StaticError, GraphError, RuleError) as e:
        print(str(e), file=sys.stderr)
        return EXIT_USAGE
    except StateSpaceLimit as e:
        print(f"❌ Error: {e}", file=sys.stderr)
        return EXIT_DIVERGE
    except (OSError, ValueError) as e:
        print(f"❌ Error: {e}", file=sys.stderr)
        return EXIT_USAGE


if __name__ == "__main__":
    exit(main())
