"""Command-line entry point.

Subcommands: lint, fmt, run, replay, bench, serve.
Exit codes: 0 pass, 1 violation/collision/lint error, 2 operational error.
"""

from __future__ import annotations

import argparse
import json
import sys
from pathlib import Path

from udrive.catalog import CatalogError, baseline_parameters, default_catalog
from udrive.commands import OnlineCommand
from udrive.compliance import OUTCOME_VIOLATION, evaluate
from udrive.diagnostics import has_errors
from udrive.formatter import format_program
from udrive.parser import OnlineCommandError, parse_online_command, parse_program
from udrive.scenario import SchemaError, load_scenario
from udrive.sim import OUTCOME_COLLISION, run_simulation
from udrive.tracefile import CorruptTrace, IncompleteTrace, read_trace, write_trace
from udrive.validate import validate_program

EXIT_PASS = 0
EXIT_VIOLATION = 1
EXIT_ERROR = 2


def _collect_program_paths(paths: list[str]) -> list[Path]:
    out: list[Path] = []
    for raw in paths:
        path = Path(raw)
        if path.is_dir():
            out.extend(sorted(path.glob("*.udrv")))
        else:
            out.append(path)
    return out


def cmd_lint(args: argparse.Namespace) -> int:
    cat = default_catalog()
    worst = EXIT_PASS
    for path in _collect_program_paths(args.paths):
        try:
            text = path.read_text(encoding="utf-8")
        except OSError as exc:
            print(f"{path}: {exc}", file=sys.stderr)
            return EXIT_ERROR
        result = parse_program(text)
        diags = list(result.diagnostics)
        if result.program is not None:
            diags.extend(validate_program(result.program, cat))
        for diag in diags:
            print(diag.render(str(path)))
        if has_errors(diags):
            worst = EXIT_VIOLATION
    return worst


def cmd_fmt(args: argparse.Namespace) -> int:
    cat = default_catalog()
    for path in _collect_program_paths(args.paths):
        try:
            text = path.read_text(encoding="utf-8")
        except OSError as exc:
            print(f"{path}: {exc}", file=sys.stderr)
            return EXIT_ERROR
        result = parse_program(text)
        if result.program is None:
            for diag in result.diagnostics:
                print(diag.render(str(path)), file=sys.stderr)
            return EXIT_VIOLATION
        vdiags = validate_program(result.program, cat)
        if has_errors(vdiags):
            for diag in vdiags:
                print(diag.render(str(path)), file=sys.stderr)
            return EXIT_VIOLATION
        formatted = format_program(result.program)
        if args.write:
            path.write_text(formatted, encoding="utf-8")
        else:
            sys.stdout.write(formatted)
    return EXIT_PASS


def load_command_script(path: Path, cat) -> list[tuple[int, OnlineCommand]]:
    """JSON-Lines of {"tick": N, "command": "<text>"}."""
    script: list[tuple[int, OnlineCommand]] = []
    text = path.read_text(encoding="utf-8")
    for line_no, line in enumerate(text.splitlines(), start=1):
        line = line.strip()
        if not line:
            continue
        try:
            obj = json.loads(line)
            tick = int(obj["tick"])
            command_text = obj["command"]
        except (json.JSONDecodeError, KeyError, TypeError, ValueError) as exc:
            raise ValueError(f"{path}:{line_no}: bad command entry ({exc})") from exc
        try:
            command = parse_online_command(command_text, cat)
        except OnlineCommandError as exc:
            raise ValueError(f"{path}:{line_no}: {exc.diagnostic.message}") from exc
        script.append((tick, command))
    script.sort(key=lambda item: item[0])
    return script


def _load_programs(paths: list[str], cat) -> tuple:
    from udrive import ast

    rules = []
    for path in _collect_program_paths(paths):
        text = Path(path).read_text(encoding="utf-8")
        result = parse_program(text)
        if result.program is None:
            raise ValueError(
                "\n".join(d.render(str(path)) for d in result.diagnostics)
            )
        vdiags = validate_program(result.program, cat)
        if has_errors(vdiags):
            raise ValueError("\n".join(d.render(str(path)) for d in vdiags))
        rules.extend(result.program.rules)
    return ast.Program(tuple(rules)) if rules else None


def cmd_run(args: argparse.Namespace) -> int:
    cat = default_catalog()
    try:
        scenario = load_scenario(args.scenario)
        program = _load_programs(args.program or [], cat)
        baseline = baseline_parameters(args.defaults)
        script = (
            load_command_script(Path(args.commands), cat) if args.commands else None
        )
    except (SchemaError, CatalogError, ValueError, OSError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_ERROR

    trace = run_simulation(
        scenario, program, script, max_ticks=args.max_ticks, catalog=cat, baseline=baseline
    )
    report = evaluate(trace)

    out_dir = Path(args.out)
    out_dir.mkdir(parents=True, exist_ok=True)
    write_trace(trace, out_dir / "trace.jsonl")
    (out_dir / "compliance.json").write_text(report.to_json() + "\n", encoding="utf-8")
    summary = (
        f"scenario: {scenario.name}\nticks: {trace.ticks}\nreason: {trace.reason}\n"
        f"outcome: {report.outcome}\n\n{report.render_table()}\n"
    )
    (out_dir / "summary.txt").write_text(summary, encoding="utf-8")
    print(summary, end="")

    if report.outcome in (OUTCOME_VIOLATION, OUTCOME_COLLISION, "timeout"):
        return EXIT_VIOLATION
    return EXIT_PASS


def cmd_replay(args: argparse.Namespace) -> int:
    try:
        trace = read_trace(args.trace)
    except CorruptTrace as exc:
        print(f"error: corrupt trace: {exc}", file=sys.stderr)
        return EXIT_ERROR
    except (IncompleteTrace, OSError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_ERROR
    try:
        report = evaluate(trace)
    except Exception as exc:  # IncompleteTrace from compliance
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_ERROR
    print(f"outcome: {report.outcome}")
    print(report.render_table())
    if report.outcome == "pass":
        return EXIT_PASS
    return EXIT_VIOLATION


def cmd_bench(args: argparse.Namespace) -> int:
    from udrive.bench import render_report, run_bench

    if args.repetitions <= 0:
        print("error: --repetitions must be positive", file=sys.stderr)
        return EXIT_ERROR
    rule_counts = list(range(1, args.max_rules + 1))
    action_counts = list(range(1, args.max_actions + 1))
    report = run_bench(rule_counts, action_counts, args.repetitions)
    print(render_report(report))
    return EXIT_PASS


def cmd_serve(args: argparse.Namespace) -> int:
    from udrive.bridge import serve

    cat = default_catalog()
    try:
        scenario = load_scenario(args.scenario)
        program = _load_programs(args.program or [], cat)
        baseline = baseline_parameters(args.defaults)
    except (SchemaError, CatalogError, ValueError, OSError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_ERROR
    serve(
        scenario,
        program,
        host=args.host,
        port=args.port,
        pace=args.pace,
        max_ticks=args.max_ticks,
        baseline=baseline,
        static_dir=args.console,
        start_paused=args.start_paused,
        out_dir=args.out,
    )
    return EXIT_PASS


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="udrive",
        description="Driving-preference rule language toolchain and simulator.",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    p_lint = sub.add_parser("lint", help="parse and validate rule files")
    p_lint.add_argument("paths", nargs="+", help=".udrv files or directories")
    p_lint.set_defaults(func=cmd_lint)

    p_fmt = sub.add_parser("fmt", help="canonically format rule files")
    p_fmt.add_argument("paths", nargs="+")
    p_fmt.add_argument("--write", action="store_true", help="rewrite files in place")
    p_fmt.set_defaults(func=cmd_fmt)

    p_run = sub.add_parser("run", help="run a scenario and score the trace")
    p_run.add_argument("--scenario", required=True)
    p_run.add_argument("--program", action="append", help="rule file (repeatable)")
    p_run.add_argument("--commands", help="JSON-Lines online command script")
    p_run.add_argument("--out", default="out", help="output directory")
    p_run.add_argument("--max-ticks", type=int, default=3000)
    p_run.add_argument("--defaults", help="baseline parameter config (TOML)")
    p_run.set_defaults(func=cmd_run)

    p_replay = sub.add_parser("replay", help="re-evaluate a stored trace")
    p_replay.add_argument("trace")
    p_replay.set_defaults(func=cmd_replay)

    p_bench = sub.add_parser("bench", help="benchmark parse times")
    p_bench.add_argument("--max-rules", type=int, default=20)
    p_bench.add_argument("--max-actions", type=int, default=10)
    p_bench.add_argument("--repetitions", type=int, default=30)
    p_bench.set_defaults(func=cmd_bench)

    p_serve = sub.add_parser("serve", help="live bridge with websocket clients")
    p_serve.add_argument("--scenario", required=True)
    p_serve.add_argument("--program", action="append")
    p_serve.add_argument("--host", default="127.0.0.1")
    p_serve.add_argument("--port", type=int, default=8710)
    p_serve.add_argument("--pace", type=float, default=1.0, help="sim-time factor")
    p_serve.add_argument("--max-ticks", type=int, default=3000)
    p_serve.add_argument("--defaults")
    p_serve.add_argument("--console", help="serve this directory at /")
    p_serve.add_argument("--start-paused", action="store_true")
    p_serve.add_argument("--out", help="write trace + compliance here at end")
    p_serve.set_defaults(func=cmd_serve)

    return parser


def main(argv: list[str] | None = None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    return args.func(args)


if __name__ == "__main__":
    sys.exit(main())
