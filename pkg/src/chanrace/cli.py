"""Command-line driver.

Exit codes: 0 clean, 1 race found (or verdicts differ for ``compare``),
2 panic, deadlock or step budget exhausted, 3 usage or parse error.
"""

from __future__ import annotations

import argparse
import json
import os
import sys
from pathlib import Path
from typing import Any, Sequence

from . import __version__
from .detectors import DetectorKind, make_detector
from .explorer import DEFAULT_MAX_SCHEDULES, differential, execute, explore_all, verdict_of
from .report import dumps, emit_report, run_with_footprint
from .runtime import (
    FirstScheduler,
    Outcome,
    RandomScheduler,
    ScriptedScheduler,
    ScriptError,
    choice_to_dict,
    run,
)
from .syntax import ParseError, Program, parse

__all__ = ["main", "build_parser", "EXIT_CLEAN", "EXIT_RACE", "EXIT_ERROR", "EXIT_USAGE"]

EXIT_CLEAN = 0
EXIT_RACE = 1
EXIT_ERROR = 2
EXIT_USAGE = 3

OUTPUT_DIR_ENV = "CHANRACE_OUTPUT_DIR"

DETECTORS = [k.value for k in DetectorKind if k is not DetectorKind.NONE]


class UsageError(Exception):
    pass


class _Parser(argparse.ArgumentParser):
    def error(self, message: str) -> None:  # type: ignore[override]
        self.print_usage(sys.stderr)
        print(f"{self.prog}: error: {message}", file=sys.stderr)
        raise SystemExit(EXIT_USAGE)


def _common(p: argparse.ArgumentParser, schedule_default: str) -> None:
    p.add_argument("program", help="path to a .mini program")
    p.add_argument(
        "--schedule",
        choices=["random", "exhaustive", "scripted"],
        default=schedule_default,
    )
    p.add_argument("--seed", type=int, help="seed for --schedule random")
    p.add_argument("--script", help="JSON list of recorded choices for --schedule scripted")
    p.add_argument("--max-steps", type=int, default=10_000)
    p.add_argument("--max-schedules", type=int, default=DEFAULT_MAX_SCHEDULES)
    p.add_argument("--gc-mode", default="eager", help="off | eager | every:N (gc detector only)")
    p.add_argument("--max-reads", type=int, default=None, help="cap on recorded reads per variable")
    p.add_argument("--message-hb", choices=["pre", "post"], default="pre")
    p.add_argument("--output", "-o", help="write the JSON document here instead of stdout")


def build_parser() -> argparse.ArgumentParser:
    parser = _Parser(prog="chanrace", description="Race detection for a channel calculus.")
    parser.add_argument("--version", action="version", version=f"%(prog)s {__version__}")
    sub = parser.add_subparsers(dest="command", required=True, parser_class=_Parser)

    p_run = sub.add_parser("run", help="run a program under one detector")
    _common(p_run, "exhaustive")
    p_run.add_argument("--detector", choices=DETECTORS, default="war")
    p_run.add_argument("--record", help="save the executed choice sequence (single runs)")
    p_run.add_argument("--no-footprint", action="store_true", help="omit footprint samples")

    p_explore = sub.add_parser("explore", help="enumerate every schedule and summarize")
    _common(p_explore, "exhaustive")
    p_explore.add_argument("--detector", choices=DETECTORS, default="war")

    p_cmp = sub.add_parser("compare", help="diff two detectors on identical choice sequences")
    _common(p_cmp, "exhaustive")
    p_cmp.add_argument("--a", required=True, choices=DETECTORS)
    p_cmp.add_argument("--b", required=True, choices=DETECTORS)
    return parser


# ---------------------------------------------------------------------------
# Helpers
# ---------------------------------------------------------------------------


def _load_program(path: str) -> Program:
    try:
        source = Path(path).read_text(encoding="utf-8")
    except OSError as exc:
        raise UsageError(f"cannot read {path}: {exc.strerror}") from None
    try:
        return parse(source)
    except ParseError as exc:
        raise UsageError(f"{path}:{exc}") from None


def _detector(args: argparse.Namespace, kind: str):
    try:
        return make_detector(kind, gc_mode=args.gc_mode, max_reads=args.max_reads, message_hb=args.message_hb)
    except ValueError as exc:
        raise UsageError(str(exc)) from None


def _scheduler(args: argparse.Namespace):
    if args.schedule == "random":
        if args.seed is None:
            raise UsageError("--schedule random requires --seed")
        return RandomScheduler(args.seed)
    if args.schedule == "scripted":
        if not args.script:
            raise UsageError("--schedule scripted requires --script")
        try:
            script = json.loads(Path(args.script).read_text(encoding="utf-8"))
        except (OSError, ValueError) as exc:
            raise UsageError(f"cannot load script {args.script}: {exc}") from None
        if isinstance(script, dict):
            script = script.get("choices", [])
        return ScriptedScheduler(script)
    return FirstScheduler()


def _emit(args: argparse.Namespace, doc: Any, suffix: str) -> None:
    text = dumps(doc)
    target = args.output
    if target is None and os.environ.get(OUTPUT_DIR_ENV):
        out_dir = Path(os.environ[OUTPUT_DIR_ENV])
        out_dir.mkdir(parents=True, exist_ok=True)
        target = str(out_dir / f"{Path(args.program).stem}.{suffix}.json")
    if target is None:
        sys.stdout.write(text)
    else:
        Path(target).write_text(text, encoding="utf-8")


def _summary_exit(outcomes: dict[str, int]) -> int:
    if outcomes.get(Outcome.RACE.value):
        return EXIT_RACE
    if any(outcomes.get(o.value) for o in (Outcome.PANIC, Outcome.DEADLOCK, Outcome.BUDGET)):
        return EXIT_ERROR
    return EXIT_CLEAN


def _outcome_exit(outcome: Outcome) -> int:
    if outcome is Outcome.OK:
        return EXIT_CLEAN
    if outcome is Outcome.RACE:
        return EXIT_RACE
    return EXIT_ERROR


# ---------------------------------------------------------------------------
# Subcommands
# ---------------------------------------------------------------------------


def _cmd_explore(args: argparse.Namespace, program: Program) -> int:
    det = _detector(args, args.detector)
    summary = explore_all(program, det, args.max_steps, args.max_schedules)
    doc = {"detector": args.detector, **summary.to_json()}
    _emit(args, doc, f"{args.detector}.explore")
    return _summary_exit(summary.outcomes)


def _cmd_run(args: argparse.Namespace, program: Program) -> int:
    if args.schedule == "exhaustive":
        return _cmd_explore(args, program)
    det = _detector(args, args.detector)
    scheduler = _scheduler(args)
    try:
        if args.no_footprint:
            result = run(program, det, scheduler, args.max_steps)
        else:
            result = run_with_footprint(program, det, scheduler, args.max_steps)
    except ScriptError as exc:
        raise UsageError(str(exc)) from None
    _emit(args, emit_report(result), args.detector)
    if args.record:
        Path(args.record).write_text(
            json.dumps([choice_to_dict(c) for c in result.choices], indent=2) + "\n", encoding="utf-8"
        )
    return _outcome_exit(result.outcome)


def _cmd_compare(args: argparse.Namespace, program: Program) -> int:
    det_a = _detector(args, args.a)
    det_b = _detector(args, args.b)
    if args.schedule == "exhaustive":
        count, diffs = differential(program, [det_a, det_b], args.max_steps, args.max_schedules)
        rows = [
            {
                "choices": [choice_to_dict(c) for c in d.choices],
                "a": list(d.verdicts[f"{det_a.kind.value}#0"]),
                "b": list(d.verdicts[f"{det_b.kind.value}#1"]),
            }
            for d in diffs
        ]
    else:
        try:
            base = run(program, "none", _scheduler(args), args.max_steps)
        except ScriptError as exc:
            raise UsageError(str(exc)) from None
        va = verdict_of(execute(program, base.choices, det_a))
        vb = verdict_of(execute(program, base.choices, det_b))
        count = 1
        rows = []
        if (va.outcome, va.kind) != (vb.outcome, vb.kind):
            rows.append({"choices": [choice_to_dict(c) for c in base.choices], "a": list(va), "b": list(vb)})
    doc = {"a": args.a, "b": args.b, "schedules": count, "diffs": len(rows), "disagreements": rows}
    _emit(args, doc, f"{args.a}-vs-{args.b}")
    return EXIT_RACE if rows else EXIT_CLEAN


def main(argv: Sequence[str] | None = None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return int(exc.code or 0)
    try:
        program = _load_program(args.program)
        if args.command == "run":
            return _cmd_run(args, program)
        if args.command == "explore":
            return _cmd_explore(args, program)
        return _cmd_compare(args, program)
    except UsageError as exc:
        print(f"chanrace: {exc}", file=sys.stderr)
        return EXIT_USAGE


if __name__ == "__main__":  # pragma: no cover
    sys.exit(main())
