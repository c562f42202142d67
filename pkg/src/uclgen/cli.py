"""Command line interface.

Subcommands:
  run     task text -> UCLID5 module, via an LLM backend
  check   validate an existing UCLID5 file
  bench   run a replay suite and report timing/rate aggregates
  repair  one repair round over module-language source, no LLM involved

Exit codes: 0 on success, 1 when the work product is bad (pipeline did
not converge, validation failed), 2 on usage or input errors.
"""

from __future__ import annotations

import argparse
import json
import sys
from pathlib import Path

from .frontend import parse_tolerant, print_child, prune_to_child
from .llm import (
    HttpBackend,
    MockBackend,
    RecordingBackend,
    ReplayBackend,
    Transcript,
)
from .maxsmt import Untypeable
from .pipeline import (
    STATUS_SUCCESS,
    load_suite,
    run_bench,
    run_pipeline,
)
from .repair import repair_round
from .uclid import CompileError, compile_program, print_uclid
from .uclid_check import validate_uclid

EXIT_OK = 0
EXIT_FAILED = 1
EXIT_USAGE = 2


def _build_backend(args: argparse.Namespace):
    if args.backend == "replay":
        if not args.transcript:
            raise SystemExit("--transcript is required with --backend replay")
        return ReplayBackend.from_file(args.transcript, loose=args.loose)
    if args.backend == "mock":
        if not args.responses:
            raise SystemExit("--responses is required with --backend mock")
        raw = json.loads(Path(args.responses).read_text(encoding="utf-8"))
        return MockBackend(raw)
    if not args.url or not args.model:
        raise SystemExit("--url and --model are required with --backend http")
    return HttpBackend(args.url, args.model, api_key_env=args.api_key_env)


def _add_backend_args(p: argparse.ArgumentParser) -> None:
    p.add_argument(
        "--backend", choices=("http", "replay", "mock"), default="http"
    )
    p.add_argument("--url", help="chat-completions endpoint URL")
    p.add_argument("--model", help="model name for the http backend")
    p.add_argument(
        "--api-key-env",
        default="UCLGEN_API_KEY",
        help="environment variable holding the API key (default: %(default)s)",
    )
    p.add_argument("--transcript", help="JSONL transcript for the replay backend")
    p.add_argument(
        "--loose",
        action="store_true",
        help="replay by sequence without verifying prompt hashes",
    )
    p.add_argument("--responses", help="JSON list of responses for the mock backend")
    p.add_argument("--record", help="record all LLM exchanges to this JSONL file")
    p.add_argument("--max-llm-calls", type=int, default=5)
    p.add_argument(
        "--weights",
        choices=("depth", "inverse-depth", "uniform"),
        default="depth",
        help="soft-clause weighting scheme (default: %(default)s)",
    )


def _cmd_run(args: argparse.Namespace) -> int:
    if args.task_file:
        task = Path(args.task_file).read_text(encoding="utf-8")
    elif args.task:
        task = args.task
    else:
        print("a task string or --task-file is required", file=sys.stderr)
        return EXIT_USAGE
    backend = _build_backend(args)
    transcript = None
    if args.record:
        transcript = Transcript()
        backend = RecordingBackend(backend, transcript)
    outcome = run_pipeline(
        task, backend, max_llm_calls=args.max_llm_calls,
        weight_mode=args.weights,
    )
    if transcript is not None:
        transcript.save(args.record)
    for d in outcome.diagnostics:
        print(d, file=sys.stderr)
    if outcome.status != STATUS_SUCCESS:
        print(f"status: {outcome.status}", file=sys.stderr)
        return EXIT_FAILED
    if args.output:
        Path(args.output).write_text(outcome.uclid_text, encoding="utf-8")
    else:
        sys.stdout.write(outcome.uclid_text)
    return EXIT_OK


def _cmd_check(args: argparse.Namespace) -> int:
    try:
        text = Path(args.file).read_text(encoding="utf-8")
    except OSError as exc:
        print(f"cannot read {args.file}: {exc}", file=sys.stderr)
        return EXIT_USAGE
    diags = validate_uclid(text)
    for d in diags:
        print(d)
    return EXIT_OK if not diags else EXIT_FAILED


def _cmd_bench(args: argparse.Namespace) -> int:
    try:
        suite = load_suite(args.suite)
    except (OSError, json.JSONDecodeError, KeyError) as exc:
        print(f"cannot load suite {args.suite}: {exc}", file=sys.stderr)
        return EXIT_USAGE
    report = run_bench(
        suite, max_llm_calls=args.max_llm_calls,
        weight_mode=args.weights, loose=args.loose,
    )
    text = json.dumps(report, indent=2)
    if args.output:
        Path(args.output).write_text(text + "\n", encoding="utf-8")
    else:
        print(text)
    ok = all(t["status"] == STATUS_SUCCESS for t in report["tasks"])
    return EXIT_OK if ok else EXIT_FAILED


def _cmd_repair(args: argparse.Namespace) -> int:
    try:
        source = Path(args.file).read_text(encoding="utf-8")
    except OSError as exc:
        print(f"cannot read {args.file}: {exc}", file=sys.stderr)
        return EXIT_USAGE
    program, report = prune_to_child(parse_tolerant(source))
    if program.module_hole is not None:
        print("input contains no Module class", file=sys.stderr)
        return EXIT_FAILED
    for item in report.to_dict()["dropped"]:
        print(f"dropped line {item['line']}: {item['reason']}", file=sys.stderr)
    outcome = repair_round(program, args.weights)
    if args.uclid:
        if outcome.holes_remaining:
            print(
                f"{outcome.holes_remaining} hole(s) remain; cannot emit UCLID5",
                file=sys.stderr,
            )
            sys.stdout.write(print_child(outcome.program))
            return EXIT_FAILED
        try:
            sys.stdout.write(print_uclid(compile_program(outcome.program)))
        except (CompileError, Untypeable) as exc:
            print(f"compile failed: {exc}", file=sys.stderr)
            return EXIT_FAILED
    else:
        sys.stdout.write(print_child(outcome.program))
    return EXIT_OK


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="uclgen",
        description="Generate and repair UCLID5 models from task text.",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    p_run = sub.add_parser("run", help="turn a task into a UCLID5 module")
    p_run.add_argument("task", nargs="?", help="task description text")
    p_run.add_argument("--task-file", help="read the task from a file")
    p_run.add_argument("-o", "--output", help="write the module here")
    _add_backend_args(p_run)
    p_run.set_defaults(func=_cmd_run)

    p_check = sub.add_parser("check", help="validate a UCLID5 file")
    p_check.add_argument("file")
    p_check.set_defaults(func=_cmd_check)

    p_bench = sub.add_parser("bench", help="run a replay suite")
    p_bench.add_argument("--suite", required=True, help="suite JSON file")
    p_bench.add_argument("-o", "--output", help="write the report here")
    p_bench.add_argument("--max-llm-calls", type=int, default=5)
    p_bench.add_argument(
        "--weights",
        choices=("depth", "inverse-depth", "uniform"),
        default="depth",
    )
    p_bench.add_argument("--loose", action="store_true")
    p_bench.set_defaults(func=_cmd_bench)

    p_rep = sub.add_parser(
        "repair", help="repair module-language source without an LLM"
    )
    p_rep.add_argument("file")
    p_rep.add_argument(
        "--uclid", action="store_true",
        help="compile to UCLID5 when no holes remain",
    )
    p_rep.add_argument(
        "--weights",
        choices=("depth", "inverse-depth", "uniform"),
        default="depth",
    )
    p_rep.set_defaults(func=_cmd_repair)
    return parser


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    return args.func(args)


if __name__ == "__main__":
    sys.exit(main())
