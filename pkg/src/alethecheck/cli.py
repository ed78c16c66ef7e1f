"""Command-line entry point.

Exit codes: 0 valid, 1 invalid, 2 parse, sort or I/O error.
"""

from __future__ import annotations

import argparse
import sys
from pathlib import Path

from .checker import VALID, VALID_MODULO, StrictnessConfig, check_proof
from .elaborator import elaborate_proof, prune
from .errors import AletheError
from .frontend import parse_problem, parse_proof
from .printer import print_proof

EXIT_VALID, EXIT_INVALID, EXIT_ERROR = 0, 1, 2


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        sys.stderr.write(f"error: usage: {message}\n")
        raise SystemExit(EXIT_ERROR)


def build_parser() -> argparse.ArgumentParser:
    parser = _Parser(prog="alethe-check", description="Check, elaborate and prune Alethe proofs.")
    sub = parser.add_subparsers(dest="mode", required=True, parser_class=_Parser)
    for mode in ("check", "elaborate", "prune"):
        p = sub.add_parser(mode)
        p.add_argument("problem", help="SMT-LIB problem file")
        p.add_argument("proof", help="Alethe proof file, or - for stdin")
        p.add_argument("--trans-level", type=int, choices=(1, 2, 3), default=3)
        p.add_argument("--skip-unknown", action="store_true", help="treat unknown rules as assumed")
        p.add_argument("--goal", help="step id the proof must establish")
        p.add_argument("--format", choices=("text", "jsonl"), default="text")
        p.add_argument(
            "--output",
            required=mode != "check",
            help="where to write the transformed proof (- for stdout)",
        )
    return parser


def _read(path: str) -> str:
    if path == "-":
        return sys.stdin.read()
    return Path(path).read_text(encoding="utf-8")


def run(argv: list[str] | None = None) -> int:
    args = build_parser().parse_args(argv)
    config = StrictnessConfig.trans(args.trans_level, skip_unknown=args.skip_unknown)
    try:
        problem = parse_problem(_read(args.problem))
        commands = parse_proof(_read(args.proof), problem)
        report_stream = sys.stdout
        if args.mode != "check":
            if args.mode == "elaborate":
                result = elaborate_proof(commands, config, problem.store)
                commands = result.commands
                if result.unelaborable:
                    sys.stderr.write("unelaborable: " + " ".join(result.unelaborable) + "\n")
            else:
                commands = prune(commands, args.goal)
            text = print_proof(commands)
            if args.output == "-":
                sys.stdout.write(text)
                report_stream = sys.stderr
            else:
                Path(args.output).write_text(text, encoding="utf-8")
            commands = parse_proof(text, problem)
        report = check_proof(problem, commands, config, args.goal)
    except (AletheError, OSError, UnicodeDecodeError, RecursionError) as e:
        sys.stderr.write(f"error: {type(e).__name__}: {e}\n".replace("\n", " ").rstrip() + "\n")
        return EXIT_ERROR
    report_stream.write(report.to_jsonl() if args.format == "jsonl" else report.to_text())
    return EXIT_VALID if report.verdict in (VALID, VALID_MODULO) else EXIT_INVALID


def main() -> None:
    sys.exit(run())


if __name__ == "__main__":
    main()
