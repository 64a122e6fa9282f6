"""Command-line interface.

Exit codes: 0 success, 1 bad input, 2 a simulated transcript does not match.
"""
from __future__ import annotations

import argparse
import json
import sys
from pathlib import Path
from typing import Sequence

from . import matrix_io, testkit
from .engine import DialogueTrace, first_divergence, run_dialogue
from .matrix_io import (
    MatrixParseError,
    emit_document,
    emit_matrix,
    format_dialogue,
    framework_to_dict,
    matrix_to_framework,
    parse_dialogue,
    parse_matrix,
)
from .model import Framework, FrameworkError
from .rationalizer import AcquiescenceError, RationalizationError, rationalize

OK, INPUT_ERROR, MISMATCH = 0, 1, 2


class InputError(Exception):
    pass


def _read_matrix(arg: str) -> tuple[str, str]:
    """Text and a display name for a file path, ``-`` (stdin) or fixture name."""
    if arg == "-":
        return sys.stdin.read(), "<stdin>"
    path = Path(arg)
    if path.is_file():
        return path.read_text(encoding="utf-8"), arg
    try:
        return matrix_io.fixture_text(arg), arg
    except KeyError:
        raise InputError(f"{arg}: no such file or fixture") from None


def _load(arg: str, opener: str | None = None) -> tuple[Framework, int]:
    text, name = _read_matrix(arg)
    try:
        return matrix_to_framework(parse_matrix(text), opener)
    except (MatrixParseError, FrameworkError) as exc:
        raise InputError(f"{name}: {exc}") from None


def _dialogue_arg(arg: str):
    text = Path(arg).read_text(encoding="utf-8") if Path(arg).is_file() else arg
    try:
        return parse_dialogue(text)
    except RationalizationError as exc:
        raise InputError(str(exc)) from None


def _cells(part, labels) -> str:
    return " ".join("{" + ",".join(labels[s] for s in cell) + "}" for cell in part.cells)


def _print_trace(fw: Framework, trace: DialogueTrace, out) -> None:
    for st in trace.steps:
        print(f"t={st.t} {st.speaker} says {st.opinion}", file=out)
        print(f"  P: {_cells(st.partition_p, fw.labels)}", file=out)
        print(f"  Q: {_cells(st.partition_q, fw.labels)}", file=out)


def cmd_simulate(args, out) -> int:
    fw, omega = _load(args.matrix, args.opener)
    trace = run_dialogue(fw, omega, args.max_steps)
    if args.json:
        doc = {
            "framework": framework_to_dict(fw, omega),
            "transcript": [str(b) for b in trace.transcript],
            "consensus": str(trace.consensus_value),
            "termination_step": trace.termination_step,
            "fixed_point_step": trace.fixed_point_step,
        }
        if args.trace:
            doc["steps"] = [
                {"t": st.t, "speaker": st.speaker, "opinion": str(st.opinion),
                 "partition_p": [list(c) for c in st.partition_p.cells],
                 "partition_q": [list(c) for c in st.partition_q.cells]}
                for st in trace.steps
            ]
        json.dump(doc, out, indent=2)
        out.write("\n")
        return OK
    if args.trace:
        _print_trace(fw, trace, out)
    print(format_dialogue(trace.transcript), file=out)
    print(f"consensus={trace.consensus_value} at step {trace.termination_step}", file=out)
    return OK


def _verify_text(matrix_text: str, opinions) -> tuple[int | None, DialogueTrace]:
    fw, omega = matrix_to_framework(parse_matrix(matrix_text))
    trace = run_dialogue(fw, omega)
    return first_divergence(trace, opinions), trace


def _divergence_message(step: int, opinions, trace: DialogueTrace) -> str:
    want = opinions[min(step, len(opinions)) - 1]
    return f"diverges at step {step}: expected {want}, simulated {trace.opinion_at(step)}"


def cmd_rationalize(args, out) -> int:
    d = _dialogue_arg(args.dialogue)
    try:
        result = rationalize(d, opener=args.opener, verify=False)
    except AcquiescenceError as exc:
        raise InputError(str(exc)) from None
    if args.json:
        text = matrix_io.export_json(result.framework, result.omega_star)
    else:
        text = emit_matrix(result.framework, result.omega_star)
    if args.verify:
        step, trace = _verify_text(emit_matrix(result.framework, result.omega_star), d.opinions)
        if step is not None:
            print("self-check failed: " + _divergence_message(step, d.opinions, trace), file=sys.stderr)
            return MISMATCH
    if args.out:
        Path(args.out).write_text(text, encoding="utf-8")
    else:
        out.write(text)
    if args.stats:
        fw = result.framework
        print(f"states={fw.size} rows={len(fw.partition_p)} columns={len(fw.partition_q)} "
              f"levels={len(result.construction_log)}", file=sys.stderr)
    return OK


def cmd_verify(args, out) -> int:
    text, name = _read_matrix(args.matrix)
    d = _dialogue_arg(args.dialogue)
    try:
        step, trace = _verify_text(text, d.opinions)
    except (MatrixParseError, FrameworkError) as exc:
        raise InputError(f"{name}: {exc}") from None
    if step is None:
        print(f"ok: {format_dialogue(trace.transcript)}", file=out)
        return OK
    print(_divergence_message(step, d.opinions, trace), file=out)
    return MISMATCH


def cmd_fixtures(args, out) -> int:
    if args.list or not args.name:
        print(" ".join(matrix_io.fixture_names()), file=out)
        return OK
    try:
        doc = matrix_io.load_fixture(args.name)
    except KeyError:
        raise InputError(f"unknown fixture {args.name!r}") from None
    if args.print:
        out.write(emit_document(doc))
    else:
        rows, cols = doc.shape
        fw, _ = matrix_to_framework(doc)
        print(f"{args.name}: {rows}x{cols} grid, {fw.size} states, opener {doc.opener}", file=out)
    return OK


def cmd_harness(args, out) -> int:
    argv = ["--max-states", str(args.max_states), "--max-denominator", str(args.max_denominator),
            "--max-dialogue-length", str(args.max_dialogue_length), "--seed", str(args.seed),
            "--cases", str(args.cases)] + (["--stats"] if args.stats else [])
    return testkit.main(argv, out)


def build_parser() -> argparse.ArgumentParser:
    ap = argparse.ArgumentParser(prog="rational-dialogues",
                                 description="Simulate and rationalize Bayesian dialogues.")
    sub = ap.add_subparsers(dest="command", required=True)

    sp = sub.add_parser("simulate", help="run the dialogue of a matrix file or fixture")
    sp.add_argument("matrix", help="matrix file, '-' for stdin, or a fixture name")
    sp.add_argument("--max-steps", type=int, default=10_000)
    sp.add_argument("--trace", action="store_true", help="print both partitions after every step")
    sp.add_argument("--json", action="store_true", help="emit the structured export")
    sp.add_argument("--opener", choices=("p", "q"), help="override the matrix's opener")
    sp.set_defaults(func=cmd_simulate)

    sp = sub.add_parser("rationalize", help="build a matrix whose dialogue reproduces DIALOGUE")
    sp.add_argument("dialogue", help="opinions such as '1/4 1/4 3/4', or a file holding them")
    sp.add_argument("--opener", choices=("p", "q"), default="p")
    sp.add_argument("--out", help="write the matrix here instead of standard output")
    sp.add_argument("--verify", action=argparse.BooleanOptionalAction, default=True,
                    help="re-simulate the emitted matrix before exiting (default on)")
    sp.add_argument("--json", action="store_true", help="emit the structured export")
    sp.add_argument("--stats", action="store_true", help="report construction size on stderr")
    sp.set_defaults(func=cmd_rationalize)

    sp = sub.add_parser("verify", help="check that a matrix produces DIALOGUE")
    sp.add_argument("matrix")
    sp.add_argument("dialogue")
    sp.set_defaults(func=cmd_verify)

    sp = sub.add_parser("fixtures", help="list or print the built-in matrices")
    sp.add_argument("--list", action="store_true")
    sp.add_argument("--name")
    sp.add_argument("--print", action="store_true")
    sp.set_defaults(func=cmd_fixtures)

    sp = sub.add_parser("harness", help="seeded round-trip and consensus checks, JSON summary")
    sp.add_argument("--max-states", type=int, default=8)
    sp.add_argument("--max-denominator", type=int, default=12)
    sp.add_argument("--max-dialogue-length", type=int, default=8)
    sp.add_argument("--seed", type=int, default=0)
    sp.add_argument("--cases", type=int, default=200)
    sp.add_argument("--stats", action="store_true")
    sp.set_defaults(func=cmd_harness)
    return ap


def main(argv: Sequence[str] | None = None, out=None) -> int:
    out = out or sys.stdout
    args = build_parser().parse_args(argv)
    try:
        return args.func(args, out)
    except InputError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return INPUT_ERROR


if __name__ == "__main__":
    raise SystemExit(main())
