"""Command-line interface: ``wfasva <command> --model FILE ...``.

Exit codes: 0 success, 1 usage error, 2 unreadable or invalid model,
3 negative analytic result (not square-summable, divergent quantity),
4 numerical failure.
"""

from __future__ import annotations

import argparse
import csv
import io as _io
import json
import sys
from typing import Sequence

import numpy as np

from . import io
from .analysis import (
    check_l2,
    distance_l2,
    exact_truncation_error_sq,
    hankel_block,
    hankel_svd,
    norm_l2,
)
from .errors import DivergenceError, ModelError, NumericalError
from .gramian import fixed_point_residual, gramians
from .minimize import minimize
from .sva import SvaForm, compute_sva, sva_diagnostics, truncate

EXIT_OK, EXIT_USAGE, EXIT_MODEL, EXIT_NEGATIVE, EXIT_NUMERICAL = 0, 1, 2, 3, 4


class UsageError(Exception):
    pass


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        raise UsageError(f"{self.prog}: error: {message}")


class Output:
    """Collects results, then prints text or a single JSON object."""

    def __init__(self, command: str, as_json: bool, precision: int | None):
        self.command = command
        self.as_json = as_json
        self.precision = 17 if precision is None else precision
        self.fields: dict = {"format_version": io.FORMAT_VERSION, "command": command}
        self.lines: list[str] = []

    def num(self, x: float) -> str:
        return format(float(x), f".{self.precision}g")

    def matrix_lines(self, M: np.ndarray) -> list[str]:
        return [" ".join(self.num(v) for v in row) for row in np.atleast_2d(M)]

    def set(self, key: str, value, text: str | list[str] | None = None) -> None:
        self.fields[key] = value
        if text is not None:
            self.lines.extend([text] if isinstance(text, str) else text)

    def text(self, line: str) -> None:
        self.lines.append(line)

    def emit(self, stream) -> None:
        if self.as_json:
            stream.write(json.dumps(self.fields, indent=2, allow_nan=False) + "\n")
        else:
            for line in self.lines:
                stream.write(line + "\n")


def _jsonable(M) -> list:
    return np.asarray(M, dtype=float).tolist()


def _load(path: str, args) -> io.WfaDocument:
    return io.load_document(path, strict=not args.lenient)


def _word(args, A) -> list[str]:
    if args.symbols is not None:
        return [] if args.symbols == "" else [s.strip() for s in args.symbols.split(",")]
    return A.word(args.string)


def cmd_eval(args, out: Output) -> int:
    A = _load(args.model, args).wfa
    if args.string is None and args.symbols is None:
        raise UsageError("eval: one of --string or --symbols is required")
    x = _word(args, A)
    value = A(x)
    out.set("word", x)
    out.set("value", value, out.num(value))
    return EXIT_OK


def cmd_minimize(args, out: Output) -> int:
    doc = _load(args.model, args)
    res = minimize(doc.wfa, args.rank_tol)
    _write_model(args.output, io.WfaDocument(res.minimal, doc.name, doc.provenance), out)
    out.set("original_dim", res.original_dim)
    out.set("minimal_dim", res.minimal_dim, f"dimension: {res.original_dim} -> {res.minimal_dim}")
    return EXIT_OK


def cmd_gramians(args, out: Output) -> int:
    A = _load(args.model, args).wfa
    G = gramians(A, args.method)
    rp = fixed_point_residual(A, G.gp, "p")
    rs = fixed_point_residual(A, G.gs, "s")
    out.set("method", G.method, f"method: {G.method}")
    out.set("gp", _jsonable(G.gp), ["G_p:", *out.matrix_lines(G.gp)])
    out.set("gs", _jsonable(G.gs), ["G_s:", *out.matrix_lines(G.gs)])
    out.set("residual_p", rp, f"residual_p: {out.num(rp)}")
    out.set("residual_s", rs, f"residual_s: {out.num(rs)}")
    return EXIT_OK


def cmd_sva(args, out: Output) -> int:
    doc = _load(args.model, args)
    S = compute_sva(doc.wfa, args.rank_tol, args.method)
    _write_model(args.output, io.WfaDocument(S.automaton, doc.name, doc.provenance, S.sigmas), out)
    out.set("sigmas", _jsonable(S.sigmas), [out.num(s) for s in S.sigmas])
    if args.report:
        diag = sva_diagnostics(S)
        report = {
            "input_dim": S.source_dim,
            "sva_dim": S.n,
            "minimized": S.minimized,
            "gramian_method": S.gramians.method if S.gramians is not None else None,
            "cholesky_jitter": list(S.jitter),
            "max_identity_residual": diag.max_identity_residual,
            "max_coefficient_excess": diag.max_coefficient_excess,
        }
        out.set("report", report)
        for key, value in report.items():
            if isinstance(value, float):
                value = out.num(value)
            elif isinstance(value, list):
                value = " ".join(out.num(v) for v in value)
            out.text(f"{key}: {value}")
    return EXIT_OK


def _as_sva(doc: io.WfaDocument, args) -> SvaForm:
    if doc.sigmas is not None:
        return SvaForm(doc.wfa, doc.sigmas)
    args.stderr.write("note: model carries no singular values; computing its SVA first\n")
    return compute_sva(doc.wfa, args.rank_tol)


def cmd_truncate(args, out: Output) -> int:
    doc = _load(args.model, args)
    S = _as_sva(doc, args)
    res = truncate(S, args.states)
    _write_model(
        args.output,
        io.WfaDocument(res.truncated, doc.name, doc.provenance, np.asarray(S.sigmas)[: res.kept]),
        out,
    )
    out.set("states", res.kept)
    out.set("bound", res.bound, f"bound: {out.num(res.bound)}")
    if args.exact_error:
        err = exact_truncation_error_sq(S, args.states)
        out.set("exact_error_sq", err, f"exact_error_sq: {out.num(err)}")
    return EXIT_OK


def cmd_norm(args, out: Output) -> int:
    A = _load(args.model, args).wfa
    try:
        value = norm_l2(A)
    except DivergenceError:
        out.set("norm", "infinite", "infinite")
        return EXIT_NEGATIVE
    out.set("norm", value, out.num(value))
    return EXIT_OK


def cmd_distance(args, out: Output) -> int:
    A = _load(args.model, args).wfa
    B = _load(args.other, args).wfa
    try:
        value = distance_l2(A, B)
    except DivergenceError:
        out.set("distance", "infinite", "infinite")
        return EXIT_NEGATIVE
    out.set("distance", value, out.num(value))
    return EXIT_OK


def cmd_check_l2(args, out: Output) -> int:
    A = _load(args.model, args).wfa
    rep = check_l2(A, args.rank_tol)
    out.set("member", rep.member, f"member: {str(rep.member).lower()}")
    out.set("method", rep.method, f"method: {rep.method}")
    out.set("witness", rep.witness, f"witness: {out.num(rep.witness)}")
    out.set("sufficient", rep.sufficient)
    return EXIT_OK if rep.member else EXIT_NEGATIVE


def cmd_hankel(args, out: Output) -> int:
    A = _load(args.model, args).wfa
    Hb = hankel_block(A, args.max_len, args.max_len)
    buf = _io.StringIO()
    writer = csv.writer(buf, lineterminator="\n")
    if args.svd:
        dec = hankel_svd(Hb, args.rank_tol)
        out.set("singular_values", _jsonable(dec.s))
        out.set("rank", dec.rank)
        writer.writerow(["index", "singular_value"])
        for i, s in enumerate(dec.s, 1):
            writer.writerow([i, out.num(s)])
    else:
        out.set("prefixes", ["".join(p) for p in Hb.prefixes])
        out.set("suffixes", ["".join(s) for s in Hb.suffixes])
        out.set("values", _jsonable(Hb.values))
        writer.writerow(["prefix", *("".join(s) for s in Hb.suffixes)])
        for p, row in zip(Hb.prefixes, Hb.values):
            writer.writerow(["".join(p), *(out.num(v) for v in row)])
    out.lines.extend(buf.getvalue().rstrip("\n").split("\n"))
    return EXIT_OK


def _write_model(path: str | None, doc: io.WfaDocument, out: Output) -> None:
    text = io.serialize_document(doc)
    if path is None or path == "-":
        if out.as_json:
            out.set("model", json.loads(text))
        else:
            out.text(text.rstrip("\n"))
    else:
        with open(path, "w", encoding="utf-8") as fh:
            fh.write(text)
        out.set("output", path)


COMMANDS = {
    "eval": cmd_eval,
    "minimize": cmd_minimize,
    "gramians": cmd_gramians,
    "sva": cmd_sva,
    "truncate": cmd_truncate,
    "norm": cmd_norm,
    "distance": cmd_distance,
    "check-l2": cmd_check_l2,
    "hankel": cmd_hankel,
}


def build_parser() -> argparse.ArgumentParser:
    common = _Parser(add_help=False)
    common.add_argument("--json", action="store_true", default=argparse.SUPPRESS,
                        help="print one JSON object instead of text")
    common.add_argument("--precision", type=int, default=argparse.SUPPRESS,
                        help="significant digits for printed numbers (default 17)")
    common.add_argument("--lenient", action="store_true", default=argparse.SUPPRESS,
                        help="keep unknown fields in model files instead of rejecting them")
    common.add_argument("--rank-tol", type=float, default=argparse.SUPPRESS,
                        help="relative rank tolerance (default 1e-10)")

    parser = _Parser(prog="wfasva", parents=[common],
                     description="Weighted automata: l2 analysis and singular value automata.")
    sub = parser.add_subparsers(dest="command", metavar="command", parser_class=_Parser)

    def add(name, help_text):
        p = sub.add_parser(name, parents=[common], help=help_text)
        p.add_argument("--model", required=True, help="model JSON file")
        return p

    p = add("eval", "evaluate the automaton on one word")
    p.add_argument("--string", help="word with one character per symbol; '' is the empty word")
    p.add_argument("--symbols", help="comma-separated symbols, e.g. 'b,a'")

    p = add("minimize", "write a minimal equivalent automaton")
    p.add_argument("-o", "--output")

    p = add("gramians", "print the reachability and observability Gramians")
    p.add_argument("--method", choices=["auto", "linear", "fixed-point"], default="auto")

    p = add("sva", "write the singular value automaton and print its singular values")
    p.add_argument("-o", "--output")
    p.add_argument("--report", action="store_true")
    p.add_argument("--method", choices=["auto", "linear", "fixed-point"], default="auto")

    p = add("truncate", "keep the leading states of a singular value automaton")
    p.add_argument("--states", type=int, required=True)
    p.add_argument("-o", "--output")
    p.add_argument("--exact-error", action="store_true")

    add("norm", "l2 norm, or 'infinite'")

    p = add("distance", "l2 distance between two automata")
    p.add_argument("--other", required=True)

    add("check-l2", "decide square-summability (exit 3 if not)")

    p = add("hankel", "finite Hankel block or its singular values as CSV")
    p.add_argument("--max-len", type=int, required=True)
    p.add_argument("--svd", action="store_true")
    return parser


def main(argv: Sequence[str] | None = None, stdout=None, stderr=None) -> int:
    stdout = sys.stdout if stdout is None else stdout
    stderr = sys.stderr if stderr is None else stderr
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
        if args.command is None:
            raise UsageError(parser.format_usage().rstrip())
    except UsageError as exc:
        stderr.write(f"{exc}\n")
        return EXIT_USAGE
    except SystemExit as exc:  # --help
        return EXIT_OK if not exc.code else EXIT_USAGE
    for key, default in (("json", False), ("precision", None), ("lenient", False),
                         ("rank_tol", 1e-10)):
        if not hasattr(args, key):
            setattr(args, key, default)
    if args.precision is not None and not 1 <= args.precision <= 17:
        stderr.write("--precision must be between 1 and 17\n")
        return EXIT_USAGE

    args.stderr = stderr
    out = Output(args.command, args.json, args.precision)
    try:
        code = COMMANDS[args.command](args, out)
    except UsageError as exc:
        stderr.write(f"{exc}\n")
        return EXIT_USAGE
    except ModelError as exc:
        code, kind, detail = EXIT_MODEL, "model error", str(exc)
    except DivergenceError as exc:
        code, kind, detail = EXIT_NEGATIVE, "divergent", str(exc)
    except (NumericalError, np.linalg.LinAlgError) as exc:
        code, kind, detail = EXIT_NUMERICAL, "numerical failure", str(exc)
    else:
        out.emit(stdout)
        return code
    stderr.write(f"{kind}: {detail}\n")
    if args.json:
        out.fields["error"] = {"exit_code": code, "message": detail}
        out.emit(stdout)
    return code


def main_entry() -> None:
    sys.exit(main())


if __name__ == "__main__":
    main_entry()
