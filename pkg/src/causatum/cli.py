"""``causatum`` command line.

Exit codes: 0 success, 1 property failure, 2 input error, 3 phi false in
the actual world.  Results go to stdout, diagnostics to stderr.
"""
from __future__ import annotations

import argparse
import os
import re
import sys
from concurrent.futures import ProcessPoolExecutor
from typing import List, Optional, Sequence, TextIO, Tuple

from . import __version__
from .boolformula import (NormalForm, TruthTable, dual_family, max_n, minimal_dual_from_minimal,
                          minimize_family, quine_mccluskey, truth_table)
from .causes import ACTUAL, KINDS, NECESSARY, CauseQuery, cause_verdicts, make_query
from .dsl import (build_model, build_query, document_from_query, emit_family, parse_family, parse_model,
                  pretty_print)
from .errors import CausatumError
from .family import CauseFamily
from .generate import generate_random_model
from .model import intervene, intervene_context, solve
from .verify import Report, corpus_jobs, verify_query

OK, PROPERTY_FAILURE, INPUT_ERROR, AC1_FAILURE = 0, 1, 2, 3
MAX_VERIFY_ENDO = 8


class InputError(Exception):
    def __init__(self, lines: Sequence[str]):
        self.lines = list(lines)


def _assignment(text: str) -> Tuple[str, int]:
    m = re.fullmatch(r"\s*([A-Za-z_][A-Za-z0-9_]*)\s*=\s*(-?[0-9]+)\s*", text)
    if not m:
        raise argparse.ArgumentTypeError(f"expected VAR=VALUE, got {text!r}")
    return m.group(1), int(m.group(2))


def _names(text: str) -> Tuple[str, ...]:
    return tuple(n.strip() for n in text.split(",") if n.strip())


def _read(path: str) -> bytes:
    try:
        with open(path, "rb") as fh:
            return fh.read()
    except OSError as exc:
        raise InputError([f"{path}: cannot read file: {exc.strerror or exc}"])


def _diag_lines(path: str, exc: CausatumError) -> List[str]:
    return [f"{path}:{d}" if d.span is not None else f"{path}: {d}" for d in exc.diagnostics]


def _load_query(path: str, restrict: Optional[Sequence[str]] = None,
                set_exo: Sequence[Tuple[str, int]] = ()) -> CauseQuery:
    try:
        q = build_query(parse_model(_read(path)), restrict)
        if set_exo:
            context = intervene_context(q.context, set_exo, q.model)
            q = make_query(q.model, context, q.phi, q.v_res, allow_phi_vars=True)
        return q
    except CausatumError as exc:
        raise InputError(_diag_lines(path, exc))


def cmd_eval(args, out: TextIO) -> int:
    try:
        model, context = build_model(parse_model(_read(args.model)))
        context = intervene_context(context, args.set_exo, model)
        world = solve(intervene(model, args.do), context)
    except CausatumError as exc:
        raise InputError(_diag_lines(args.model, exc))
    items = [f"{name}={value}" for name, value in world.items()]
    out.write(("\n".join(items) if args.format == "machine" else " ".join(items)) + "\n")
    return OK


def _fail_ac1(path: str) -> int:
    sys.stderr.write(f"{path}: phi does not hold in the actual world, so nothing can be a cause (AC1)\n")
    return AC1_FAILURE


def _setting(pairs) -> str:
    return "{" + ",".join(f"{n}={v}" for n, v in pairs) + "}"


def cmd_causes(args, out: TextIO) -> int:
    q = _load_query(args.model, args.restrict, args.set_exo)
    if not q.v_res:
        raise InputError([f"{args.model}: the restricted variable set is empty"])
    if not q.phi_holds:
        return _fail_ac1(args.model)
    verdicts = dict(cause_verdicts(q, args.kind))
    family = CauseFamily(len(q.v_res), frozenset(verdicts))
    if not args.all:
        family = minimize_family(family)
    text = emit_family(family, q.v_res)
    if args.witness:
        lines = text.splitlines()
        for i, mask in enumerate(family, start=1):
            w = verdicts[mask].witness
            if w is None:
                continue
            extra = f" setting {_setting(w.setting)}"
            if args.kind == ACTUAL:
                extra = f" contingency {_setting(w.contingency)}" + extra
            lines[i] += " #" + extra
        text = "\n".join(lines) + "\n"
    out.write(text)
    return OK


def _is_family_text(data: bytes) -> bool:
    for line in data.decode("utf-8", "replace").splitlines():
        if line.strip():
            return bool(re.match(r"\s*#\s*over\b", line))
    return False


def _note_empty(family: CauseFamily) -> CauseFamily:
    if family.contains_empty:
        sys.stderr.write("note: the empty set belongs to the result; empty causes are not listed\n")
        return family.without_empty()
    return family


def cmd_dual(args, out: TextIO) -> int:
    data = _read(args.input)
    try:
        if _is_family_text(data) or args.over:
            family, order = parse_family(data, args.over)
        else:
            q = _load_query(args.input)
            if not q.phi_holds:
                return _fail_ac1(args.input)
            family = CauseFamily(len(q.v_res), frozenset(m for m, _ in cause_verdicts(q, NECESSARY)))
            if args.from_minimal:
                family = minimize_family(family)
            order = q.v_res
        if len(order) > max_n():
            raise InputError([f"{args.input}: {len(order)} variables exceeds the limit of {max_n()}"])
        if args.from_minimal:
            result = minimal_dual_from_minimal(family, use_qm=args.qm, keep_empty=True)
        else:
            result = dual_family(family, use_qm=args.qm)
    except CausatumError as exc:
        raise InputError(_diag_lines(args.input, exc))
    out.write(emit_family(_note_empty(result), order))
    return OK


def _report_text(rep: Report) -> str:
    if rep.passed:
        return f"{rep.label}: PASS\n"
    lines = [f"{rep.label}: FAIL"]
    lines += [f"  {msg}" for msg in rep.failures]
    lines.append("  --- model ---")
    lines += ["  " + ln for ln in pretty_print(document_from_query(rep.query)).splitlines()]
    for title, fam in (("necessary", rep.necessary), ("sufficient", rep.sufficient)):
        lines.append(f"  --- {title} (all, empty set as {{}}) ---")
        lines += ["  " + ln for ln in emit_family(fam, rep.query.v_res).splitlines()]
    return "\n".join(lines) + "\n"


def _verify_seed(job: Tuple[int, str, int, int]) -> Tuple[bool, str]:
    sub_seed, label, n_endo, max_parents = job
    rep = verify_query(generate_random_model(sub_seed, n_endo=n_endo, max_parents=max_parents), label)
    return rep.passed, _report_text(rep)


def cmd_verify(args, out: TextIO) -> int:
    if args.random:
        if args.model:
            raise InputError(["verify: give either a model file or --random, not both"])
        if not 2 <= args.max_endo <= MAX_VERIFY_ENDO:
            raise InputError([f"verify: --max-endo must be between 2 and {MAX_VERIFY_ENDO}"])
        if args.count < 0:
            raise InputError(["verify: --count must be non-negative"])
        jobs = corpus_jobs(args.seed, args.count, args.max_endo)
        if args.jobs > 1:
            with ProcessPoolExecutor(args.jobs) as pool:
                results = list(pool.map(_verify_seed, jobs, chunksize=16))
        else:
            results = [_verify_seed(job) for job in jobs]
    else:
        if not args.model:
            raise InputError(["verify: give a model file or --random"])
        q = _load_query(args.model)
        if not q.phi_holds:
            return _fail_ac1(args.model)
        rep = verify_query(q, args.model)
        results = [(rep.passed, _report_text(rep))]
    passed = 0
    for ok, text in results:
        passed += ok
        out.write(text)
    out.write(f"passed {passed}/{len(results)}\n")
    return OK if passed == len(results) else PROPERTY_FAILURE


def _truth_table_arg(arg: str) -> Tuple[TruthTable, Sequence[str]]:
    if os.path.exists(arg):
        try:
            family, order = parse_family(_read(arg))
        except CausatumError as exc:
            raise InputError(_diag_lines(arg, exc))
        if family.n > max_n():
            raise InputError([f"{arg}: {family.n} variables exceeds the limit of {max_n()}"])
        return TruthTable.from_minterms(family.n, family.members), order
    m = re.fullmatch(r"(\d+):([\d,\s]*)", arg)
    if m:
        n = int(m.group(1))
        terms = [int(t) for t in m.group(2).replace(" ", "").split(",") if t]
        if n > max_n() or any(t >= 1 << n for t in terms):
            raise InputError([f"qm: minterms do not fit {n} variables (limit {max_n()})"])
        return TruthTable.from_minterms(n, terms), _letters(n)
    if re.fullmatch(r"[01]+", arg):
        n = len(arg).bit_length() - 1
        if 1 << n != len(arg):
            raise InputError([f"qm: truth table length {len(arg)} is not a power of two"])
        if n > max_n():
            raise InputError([f"qm: {n} variables exceeds the limit of {max_n()}"])
        return TruthTable.from_values([c == "1" for c in arg]), _letters(n)
    raise InputError([f"qm: {arg!r} is neither a family file, a 0/1 truth table, nor N:minterms"])


def _letters(n: int) -> List[str]:
    return [chr(ord("a") + i) for i in range(n)] if n <= 26 else [f"x{i}" for i in range(n)]


def format_dnf_lines(nf: NormalForm, names: Sequence[str]) -> str:
    if not nf.clauses:
        return "FALSE\n"
    lines = []
    for clause in nf.clauses:
        lits = [names[i] if pol else "!" + names[i] for i, pol in clause.sorted_literals()]
        lines.append(" ".join(lits) if lits else "TRUE")
    return "\n".join(lines) + "\n"


def cmd_qm(args, out: TextIO) -> int:
    tt, names = _truth_table_arg(args.input)
    result = quine_mccluskey(tt)
    if truth_table(result) != tt:
        sys.stderr.write("qm: internal check failed, minimized formula differs from the input table\n")
        return PROPERTY_FAILURE
    out.write(format_dnf_lines(result, names))
    return OK


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="causatum",
                                     description="Actual, necessary and sufficient causes in finite structural models.")
    parser.add_argument("--version", action="version", version=f"%(prog)s {__version__}")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("eval", help="solve a model, optionally under interventions")
    p.add_argument("model")
    p.add_argument("--do", type=_assignment, action="append", default=[], metavar="VAR=VAL",
                   help="intervene on an endogenous variable")
    p.add_argument("--set-exo", type=_assignment, action="append", default=[], metavar="VAR=VAL",
                   help="override a context value")
    p.add_argument("--format", choices=("text", "machine"), default="text")
    p.set_defaults(func=cmd_eval)

    p = sub.add_parser("causes", help="enumerate causes of phi")
    p.add_argument("model")
    p.add_argument("--kind", choices=KINDS, required=True)
    p.add_argument("--all", action="store_true", help="list non-minimal causes too")
    p.add_argument("--witness", action="store_true", help="append each cause's witness")
    p.add_argument("--restrict", type=_names, help="comma-separated restricted variables")
    p.add_argument("--set-exo", type=_assignment, action="append", default=[], metavar="VAR=VAL")
    p.set_defaults(func=cmd_causes)

    p = sub.add_parser("dual", help="dual family of a family file or of a model's necessary causes")
    p.add_argument("input")
    p.add_argument("--from-minimal", action="store_true",
                   help="input is minimal; output the minimal members of the dual")
    p.add_argument("--qm", action="store_true", help="minimize the CNF with Quine-McCluskey first")
    p.add_argument("--over", type=_names, help="variable order for a family file without header")
    p.set_defaults(func=cmd_dual)

    p = sub.add_parser("verify", help="check duality and the actual-cause properties")
    p.add_argument("model", nargs="?")
    p.add_argument("--random", action="store_true")
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--count", type=int, default=100)
    p.add_argument("--max-endo", type=int, default=5)
    p.add_argument("--jobs", type=int, default=1, help="worker processes; output order is unaffected")
    p.set_defaults(func=cmd_verify)

    p = sub.add_parser("qm", help="Quine-McCluskey minimal DNF")
    p.add_argument("input", help="family file, 0/1 truth table, or N:m1,m2,...")
    p.set_defaults(func=cmd_qm)
    return parser


def main(argv: Optional[Sequence[str]] = None, out: Optional[TextIO] = None) -> int:
    args = build_parser().parse_args(argv)
    out = out or sys.stdout
    try:
        return args.func(args, out)
    except InputError as exc:
        for line in exc.lines:
            sys.stderr.write(line + "\n")
        return INPUT_ERROR
    except CausatumError as exc:
        for d in exc.diagnostics:
            sys.stderr.write(f"{d}\n")
        return INPUT_ERROR


if __name__ == "__main__":
    sys.exit(main())
