"""Text format for models, contexts, queries and cause families.

Model files (``.scm.txt``)::

    # wet ground
    exo R: bool
    endo S: bool
    endo W: bool
    endo F: bool
    def S = !R
    def W = R | S
    def F = W
    context R = 1
    phi F == 1

Operators bind, tightest first: ``==``, ``!``, ``&``, ``|``, ``->`` (right
associative).  ``if c then a else b`` extends as far right as possible.
``==`` takes any primary on both sides, a superset of ``ID == INT``.

Family files list one member per line under a ``# over A,B,...`` header.
"""
from __future__ import annotations

import re
from dataclasses import dataclass, field
from typing import Dict, Iterator, List, Optional, Sequence, Tuple, Union

from .causes import CauseQuery, make_query
from .errors import Diagnostic, ParseError, SourceSpan, ValidationError
from .family import CauseFamily, bits
from .model import (And, CausalModel, Const, Eq, Expr, Implies, Ite, Not, Or, Range, Signature, Var,
                    make_context, validate, variables)

KEYWORDS = frozenset({"exo", "endo", "def", "context", "phi", "restrict", "bool", "if", "then", "else"})
STATEMENT_KEYWORDS = frozenset({"exo", "endo", "def", "context", "phi", "restrict"})
MAX_DEPTH = 100

_TOKEN = re.compile(r"""
    (?P<ws>[ \t\r\n]+)
  | (?P<comment>\#[^\n]*)
  | (?P<int>-?[0-9]+)
  | (?P<id>[A-Za-z_][A-Za-z0-9_]*)
  | (?P<op>->|==|[:=,{}()!&|])
""", re.VERBOSE)


@dataclass(frozen=True)
class Token:
    kind: str  # "id", "int", "kw", "op", "eof"
    text: str
    span: SourceSpan


class _Offsets:
    """Character index -> (line, column, byte offset)."""

    def __init__(self, text: str):
        self.text = text
        self.ascii = text.isascii()
        self.line_starts = [0] + [m.end() for m in re.finditer("\n", text)]
        if not self.ascii:
            self.byte_at = [0]
            for ch in text:
                self.byte_at.append(self.byte_at[-1] + len(ch.encode("utf-8", "surrogatepass")))

    def byte(self, i: int) -> int:
        return i if self.ascii else self.byte_at[i]

    def span(self, start: int, end: int) -> SourceSpan:
        lo, hi = 0, len(self.line_starts) - 1
        while lo < hi:
            mid = (lo + hi + 1) // 2
            if self.line_starts[mid] <= start:
                lo = mid
            else:
                hi = mid - 1
        return SourceSpan(lo + 1, start - self.line_starts[lo] + 1, self.byte(start), self.byte(end))


def _decode(data: Union[str, bytes]) -> str:
    if isinstance(data, str):
        return data
    try:
        text = data.decode("utf-8")
    except UnicodeDecodeError as exc:
        prefix = data[:exc.start]
        line = prefix.count(b"\n") + 1
        col = exc.start - (prefix.rfind(b"\n") + 1) + 1
        raise ParseError(Diagnostic("LexError", "input is not valid UTF-8",
                                    span=SourceSpan(line, col, exc.start, exc.end)))
    return text


def tokenize(text: str) -> Tuple[List[Token], List[Diagnostic]]:
    offsets = _Offsets(text)
    tokens: List[Token] = []
    diags: List[Diagnostic] = []
    i = 0
    if text.startswith("\ufeff"):
        i = 1
    while i < len(text):
        m = _TOKEN.match(text, i)
        if m is None:
            j = i + 1
            while j < len(text) and _TOKEN.match(text, j) is None:
                j += 1
            diags.append(Diagnostic("LexError", f"unexpected character {text[i]!r}", span=offsets.span(i, j)))
            i = j
            continue
        kind = m.lastgroup
        if kind not in ("ws", "comment"):
            word = m.group()
            if kind == "id" and word in KEYWORDS:
                kind = "kw"
            tokens.append(Token(kind, word, offsets.span(m.start(), m.end())))
        i = m.end()
    tokens.append(Token("eof", "", offsets.span(len(text), len(text))))
    return tokens, diags


# -- document ----------------------------------------------------------------

_span = dict(default=None, compare=False, repr=False, kw_only=True)


@dataclass(frozen=True)
class Decl:
    name: str
    range: Range
    exogenous: bool
    span: Optional[SourceSpan] = field(**_span)


@dataclass(frozen=True)
class Definition:
    name: str
    expr: Expr
    span: Optional[SourceSpan] = field(**_span)


@dataclass(frozen=True)
class ContextEntry:
    name: str
    value: int
    span: Optional[SourceSpan] = field(**_span)


@dataclass(frozen=True)
class PhiStmt:
    expr: Expr
    span: Optional[SourceSpan] = field(**_span)


@dataclass(frozen=True)
class Restrict:
    names: Tuple[str, ...]
    span: Optional[SourceSpan] = field(**_span)


Statement = Union[Decl, Definition, ContextEntry, PhiStmt, Restrict]


@dataclass(frozen=True)
class ModelDocument:
    statements: Tuple[Statement, ...] = ()

    def _of(self, cls) -> list:
        return [s for s in self.statements if isinstance(s, cls)]

    @property
    def decls(self) -> List[Decl]:
        return self._of(Decl)

    @property
    def definitions(self) -> List[Definition]:
        return self._of(Definition)

    @property
    def context(self) -> Dict[str, int]:
        return {c.name: c.value for c in self._of(ContextEntry)}

    @property
    def phi(self) -> Optional[Expr]:
        found = self._of(PhiStmt)
        return found[0].expr if found else None

    @property
    def restrict(self) -> Optional[Tuple[str, ...]]:
        found = self._of(Restrict)
        return found[0].names if found else None


# -- parser ------------------------------------------------------------------


class _Bail(Exception):
    def __init__(self, diag: Diagnostic):
        self.diag = diag


class _Parser:
    def __init__(self, tokens: List[Token]):
        self.tokens = tokens
        self.pos = 0
        self.depth = 0
        self.open_parens: List[Token] = []

    @property
    def tok(self) -> Token:
        return self.tokens[self.pos]

    def advance(self) -> Token:
        tok = self.tokens[self.pos]
        if tok.kind != "eof":
            self.pos += 1
        return tok

    def at(self, text: str) -> bool:
        return self.tok.kind in ("op", "kw") and self.tok.text == text

    def error(self, message: str, tok: Optional[Token] = None) -> _Bail:
        tok = tok or self.tok
        return _Bail(Diagnostic("SyntaxError", message, span=tok.span))

    def found(self) -> str:
        return "end of input" if self.tok.kind == "eof" else repr(self.tok.text)

    def expect(self, text: str) -> Token:
        if not self.at(text):
            raise self.error(f"expected '{text}', found {self.found()}")
        return self.advance()

    def ident(self) -> Token:
        if self.tok.kind != "id":
            what = f"keyword '{self.tok.text}'" if self.tok.kind == "kw" else self.found()
            raise self.error(f"expected a variable name, found {what}")
        return self.advance()

    def integer(self) -> Tuple[int, Token]:
        if self.tok.kind != "int":
            raise self.error(f"expected an integer, found {self.found()}")
        tok = self.advance()
        return int(tok.text), tok

    def join(self, first: SourceSpan, last: SourceSpan) -> SourceSpan:
        return SourceSpan(first.line, first.column, first.start, max(first.start, last.end))

    def last_span(self) -> SourceSpan:
        return self.tokens[self.pos - 1].span if self.pos else self.tok.span

    # statements

    def statement(self) -> Statement:
        tok = self.tok
        if tok.kind != "kw" or tok.text not in STATEMENT_KEYWORDS:
            raise self.error(f"expected a statement (exo, endo, def, context, phi, restrict), found {self.found()}")
        self.advance()
        if tok.text in ("exo", "endo"):
            name = self.ident()
            self.expect(":")
            rng = self.range()
            return Decl(name.text, rng, tok.text == "exo", span=self.join(tok.span, self.last_span()))
        if tok.text == "def":
            name = self.ident()
            self.expect("=")
            expr = self.expr()
            return Definition(name.text, expr, span=self.join(tok.span, self.last_span()))
        if tok.text == "context":
            name = self.ident()
            self.expect("=")
            value, _ = self.integer()
            return ContextEntry(name.text, value, span=self.join(tok.span, self.last_span()))
        if tok.text == "phi":
            expr = self.expr()
            return PhiStmt(expr, span=self.join(tok.span, self.last_span()))
        names = [self.ident().text]
        while self.at(","):
            self.advance()
            names.append(self.ident().text)
        return Restrict(tuple(names), span=self.join(tok.span, self.last_span()))

    def range(self) -> Range:
        if self.at("bool"):
            self.advance()
            return Range.boolean()
        self.expect("{")
        values = [self.integer()[0]]
        while self.at(","):
            self.advance()
            values.append(self.integer()[0])
        self.expect("}")
        return Range(tuple(values))

    # expressions

    def expr(self) -> Expr:
        self.depth += 1
        if self.depth > MAX_DEPTH:
            raise self.error("expression nested too deeply")
        try:
            return self.implies()
        finally:
            self.depth -= 1

    def implies(self) -> Expr:
        left = self.disjunction()
        if self.at("->"):
            self.advance()
            right = self.expr()
            return Implies(left, right, span=self.join(left.span, right.span))
        return left

    def disjunction(self) -> Expr:
        left = self.conjunction()
        while self.at("|"):
            self.advance()
            right = self.conjunction()
            left = Or(left, right, span=self.join(left.span, right.span))
        return left

    def conjunction(self) -> Expr:
        left = self.negation()
        while self.at("&"):
            self.advance()
            right = self.negation()
            left = And(left, right, span=self.join(left.span, right.span))
        return left

    def negation(self) -> Expr:
        if self.at("!"):
            bang = self.advance()
            self.depth += 1
            if self.depth > MAX_DEPTH:
                raise self.error("expression nested too deeply")
            try:
                operand = self.negation()
            finally:
                self.depth -= 1
            return Not(operand, span=self.join(bang.span, operand.span))
        return self.comparison()

    def comparison(self) -> Expr:
        left = self.primary()
        if self.at("=="):
            self.advance()
            right = self.primary()
            return Eq(left, right, span=self.join(left.span, right.span))
        return left

    def primary(self) -> Expr:
        tok = self.tok
        if tok.kind == "int":
            self.advance()
            return Const(int(tok.text), span=tok.span)
        if tok.kind == "id":
            self.advance()
            return Var(tok.text, span=tok.span)
        if self.at("("):
            self.open_parens.append(self.advance())
            inner = self.expr()
            if not self.at(")"):
                opener = self.open_parens[-1]
                raise _Bail(Diagnostic("SyntaxError",
                                       f"unclosed parenthesis opened at {opener.span}, found {self.found()}",
                                       span=self.tok.span))
            self.open_parens.pop()
            self.advance()
            return inner
        if self.at("if"):
            self.advance()
            cond = self.expr()
            self.expect("then")
            then = self.expr()
            self.expect("else")
            orelse = self.expr()
            return Ite(cond, then, orelse, span=self.join(tok.span, orelse.span))
        if tok.kind == "eof" and self.open_parens:
            opener = self.open_parens[-1]
            raise self.error(f"unclosed parenthesis opened at {opener.span}, input ended")
        raise self.error(f"expected an expression, found {self.found()}")

    def recover(self, start: int) -> None:
        self.open_parens.clear()
        self.depth = 0
        if self.pos == start:
            self.advance()
        while self.tok.kind != "eof" and not (self.tok.kind == "kw" and self.tok.text in STATEMENT_KEYWORDS):
            self.advance()


def _check_names(statements: Sequence[Statement]) -> List[Diagnostic]:
    diags: List[Diagnostic] = []
    declared: Dict[str, Decl] = {}
    for s in statements:
        if isinstance(s, Decl):
            if s.name in declared:
                diags.append(Diagnostic("DuplicateDecl", f"'{s.name}' is already declared at {declared[s.name].span}",
                                        s.name, s.span))
            else:
                declared[s.name] = s
    seen_phi = seen_restrict = None
    for s in statements:
        if isinstance(s, Definition):
            if s.name not in declared:
                diags.append(Diagnostic("UnknownVariable", f"definition of undeclared '{s.name}'", s.name, s.span))
            diags.extend(_unknown_in(s.expr, declared))
        elif isinstance(s, ContextEntry):
            if s.name not in declared:
                diags.append(Diagnostic("UnknownVariable", f"context for undeclared '{s.name}'", s.name, s.span))
            elif not declared[s.name].exogenous:
                diags.append(Diagnostic("UnknownVariable", f"context entry for endogenous '{s.name}'",
                                        s.name, s.span))
        elif isinstance(s, PhiStmt):
            if seen_phi is not None:
                diags.append(Diagnostic("DuplicateDecl", f"phi already given at {seen_phi.span}", span=s.span))
            seen_phi = seen_phi or s
            diags.extend(_unknown_in(s.expr, declared))
        elif isinstance(s, Restrict):
            if seen_restrict is not None:
                diags.append(Diagnostic("DuplicateDecl", f"restrict already given at {seen_restrict.span}",
                                        span=s.span))
            seen_restrict = seen_restrict or s
            for name in s.names:
                if name not in declared:
                    diags.append(Diagnostic("UnknownVariable", f"restrict names undeclared '{name}'", name, s.span))
    return diags


def _unknown_in(expr: Expr, declared) -> List[Diagnostic]:
    from .model import walk
    return [Diagnostic("UnknownVariable", f"'{node.name}' is not declared", node.name, node.span)
            for node in walk(expr) if isinstance(node, Var) and node.name not in declared]


def parse_model(text: Union[str, bytes]) -> ModelDocument:
    """Parse a model document; raises :class:`ParseError` with every diagnostic found."""
    text = _decode(text)
    tokens, diags = tokenize(text)
    parser = _Parser(tokens)
    statements: List[Statement] = []
    while parser.tok.kind != "eof":
        start = parser.pos
        try:
            statements.append(parser.statement())
        except _Bail as bail:
            diags.append(bail.diag)
            parser.recover(start)
    if not diags:
        diags = _check_names(statements)
    if diags:
        raise ParseError(diags)
    return ModelDocument(tuple(statements))


def parse_expression(text: str) -> Expr:
    tokens, diags = tokenize(text)
    if diags:
        raise ParseError(diags)
    parser = _Parser(tokens)
    try:
        expr = parser.expr()
        if parser.tok.kind != "eof":
            raise parser.error(f"unexpected {parser.found()} after expression")
    except _Bail as bail:
        raise ParseError(bail.diag)
    return expr


# -- pretty printing ----------------------------------------------------------

_ITE, _IMP, _OR, _AND, _NOT, _EQ, _ATOM = range(7)


def format_expr(expr: Expr, ctx: int = _ITE) -> str:
    if isinstance(expr, Const):
        return str(expr.value)
    if isinstance(expr, Var):
        return expr.name
    if isinstance(expr, Not):
        text, level = "!" + format_expr(expr.operand, _NOT), _NOT
    elif isinstance(expr, And):
        text, level = f"{format_expr(expr.left, _AND)} & {format_expr(expr.right, _NOT)}", _AND
    elif isinstance(expr, Or):
        text, level = f"{format_expr(expr.left, _OR)} | {format_expr(expr.right, _AND)}", _OR
    elif isinstance(expr, Implies):
        text, level = f"{format_expr(expr.left, _OR)} -> {format_expr(expr.right, _IMP)}", _IMP
    elif isinstance(expr, Eq):
        text, level = f"{format_expr(expr.left, _ATOM)} == {format_expr(expr.right, _ATOM)}", _EQ
    elif isinstance(expr, Ite):
        text = (f"if {format_expr(expr.cond)} then {format_expr(expr.then)} "
                f"else {format_expr(expr.orelse)}")
        level = _ITE
    else:
        raise TypeError(f"not an expression: {expr!r}")
    return f"({text})" if level < ctx else text


def format_range(rng: Range) -> str:
    if rng.values == (0, 1):
        return "bool"
    return "{" + ", ".join(str(v) for v in rng.values) + "}"


def format_statement(s: Statement) -> str:
    if isinstance(s, Decl):
        return f"{'exo' if s.exogenous else 'endo'} {s.name}: {format_range(s.range)}"
    if isinstance(s, Definition):
        return f"def {s.name} = {format_expr(s.expr)}"
    if isinstance(s, ContextEntry):
        return f"context {s.name} = {s.value}"
    if isinstance(s, PhiStmt):
        return f"phi {format_expr(s.expr)}"
    if isinstance(s, Restrict):
        return "restrict " + ", ".join(s.names)
    raise TypeError(f"not a statement: {s!r}")


def pretty_print(doc: ModelDocument) -> str:
    return "".join(format_statement(s) + "\n" for s in doc.statements)


# -- documents <-> models ------------------------------------------------------


def build_model(doc: ModelDocument) -> Tuple[CausalModel, Dict[str, int]]:
    """Validated model and context; raises :class:`ValidationError` listing every problem."""
    decls = doc.decls
    sig = Signature(tuple((d.name, d.range) for d in decls if d.exogenous),
                    tuple((d.name, d.range) for d in decls if not d.exogenous))
    model = validate(sig, [(d.name, d.expr) for d in doc.definitions])
    return model, make_context(model, doc.context)


def build_query(doc: ModelDocument, v_res: Optional[Sequence[str]] = None) -> CauseQuery:
    """Assemble a cause query.  An explicit ``restrict`` may name phi's own variables."""
    model, context = build_model(doc)
    phi = doc.phi
    if phi is None:
        raise ValidationError(Diagnostic("MissingPhi", "the document has no phi statement"))
    if v_res is None:
        v_res = doc.restrict
    return make_query(model, context, phi, v_res, allow_phi_vars=v_res is not None)


def load_query(text: Union[str, bytes]) -> CauseQuery:
    return build_query(parse_model(text))


def document_from_query(q: CauseQuery) -> ModelDocument:
    """A document that rebuilds ``q``; ``restrict`` is written only when non-default."""
    model = q.model
    stmts: List[Statement] = []
    stmts += [Decl(n, r, True) for n, r in model.signature.exogenous]
    stmts += [Decl(n, r, False) for n, r in model.signature.endogenous]
    stmts += [Definition(n, e) for n, e in model.equations.items()]
    stmts += [Definition(n, Const(v)) for n, v in model.forced.items()]
    stmts += [ContextEntry(n, v) for n, v in q.context.items()]
    stmts.append(PhiStmt(q.phi))
    in_phi = set(variables(q.phi))
    default = tuple(v for v in model.signature.endogenous_names if v not in in_phi)
    if q.v_res != default:
        stmts.append(Restrict(q.v_res))
    return ModelDocument(tuple(stmts))


# -- families ----------------------------------------------------------------

_HEADER = re.compile(r"#\s*over\b(.*)")


def format_member(mask: int, v_res: Sequence[str]) -> str:
    return "{" + ",".join(v_res[i] for i in bits(mask)) + "}"


def emit_family(f: CauseFamily, v_res: Sequence[str]) -> str:
    if len(v_res) != f.n:
        raise ValueError(f"family over {f.n} variables, got {len(v_res)} names")
    lines = ["# over " + ",".join(v_res)]
    lines += [format_member(m, v_res) for m in f]
    return "\n".join(lines) + "\n"


def parse_family(text: Union[str, bytes], v_res: Optional[Sequence[str]] = None) -> Tuple[CauseFamily, Tuple[str, ...]]:
    """Inverse of :func:`emit_family`.

    The ``# over`` header supplies the variable order unless ``v_res`` is
    given.  Returns the family and the order used.
    """
    text = _decode(text)
    offsets = _Offsets(text)
    diags: List[Diagnostic] = []
    order = tuple(v_res) if v_res is not None else None
    members: List[int] = []
    pos = 0
    for raw in text.splitlines(keepends=True):
        line = raw.rstrip("\r\n")
        stripped = line.strip()
        start = pos + (len(line) - len(line.lstrip()))
        pos += len(raw)
        span = offsets.span(start, start + len(stripped))
        if not stripped:
            continue
        header = _HEADER.match(stripped)
        if header:
            names = tuple(n.strip() for n in header.group(1).split(",") if n.strip())
            if order is None:
                order = names
            continue
        if stripped.startswith("#"):
            continue
        if not (stripped.startswith("{") and stripped.endswith("}")):
            diags.append(Diagnostic("SyntaxError", "expected a member like {A,B}", span=span))
            continue
        if order is None:
            diags.append(Diagnostic("SyntaxError", "no '# over' header before the first member", span=span))
            break
        body = stripped[1:-1].strip()
        mask = 0
        for name in (n.strip() for n in body.split(",")) if body else ():
            if name not in order:
                diags.append(Diagnostic("UnknownVariable", f"'{name}' is not one of {','.join(order)}",
                                        name, span))
                continue
            mask |= 1 << order.index(name)
        members.append(mask)
    if order is None and not diags:
        diags.append(Diagnostic("SyntaxError", "no '# over' header and no variable order given",
                                span=offsets.span(0, 0)))
    if diags:
        raise ParseError(diags)
    return CauseFamily(len(order), frozenset(members)), order
