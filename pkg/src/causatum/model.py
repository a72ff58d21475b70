"""Finite-domain structural equation models.

A model is a signature (exogenous and endogenous variables with finite
integer ranges) plus one structural expression per endogenous variable.
Boolean values are the integers 0 and 1 throughout, so a bool-ranged
variable can be used directly where a truth value is expected.

Models are built with :func:`validate`, which collects every problem it
finds instead of stopping at the first one.  A validated model is
immutable; :func:`intervene` returns a new model whose targeted variables
are pinned to constants.
"""
from __future__ import annotations

import heapq
import re
from dataclasses import dataclass, field
from types import MappingProxyType
from typing import Callable, Dict, Iterable, Iterator, List, Mapping, Optional, Sequence, Tuple, Union

from .errors import Diagnostic, SourceSpan, ValidationError

IDENT = re.compile(r"[A-Za-z_][A-Za-z0-9_]*\Z")
BOOL_VALUES = frozenset((0, 1))


@dataclass(frozen=True)
class Range:
    values: Tuple[int, ...]

    @classmethod
    def boolean(cls) -> "Range":
        return cls((0, 1))

    @property
    def is_bool(self) -> bool:
        return bool(self.values) and set(self.values) <= BOOL_VALUES

    def __iter__(self) -> Iterator[int]:
        return iter(self.values)

    def __len__(self) -> int:
        return len(self.values)

    def __contains__(self, value: object) -> bool:
        return value in self.values


# -- expressions -------------------------------------------------------------

_span = dict(default=None, compare=False, repr=False, kw_only=True)


@dataclass(frozen=True)
class Expr:
    span: Optional[SourceSpan] = field(**_span)


@dataclass(frozen=True)
class Const(Expr):
    value: int


@dataclass(frozen=True)
class Var(Expr):
    name: str


@dataclass(frozen=True)
class Not(Expr):
    operand: Expr


@dataclass(frozen=True)
class And(Expr):
    left: Expr
    right: Expr


@dataclass(frozen=True)
class Or(Expr):
    left: Expr
    right: Expr


@dataclass(frozen=True)
class Implies(Expr):
    left: Expr
    right: Expr


@dataclass(frozen=True)
class Eq(Expr):
    left: Expr
    right: Expr


@dataclass(frozen=True)
class Ite(Expr):
    cond: Expr
    then: Expr
    orelse: Expr


def children(expr: Expr) -> Tuple[Expr, ...]:
    if isinstance(expr, Not):
        return (expr.operand,)
    if isinstance(expr, (And, Or, Implies, Eq)):
        return (expr.left, expr.right)
    if isinstance(expr, Ite):
        return (expr.cond, expr.then, expr.orelse)
    return ()


def walk(expr: Expr) -> Iterator[Expr]:
    stack = [expr]
    while stack:
        node = stack.pop()
        yield node
        stack.extend(reversed(children(node)))


def variables(expr: Expr) -> Tuple[str, ...]:
    """Variable names mentioned in ``expr``, in first-occurrence order."""
    seen: Dict[str, None] = {}
    for node in walk(expr):
        if isinstance(node, Var):
            seen.setdefault(node.name)
    return tuple(seen)


def evaluate(expr: Expr, world: Mapping[str, int]) -> int:
    """Reference tree-walking evaluator; see :func:`compile_expr` for the fast path."""
    if isinstance(expr, Const):
        return expr.value
    if isinstance(expr, Var):
        return world[expr.name]
    if isinstance(expr, Not):
        return 1 - evaluate(expr.operand, world)
    if isinstance(expr, And):
        return evaluate(expr.left, world) & evaluate(expr.right, world)
    if isinstance(expr, Or):
        return evaluate(expr.left, world) | evaluate(expr.right, world)
    if isinstance(expr, Implies):
        return (1 - evaluate(expr.left, world)) | evaluate(expr.right, world)
    if isinstance(expr, Eq):
        return int(evaluate(expr.left, world) == evaluate(expr.right, world))
    if isinstance(expr, Ite):
        if evaluate(expr.cond, world):
            return evaluate(expr.then, world)
        return evaluate(expr.orelse, world)
    raise TypeError(f"not an expression: {expr!r}")


def _source(expr: Expr) -> str:
    if isinstance(expr, Const):
        return repr(expr.value)
    if isinstance(expr, Var):
        return f"w[{expr.name!r}]"
    if isinstance(expr, Not):
        return f"(1 - {_source(expr.operand)})"
    if isinstance(expr, And):
        return f"({_source(expr.left)} & {_source(expr.right)})"
    if isinstance(expr, Or):
        return f"({_source(expr.left)} | {_source(expr.right)})"
    if isinstance(expr, Implies):
        return f"((1 - {_source(expr.left)}) | {_source(expr.right)})"
    if isinstance(expr, Eq):
        return f"(1 if {_source(expr.left)} == {_source(expr.right)} else 0)"
    if isinstance(expr, Ite):
        return f"({_source(expr.then)} if {_source(expr.cond)} else {_source(expr.orelse)})"
    raise TypeError(f"not an expression: {expr!r}")


def compile_expr(expr: Expr) -> Callable[[Mapping[str, int]], int]:
    """Compile to a Python function of the world mapping.

    Only validated identifiers and integers reach the generated source.
    """
    return eval(f"lambda w: {_source(expr)}", {"__builtins__": {}})


def value_set(expr: Expr, ranges: Mapping[str, Range]) -> frozenset:
    """Over-approximation of the values ``expr`` can take."""
    if isinstance(expr, Const):
        return frozenset((expr.value,))
    if isinstance(expr, Var):
        return frozenset(ranges[expr.name].values)
    if isinstance(expr, Ite):
        return value_set(expr.then, ranges) | value_set(expr.orelse, ranges)
    return BOOL_VALUES


# -- signature, model --------------------------------------------------------


@dataclass(frozen=True)
class Signature:
    exogenous: Tuple[Tuple[str, Range], ...]
    endogenous: Tuple[Tuple[str, Range], ...]

    @property
    def ranges(self) -> Dict[str, Range]:
        return dict(self.exogenous + self.endogenous)

    @property
    def exogenous_names(self) -> Tuple[str, ...]:
        return tuple(name for name, _ in self.exogenous)

    @property
    def endogenous_names(self) -> Tuple[str, ...]:
        return tuple(name for name, _ in self.endogenous)

    def is_exogenous(self, name: str) -> bool:
        return any(n == name for n, _ in self.exogenous)

    def is_endogenous(self, name: str) -> bool:
        return any(n == name for n, _ in self.endogenous)


@dataclass(frozen=True)
class DependencyGraph:
    nodes: Tuple[str, ...]
    edges: Tuple[Tuple[str, str], ...]
    exogenous_parents: Mapping[str, Tuple[str, ...]]

    def parents(self, node: str) -> Tuple[str, ...]:
        return tuple(src for src, dst in self.edges if dst == node)

    def children(self, node: str) -> Tuple[str, ...]:
        return tuple(dst for src, dst in self.edges if src == node)


class CausalModel:
    """A validated model.  Build instances with :func:`validate`."""

    def __init__(self, signature: Signature, equations: Mapping[str, Expr],
                 forced: Mapping[str, int], *, _compiled=None):
        self.signature = signature
        self.equations = MappingProxyType(dict(equations))
        self.forced = MappingProxyType(dict(forced))
        self._ranges = signature.ranges
        self.graph = _graph(signature, self.equations)
        self.order = _topological_order(self.graph, signature.endogenous_names)
        if _compiled is None:
            _compiled = {name: compile_expr(e) for name, e in self.equations.items()}
        self._compiled = {name: _compiled[name] for name in self.equations}
        self._plan = tuple((name, self._compiled.get(name)) for name in self.order)

    @property
    def ranges(self) -> Dict[str, Range]:
        return dict(self._ranges)

    def range_of(self, name: str) -> Range:
        return self._ranges[name]

    def __eq__(self, other: object) -> bool:
        if not isinstance(other, CausalModel):
            return NotImplemented
        return (self.signature == other.signature
                and dict(self.equations) == dict(other.equations)
                and dict(self.forced) == dict(other.forced))

    def __hash__(self) -> int:
        return hash((self.signature, tuple(self.equations.items()), tuple(self.forced.items())))

    def __repr__(self) -> str:
        return (f"CausalModel(exo={list(self.signature.exogenous_names)}, "
                f"endo={list(self.signature.endogenous_names)}, forced={dict(self.forced)})")

    def _solve(self, context: Mapping[str, int], extra: Mapping[str, int] = MappingProxyType({})) -> Dict[str, int]:
        # extra: additional endogenous pins, applied as if by intervene()
        w = dict(context)
        forced = self.forced
        for name, fn in self._plan:
            if name in extra:
                w[name] = extra[name]
            elif fn is None:
                w[name] = forced[name]
            else:
                w[name] = fn(w)
        return w


def _graph(signature: Signature, equations: Mapping[str, Expr]) -> DependencyGraph:
    endo = signature.endogenous_names
    edges = []
    exo_parents = {}
    for dst in endo:
        expr = equations.get(dst)
        mentioned = set(variables(expr)) if expr is not None else set()
        edges.extend((src, dst) for src in endo if src in mentioned)
        exo_parents[dst] = tuple(u for u in signature.exogenous_names if u in mentioned)
    return DependencyGraph(endo, tuple(edges), MappingProxyType(exo_parents))


def _topological_order(graph: DependencyGraph, declared: Sequence[str]) -> Tuple[str, ...]:
    # Kahn's algorithm, ties broken by declaration index.
    index = {name: i for i, name in enumerate(declared)}
    indegree = {name: 0 for name in declared}
    succ: Dict[str, List[str]] = {name: [] for name in declared}
    for src, dst in graph.edges:
        indegree[dst] += 1
        succ[src].append(dst)
    ready = [index[n] for n in declared if indegree[n] == 0]
    heapq.heapify(ready)
    order = []
    while ready:
        name = declared[heapq.heappop(ready)]
        order.append(name)
        for nxt in succ[name]:
            indegree[nxt] -= 1
            if indegree[nxt] == 0:
                heapq.heappush(ready, index[nxt])
    if len(order) != len(declared):
        raise ValidationError(Diagnostic("CyclicDependency", "dependency graph has a cycle"))
    return tuple(order)


def _find_cycle(nodes: Sequence[str], edges: Iterable[Tuple[str, str]]) -> Optional[List[str]]:
    succ: Dict[str, List[str]] = {n: [] for n in nodes}
    for src, dst in edges:
        succ[src].append(dst)
    color = {n: 0 for n in nodes}
    for root in nodes:
        if color[root]:
            continue
        path = [root]
        stack = [iter(succ[root])]
        color[root] = 1
        while stack:
            nxt = next(stack[-1], None)
            if nxt is None:
                stack.pop()
                color[path.pop()] = 2
            elif color[nxt] == 1:
                return path[path.index(nxt):] + [nxt]
            elif color[nxt] == 0:
                color[nxt] = 1
                path.append(nxt)
                stack.append(iter(succ[nxt]))
    return None


# -- validation --------------------------------------------------------------


def check_expression(expr: Expr, ranges: Mapping[str, Range], owner: Optional[str] = None,
                     allowed: Optional[Iterable[str]] = None) -> List[Diagnostic]:
    """Type and range checks for one expression; returns diagnostics."""
    out: List[Diagnostic] = []
    allowed = set(ranges if allowed is None else allowed)

    def need_bool(node: Expr) -> None:
        if not out_of_scope(node) and not value_set(node, ranges) <= BOOL_VALUES:
            out.append(Diagnostic("TypeMismatch", f"boolean operand expected in {_what(owner)}",
                                  owner, node.span))

    def out_of_scope(node: Expr) -> bool:
        return any(isinstance(n, Var) and n.name not in ranges for n in walk(node))

    for node in walk(expr):
        if isinstance(node, Var):
            if node.name not in ranges:
                out.append(Diagnostic("UnknownVariable", f"'{node.name}' is not declared",
                                      owner, node.span))
            elif node.name not in allowed:
                out.append(Diagnostic("UnknownVariable", f"'{node.name}' may not appear in {_what(owner)}",
                                      owner, node.span))
        elif isinstance(node, (Not, And, Or, Implies)):
            for child in children(node):
                need_bool(child)
        elif isinstance(node, Ite):
            need_bool(node.cond)
        elif isinstance(node, Eq):
            left, right = node.left, node.right
            if out_of_scope(left) or out_of_scope(right):
                continue
            for const, other in ((left, right), (right, left)):
                if isinstance(const, Const) and not isinstance(other, Const):
                    if const.value not in value_set(other, ranges):
                        out.append(Diagnostic("RangeViolation",
                                              f"{const.value} is outside the range of the compared operand",
                                              owner, const.span))
                    break
            else:
                ls, rs = value_set(left, ranges), value_set(right, ranges)
                if not isinstance(left, Const) and ls != rs and not (ls | rs) <= BOOL_VALUES:
                    out.append(Diagnostic("TypeMismatch", "'==' operands have different ranges",
                                          owner, node.span))
    return out


def _what(owner: Optional[str]) -> str:
    return f"equation of {owner}" if owner else "formula"


def validate(signature: Signature, equations: Union[Mapping[str, Expr], Iterable[Tuple[str, Expr]]],
             forced: Optional[Mapping[str, int]] = None) -> CausalModel:
    """Check a raw model and return it as a :class:`CausalModel`.

    Raises :class:`ValidationError` carrying *all* diagnostics found.
    """
    forced = dict(forced or {})
    pairs = list(equations.items()) if isinstance(equations, Mapping) else list(equations)
    diags: List[Diagnostic] = []

    ranges: Dict[str, Range] = {}
    for name, rng in signature.exogenous + signature.endogenous:
        if not isinstance(name, str) or not IDENT.match(name):
            diags.append(Diagnostic("InvalidName", f"bad variable name {name!r}", name))
        if name in ranges:
            diags.append(Diagnostic("DuplicateDecl", f"'{name}' declared more than once", name))
        if len(rng.values) == 0:
            diags.append(Diagnostic("InvalidRange", f"range of '{name}' is empty", name))
        elif len(set(rng.values)) != len(rng.values):
            diags.append(Diagnostic("InvalidRange", f"range of '{name}' has duplicate values", name))
        ranges.setdefault(name, rng)

    endo = signature.endogenous_names
    eqs: Dict[str, Expr] = {}
    for name, expr in pairs:
        if name not in ranges:
            diags.append(Diagnostic("UnknownVariable", f"equation for undeclared '{name}'", name, expr.span))
            continue
        if name not in endo:
            diags.append(Diagnostic("UnknownVariable", f"'{name}' is exogenous and cannot have an equation",
                                    name, expr.span))
            continue
        if name in eqs or name in forced:
            diags.append(Diagnostic("DuplicateEquation", f"'{name}' has more than one definition",
                                    name, expr.span))
            continue
        eqs[name] = expr

    for name, value in forced.items():
        if name not in endo:
            diags.append(Diagnostic("UnknownVariable", f"forced variable '{name}' is not endogenous", name))
        elif value not in ranges[name]:
            diags.append(Diagnostic("RangeViolation", f"{value} is outside the range of '{name}'", name))

    for name in endo:
        if name not in eqs and name not in forced:
            diags.append(Diagnostic("MissingEquation", f"no equation for '{name}'", name))

    for name, expr in eqs.items():
        local = check_expression(expr, ranges, owner=name)
        diags.extend(local)
        if local:
            continue
        bad = value_set(expr, ranges) - set(ranges[name].values)
        if bad:
            diags.append(Diagnostic("RangeViolation",
                                    f"equation of '{name}' can produce {sorted(bad)} outside its range",
                                    name, expr.span))

    edges = []
    for dst, expr in eqs.items():
        mentioned = set(variables(expr))
        edges.extend((src, dst) for src in endo if src in mentioned)
    cycle = _find_cycle([n for n in endo if n in ranges], edges)
    if cycle:
        diags.append(Diagnostic("CyclicDependency", "cycle " + " -> ".join(cycle), cycle[0]))

    if diags:
        raise ValidationError(diags)
    ordered = {name: eqs[name] for name in endo if name in eqs}
    return CausalModel(signature, ordered, {n: forced[n] for n in endo if n in forced})


def dependency_graph(model: CausalModel) -> DependencyGraph:
    return model.graph


# -- contexts, interventions, solving -----------------------------------------

Context = Dict[str, int]
World = Dict[str, int]
Intervention = Union[Mapping[str, int], Sequence[Tuple[str, int]]]


def _pairs(iv: Intervention) -> List[Tuple[str, int]]:
    pairs = list(iv.items()) if isinstance(iv, Mapping) else [tuple(p) for p in iv]
    seen = set()
    for name, _ in pairs:
        if name in seen:
            raise ValidationError(Diagnostic("DuplicateTarget", f"'{name}' is intervened on twice", name))
        seen.add(name)
    return pairs


def _check_targets(model: CausalModel, pairs, want_exo: bool) -> None:
    diags = []
    sig = model.signature
    for name, value in pairs:
        if name not in model._ranges:
            diags.append(Diagnostic("UnknownVariable", f"'{name}' is not declared", name))
        elif sig.is_exogenous(name) != want_exo:
            kind = "exogenous" if want_exo else "endogenous"
            diags.append(Diagnostic("UnknownVariable", f"'{name}' is not {kind}", name))
        elif value not in model._ranges[name]:
            diags.append(Diagnostic("RangeViolation", f"{value} is outside the range of '{name}'", name))
    if diags:
        raise ValidationError(diags)


def make_context(model: CausalModel, values: Mapping[str, int]) -> Context:
    """Validate a total exogenous assignment; returns it in declaration order."""
    diags = []
    for name in values:
        if not model.signature.is_exogenous(name):
            diags.append(Diagnostic("UnknownVariable", f"'{name}' is not exogenous", name))
    for name, rng in model.signature.exogenous:
        if name not in values:
            diags.append(Diagnostic("MissingContext", f"no context value for '{name}'", name))
        elif values[name] not in rng:
            diags.append(Diagnostic("RangeViolation", f"{values[name]} is outside the range of '{name}'", name))
    if diags:
        raise ValidationError(diags)
    return {name: values[name] for name in model.signature.exogenous_names}


def intervene(model: CausalModel, iv: Intervention) -> CausalModel:
    """Replace the equations of the targeted endogenous variables by constants."""
    pairs = _pairs(iv)
    if not pairs:
        return model
    _check_targets(model, pairs, want_exo=False)
    forced = dict(model.forced)
    forced.update(pairs)
    equations = {n: e for n, e in model.equations.items() if n not in forced}
    return CausalModel(model.signature, equations, forced, _compiled=model._compiled)


def intervene_context(context: Mapping[str, int], iv: Intervention,
                      model: Optional[CausalModel] = None) -> Context:
    """``context`` with the targeted exogenous entries overwritten.

    Without a model, targets must already be keys of the context.
    """
    pairs = _pairs(iv)
    if model is not None:
        _check_targets(model, pairs, want_exo=True)
    else:
        for name, _ in pairs:
            if name not in context:
                raise ValidationError(Diagnostic("UnknownVariable", f"'{name}' is not in the context", name))
    out = dict(context)
    out.update(pairs)
    return out


def solve(model: CausalModel, context: Mapping[str, int]) -> World:
    """The unique solution of ``model`` under ``context``, exogenous entries first."""
    return model._solve(make_context(model, context))


@dataclass(frozen=True)
class CausalFormula:
    """``[Y1 <- y1, ..., Yn <- yn] event``."""

    interventions: Tuple[Tuple[str, int], ...]
    event: Expr


def check_event(model: CausalModel, event: Expr) -> None:
    """An event is a boolean combination of primitive events over endogenous variables."""
    ranges = model._ranges
    diags = check_expression(event, ranges, allowed=model.signature.endogenous_names)
    for node in walk(event):
        if isinstance(node, Ite):
            diags.append(Diagnostic("InvalidEvent", "if-then-else is not allowed in an event", span=node.span))
        elif isinstance(node, Eq) and not (isinstance(node.left, Var) and isinstance(node.right, Const)):
            diags.append(Diagnostic("InvalidEvent", "primitive events have the form X == value", span=node.span))
    if not diags and not value_set(event, ranges) <= BOOL_VALUES:
        diags.append(Diagnostic("TypeMismatch", "event is not boolean", span=event.span))
    if diags:
        raise ValidationError(diags)


def satisfies(model: CausalModel, context: Mapping[str, int], formula: CausalFormula) -> bool:
    check_event(model, formula.event)
    pairs = _pairs(formula.interventions)
    exo = [(n, v) for n, v in pairs if model.signature.is_exogenous(n)]
    endo = [(n, v) for n, v in pairs if not model.signature.is_exogenous(n)]
    world = solve(intervene(model, endo), intervene_context(context, exo, model))
    return bool(evaluate(formula.event, world))
