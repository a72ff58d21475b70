"""Exhaustive search for necessary, sufficient and actual causes.

Candidate causes are sets of endogenous variables.  Their claimed values
are always the values in the actual world, so a cause is identified by its
variable set alone.  Families are encoded over the restricted variable list
``v_res`` (bit ``i`` <-> ``v_res[i]``).

Interventions go straight to :meth:`CausalModel._solve` with an override
mapping, which is equivalent to solving ``intervene(model, overrides)``
without building a new model per candidate setting.
"""
from __future__ import annotations

from dataclasses import dataclass
from functools import cached_property
from itertools import combinations, product
from typing import Callable, Dict, Iterable, List, Mapping, Optional, Sequence, Tuple

from .boolformula import max_n, minimize_family
from .errors import Diagnostic, QueryTooLarge, ValidationError
from .family import CauseFamily
from .model import CausalModel, Expr, check_event, compile_expr, make_context, variables

NECESSARY = "necessary"
SUFFICIENT = "sufficient"
ACTUAL = "actual"
KINDS = (NECESSARY, SUFFICIENT, ACTUAL)

Setting = Tuple[Tuple[str, int], ...]


@dataclass(frozen=True)
class Situation:
    model: CausalModel
    context: Mapping[str, int]


@dataclass(frozen=True)
class Witness:
    setting: Setting
    contingency: Setting = ()


@dataclass(frozen=True)
class CauseVerdict:
    holds: bool
    witness: Optional[Witness] = None

    def __bool__(self) -> bool:
        return self.holds


NO = CauseVerdict(False)


@dataclass(frozen=True)
class CauseQuery:
    situation: Situation
    phi: Expr
    v_res: Tuple[str, ...]

    @property
    def model(self) -> CausalModel:
        return self.situation.model

    @property
    def context(self) -> Mapping[str, int]:
        return self.situation.context

    @cached_property
    def _phi(self) -> Callable[[Mapping[str, int]], int]:
        return compile_expr(self.phi)

    @cached_property
    def actual(self) -> Dict[str, int]:
        return self.model._solve(self.context)

    @cached_property
    def phi_holds(self) -> bool:
        return bool(self._phi(self.actual))

    def holds_under(self, overrides: Mapping[str, int]) -> bool:
        return bool(self._phi(self.model._solve(self.context, overrides)))

    def names(self, mask: int) -> Tuple[str, ...]:
        return tuple(v for i, v in enumerate(self.v_res) if mask >> i & 1)

    def mask(self, names: Iterable[str]) -> int:
        index = {v: i for i, v in enumerate(self.v_res)}
        out = 0
        for name in names:
            out |= 1 << index[name]
        return out


def make_query(model: CausalModel, context: Mapping[str, int], phi: Expr,
               v_res: Optional[Sequence[str]] = None, allow_phi_vars: bool = False) -> CauseQuery:
    """Validate and assemble a query.

    Without ``v_res``, every endogenous variable not mentioned in ``phi`` is
    used.  An explicit ``v_res`` may include variables of ``phi`` only with
    ``allow_phi_vars``.
    """
    context = make_context(model, context)
    check_event(model, phi)
    endo = model.signature.endogenous_names
    in_phi = set(variables(phi))
    if v_res is None:
        v_res = tuple(v for v in endo if v not in in_phi)
    v_res = tuple(v_res)
    diags = []
    seen = set()
    for v in v_res:
        if v not in endo:
            diags.append(Diagnostic("UnknownVariable", f"restricted variable '{v}' is not endogenous", v))
        elif v in seen:
            diags.append(Diagnostic("DuplicateDecl", f"'{v}' listed twice in the restricted set", v))
        elif v in in_phi and not allow_phi_vars:
            diags.append(Diagnostic("InvalidRestrict", f"'{v}' occurs in phi", v))
        seen.add(v)
    if diags:
        raise ValidationError(diags)
    if len(v_res) > max_n():
        raise QueryTooLarge(Diagnostic("QueryTooLarge",
                                       f"{len(v_res)} restricted variables exceeds the limit of {max_n()}"))
    return CauseQuery(Situation(model, context), phi, v_res)


def _ordered(q: CauseQuery, xs: Iterable[str]) -> Tuple[str, ...]:
    xs = set(xs)
    unknown = xs - set(q.model.signature.endogenous_names)
    if unknown:
        raise ValidationError([Diagnostic("UnknownVariable", f"'{v}' is not endogenous", v)
                               for v in sorted(unknown)])
    return tuple(v for v in q.model.signature.endogenous_names if v in xs)


def _settings(q: CauseQuery, xs: Sequence[str]) -> Iterable[Tuple[int, ...]]:
    return product(*(q.model.range_of(v).values for v in xs))


def check_ac1(q: CauseQuery, xs: Iterable[str]) -> bool:
    """With the claimed values taken from the actual world, only phi is left to check."""
    _ordered(q, xs)
    return q.phi_holds


def is_necessary_cause(q: CauseQuery, xs: Iterable[str]) -> CauseVerdict:
    """Some setting of ``xs`` falsifies phi; the witness is the first such setting."""
    xs = _ordered(q, xs)
    if not q.phi_holds:
        return NO
    for values in _settings(q, xs):
        setting = tuple(zip(xs, values))
        if not q.holds_under(dict(setting)):
            return CauseVerdict(True, Witness(setting))
    return NO


def is_sufficient_cause(q: CauseQuery, xs: Iterable[str]) -> CauseVerdict:
    """Phi survives every setting of the restricted variables outside ``xs``."""
    xs = set(_ordered(q, xs))
    if not xs <= set(q.v_res):
        raise ValidationError(Diagnostic("InvalidRestrict", "sufficient causes must lie within v_res"))
    if not q.phi_holds:
        return NO
    rest = tuple(v for v in q.v_res if v not in xs)
    for values in _settings(q, rest):
        if not q.holds_under(dict(zip(rest, values))):
            return NO
    return CauseVerdict(True)


def is_actual_cause(q: CauseQuery, xs: Iterable[str]) -> CauseVerdict:
    """Search contingencies by (size, declaration order), then settings of ``xs``."""
    xs = _ordered(q, xs)
    if not q.phi_holds:
        return NO
    actual = q.actual
    others = tuple(v for v in q.model.signature.endogenous_names if v not in xs)
    settings = [tuple(zip(xs, values)) for values in _settings(q, xs)]
    for k in range(len(others) + 1):
        for ws in combinations(others, k):
            frozen = tuple((w, actual[w]) for w in ws)
            for setting in settings:
                overrides = dict(frozen)
                overrides.update(setting)
                if not q.holds_under(overrides):
                    return CauseVerdict(True, Witness(setting, frozen))
    return NO


_CHECKS = {NECESSARY: is_necessary_cause, SUFFICIENT: is_sufficient_cause, ACTUAL: is_actual_cause}


def candidate_masks(n: int, include_empty: bool = False) -> Iterable[int]:
    """Subsets of ``range(n)`` as masks in (popcount, lexicographic) order."""
    for k in range(0 if include_empty else 1, n + 1):
        for combo in combinations(range(n), k):
            mask = 0
            for i in combo:
                mask |= 1 << i
            yield mask


def cause_verdicts(q: CauseQuery, kind: str, include_empty: bool = False) -> List[Tuple[int, CauseVerdict]]:
    """Every candidate subset of ``v_res`` that passes, with its verdict."""
    if kind not in _CHECKS:
        raise ValueError(f"unknown cause kind {kind!r}; expected one of {KINDS}")
    n = len(q.v_res)
    if n > max_n():
        raise QueryTooLarge(Diagnostic("QueryTooLarge", f"{n} restricted variables exceeds the limit of {max_n()}"))
    if not q.phi_holds:
        return []
    check = _CHECKS[kind]
    out = []
    for mask in candidate_masks(n, include_empty):
        verdict = check(q, q.names(mask))
        if verdict.holds:
            out.append((mask, verdict))
    return out


def enumerate_causes(q: CauseQuery, kind: str, minimal_only: bool = True,
                     include_empty: bool = False) -> CauseFamily:
    """The family of causes of ``kind`` over ``v_res``.

    The empty set is left out unless ``include_empty`` is given; it can only
    ever qualify as a sufficient cause (when phi ignores ``v_res``).
    """
    family = CauseFamily(len(q.v_res), frozenset(m for m, _ in cause_verdicts(q, kind, include_empty)))
    return minimize_family(family) if minimal_only else family
