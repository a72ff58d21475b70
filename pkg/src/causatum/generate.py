"""Seeded random boolean models for fuzzing the necessary/sufficient duality."""
from __future__ import annotations

import random
from typing import List

from .causes import CauseQuery, make_query
from .model import And, Const, Eq, Expr, Implies, Ite, Not, Or, Range, Signature, Var, evaluate, solve, validate

MAX_ENDO = 10


def _leaf(rng: random.Random, name: str) -> Expr:
    roll = rng.random()
    if roll < 0.2:
        return Not(Var(name))
    if roll < 0.3:
        return Eq(Var(name), Const(rng.randint(0, 1)))
    return Var(name)


def _combine(rng: random.Random, a: Expr, b: Expr) -> Expr:
    roll = rng.random()
    if roll < 0.3:
        return And(a, b)
    if roll < 0.6:
        return Or(a, b)
    if roll < 0.75:
        return Implies(a, b)
    if roll < 0.9:
        return Eq(a, b)
    return Ite(a, b, Not(b))


def random_expression(rng: random.Random, inputs: List[str]) -> Expr:
    """A boolean expression mentioning every name in ``inputs`` at least once."""
    parts = [_leaf(rng, name) for name in inputs]
    rng.shuffle(parts)
    while len(parts) > 1:
        i = rng.randrange(len(parts) - 1)
        parts[i:i + 2] = [_combine(rng, parts[i], parts[i + 1])]
    expr = parts[0]
    return Not(expr) if rng.random() < 0.15 else expr


def generate_random_model(seed: int, n_endo: int = 4, n_exo: int | None = None,
                          max_parents: int = 2) -> CauseQuery:
    """Deterministic in all arguments.

    Endogenous ``V{i}`` draws up to ``max_parents`` parents among
    ``V0..V{i-1}`` plus its exogenous input ``U{i mod n_exo}``.  Phi combines
    primitive events on one or two sink variables and is negated if needed so
    that it holds in the generated context.
    """
    if not 1 <= n_endo <= MAX_ENDO:
        raise ValueError(f"n_endo must be between 1 and {MAX_ENDO}")
    n_exo = n_endo if n_exo is None else n_exo
    if n_exo < 1:
        raise ValueError("n_exo must be positive")
    rng = random.Random(seed)
    boolean = Range.boolean()
    exo = [f"U{i}" for i in range(n_exo)]
    endo = [f"V{i}" for i in range(n_endo)]
    equations = {}
    has_child = set()
    for i, name in enumerate(endo):
        k = rng.randint(1, min(max_parents, i)) if i else 0
        parents = sorted(rng.sample(endo[:i], k), key=endo.index)
        has_child.update(parents)
        equations[name] = random_expression(rng, parents + [exo[i % n_exo]])
    sig = Signature(tuple((u, boolean) for u in exo), tuple((v, boolean) for v in endo))
    model = validate(sig, equations)
    context = {u: rng.randint(0, 1) for u in exo}

    sinks = [v for v in endo if v not in has_child]
    count = min(rng.choice((1, 2)), len(sinks), max(1, n_endo - 1))
    targets = sorted(rng.sample(sinks, count), key=endo.index)
    events = [Eq(Var(v), Const(rng.randint(0, 1))) for v in targets]
    phi = events[0]
    for ev in events[1:]:
        phi = And(phi, ev) if rng.random() < 0.5 else Or(phi, ev)
    if not evaluate(phi, solve(model, context)):
        phi = Not(phi)
    return make_query(model, context, phi)
