"""Two-level boolean formulas over ``n`` indicator variables.

Truth tables are stored as Python ints: bit ``a`` of ``TruthTable.bits`` is
the function value at assignment ``a``, where bit ``i`` of ``a`` is the
value of indicator variable ``i``.  Cause families use the same indexing,
so a family's characteristic function *is* a truth table.

The dual of a family is computed by two independent routes.  The syntactic
route goes family -> DNF -> truth table -> canonical CNF -> swap the
connectives.  The pointwise route uses ``X in dual(f)  <=>  complement(X)
not in f``.  :func:`dual_family` checks that they agree.
"""
from __future__ import annotations

import os
import warnings
from dataclasses import dataclass
from typing import Dict, Iterable, List, Optional, Sequence, Tuple, Union

from .errors import Diagnostic, NotAntichain, QueryTooLarge
from .family import CauseFamily, bits

HARD_MAX_N = 16
DNF = "DNF"
CNF = "CNF"


def max_n() -> int:
    """The n guard; ``CAUSATUM_MAX_N`` may lower it but never raise it."""
    raw = os.environ.get("CAUSATUM_MAX_N")
    if raw is None:
        return HARD_MAX_N
    try:
        return max(0, min(HARD_MAX_N, int(raw)))
    except ValueError:
        return HARD_MAX_N


def _guard(n: int) -> None:
    limit = max_n()
    if n > limit:
        raise QueryTooLarge(Diagnostic("QueryTooLarge", f"{n} variables exceeds the limit of {limit}"))


@dataclass(frozen=True)
class TruthTable:
    n: int
    bits: int

    def __post_init__(self) -> None:
        if self.bits < 0 or self.bits >> (1 << self.n):
            raise ValueError("truth table has entries beyond 2**n")

    @classmethod
    def from_values(cls, values: Sequence[Union[bool, int]]) -> "TruthTable":
        size = len(values)
        n = size.bit_length() - 1
        if size == 0 or 1 << n != size:
            raise ValueError(f"truth table length {size} is not a power of two")
        return cls(n, sum(1 << a for a, v in enumerate(values) if v))

    @classmethod
    def from_minterms(cls, n: int, minterms: Iterable[int]) -> "TruthTable":
        out = 0
        for a in minterms:
            out |= 1 << a
        return cls(n, out)

    def __getitem__(self, assignment: int) -> bool:
        return bool(self.bits >> assignment & 1)

    def __len__(self) -> int:
        return 1 << self.n

    def values(self) -> Tuple[bool, ...]:
        return tuple(self[a] for a in range(1 << self.n))

    def minterms(self) -> List[int]:
        return [a for a in range(1 << self.n) if self.bits >> a & 1]

    def __invert__(self) -> "TruthTable":
        return TruthTable(self.n, ((1 << (1 << self.n)) - 1) ^ self.bits)


@dataclass(frozen=True)
class Clause:
    """A set of literals, kept as two masks: positive and negated indices."""

    pos: int
    neg: int

    def __post_init__(self) -> None:
        if self.pos & self.neg:
            raise ValueError("clause contains a complementary pair")

    @classmethod
    def from_literals(cls, literals: Iterable[Tuple[int, bool]]) -> "Clause":
        pos = neg = 0
        for index, polarity in literals:
            if polarity:
                pos |= 1 << index
            else:
                neg |= 1 << index
        return cls(pos, neg)

    @property
    def literals(self) -> frozenset:
        return frozenset([(i, True) for i in bits(self.pos)] + [(i, False) for i in bits(self.neg)])

    def sorted_literals(self) -> List[Tuple[int, bool]]:
        return sorted(self.literals)

    def __len__(self) -> int:
        return bin(self.pos).count("1") + bin(self.neg).count("1")


@dataclass(frozen=True)
class NormalForm:
    kind: str
    n: int
    clauses: Tuple[Clause, ...]

    def __post_init__(self) -> None:
        if self.kind not in (DNF, CNF):
            raise ValueError(f"unknown normal form kind {self.kind!r}")
        object.__setattr__(self, "clauses", tuple(self.clauses))
        for c in self.clauses:
            if (c.pos | c.neg) >> self.n:
                raise ValueError("literal index out of range")

    def __str__(self) -> str:
        return format_nf(self)


def _as_int(assignment: Union[int, Sequence[int]]) -> int:
    if isinstance(assignment, int):
        return assignment
    return sum(1 << i for i, v in enumerate(assignment) if v)


def eval_nf(nf: NormalForm, assignment: Union[int, Sequence[int]]) -> bool:
    if not isinstance(assignment, int) and len(assignment) != nf.n:
        raise ValueError(f"assignment has length {len(assignment)}, expected {nf.n}")
    a = _as_int(assignment)
    if nf.kind == DNF:
        return any(a & c.pos == c.pos and not a & c.neg for c in nf.clauses)
    return all(a & c.pos or ~a & c.neg for c in nf.clauses)


def truth_table(nf: NormalForm) -> TruthTable:
    out = 0
    for a in range(1 << nf.n):
        if eval_nf(nf, a):
            out |= 1 << a
    return TruthTable(nf.n, out)


def family_to_dnf(f: CauseFamily) -> NormalForm:
    """One full minterm per member, in canonical member order."""
    return NormalForm(DNF, f.n, tuple(Clause(m, f.full & ~m) for m in f))


def family_from_table(tt: TruthTable) -> CauseFamily:
    return CauseFamily(tt.n, frozenset(tt.minterms()))


def canonical_cnf(tt: TruthTable) -> NormalForm:
    """One maxterm per falsifying assignment, each literal negating that assignment's bit."""
    _guard(tt.n)
    full = (1 << tt.n) - 1
    falsifying = [a for a in range(1 << tt.n) if not tt.bits >> a & 1]
    return NormalForm(CNF, tt.n, tuple(Clause(full & ~a, a) for a in falsifying))


def switch_connectives(nf: NormalForm) -> NormalForm:
    return NormalForm(CNF if nf.kind == DNF else DNF, nf.n, nf.clauses)


def format_nf(nf: NormalForm, names: Optional[Sequence[str]] = None) -> str:
    names = names or [chr(ord("a") + i) if nf.n <= 26 else f"x{i}" for i in range(nf.n)]
    inner, outer = (" & ", " | ") if nf.kind == DNF else (" | ", " & ")
    if not nf.clauses:
        return "FALSE" if nf.kind == DNF else "TRUE"
    parts = []
    for c in nf.clauses:
        lits = [names[i] if pol else "!" + names[i] for i, pol in c.sorted_literals()]
        if not lits:
            lits = ["TRUE" if nf.kind == DNF else "FALSE"]
        body = inner.join(lits)
        parts.append(f"({body})" if len(lits) > 1 and len(nf.clauses) > 1 else body)
    return outer.join(parts)


# -- family algebra ----------------------------------------------------------


def saturate_upward(f: CauseFamily) -> CauseFamily:
    """Add supersets by switching zeros to ones until nothing changes."""
    members = set(f.members)
    frontier = list(members)
    while frontier:
        nxt = []
        for m in frontier:
            for j in range(f.n):
                bigger = m | 1 << j
                if bigger not in members:
                    members.add(bigger)
                    nxt.append(bigger)
        frontier = nxt
    return CauseFamily(f.n, frozenset(members))


def minimize_family(f: CauseFamily) -> CauseFamily:
    """Drop every member that has a strict subset in the family."""
    ordered = sorted(f.members, key=lambda m: bin(m).count("1"))
    kept: List[int] = []
    for m in ordered:
        if not any(k & m == k and k != m for k in kept):
            kept.append(m)
    return CauseFamily(f.n, frozenset(kept))


def is_antichain(f: CauseFamily) -> bool:
    return minimize_family(f) == f


def is_upward_closed(f: CauseFamily) -> bool:
    return all(m | 1 << j in f.members for m in f.members for j in range(f.n))


class RouteDisagreement(AssertionError):
    """The syntactic and pointwise dual computations differ."""


def dual_pointwise(f: CauseFamily) -> CauseFamily:
    full = f.full
    return CauseFamily(f.n, frozenset(x for x in range(1 << f.n) if full ^ x not in f.members))


def minimal_cnf(tt: TruthTable) -> NormalForm:
    """A smallest CNF, read off the minimal DNF of the negated function."""
    negated = quine_mccluskey(~tt)
    return NormalForm(CNF, tt.n, tuple(Clause(c.neg, c.pos) for c in negated.clauses))


def dual_syntactic(f: CauseFamily, use_qm: bool = False) -> CauseFamily:
    _guard(f.n)
    tt = truth_table(family_to_dnf(f))
    cnf = minimal_cnf(tt) if use_qm else canonical_cnf(tt)
    return family_from_table(truth_table(switch_connectives(cnf)))


def dual_family(f: CauseFamily, use_qm: bool = False, check: bool = True) -> CauseFamily:
    """Family whose characteristic function is ``g(x) = not f(not x)``.

    The empty set may be a member of the result; callers that follow the
    nonempty-cause convention drop it themselves.
    """
    result = dual_syntactic(f, use_qm)
    if check:
        other = dual_pointwise(f)
        if other != result:
            raise RouteDisagreement(f"dual routes disagree on {f!r}: {result!r} vs {other!r}")
    return result


class EmptyCauseWarning(UserWarning):
    pass


def minimal_dual_from_minimal(f_min: CauseFamily, use_qm: bool = False,
                              keep_empty: bool = False) -> CauseFamily:
    """Minimal members of the dual of the upward closure of an antichain.

    Turns minimal necessary causes into minimal sufficient causes, and back.
    If the result is ``{{}}`` and ``keep_empty`` is false, an
    :class:`EmptyCauseWarning` is issued and the empty family returned.
    """
    if not is_antichain(f_min):
        raise NotAntichain(Diagnostic("NotAntichain", f"{f_min!r} has a member contained in another"))
    result = minimize_family(dual_family(saturate_upward(f_min), use_qm=use_qm))
    if result.contains_empty and not keep_empty:
        warnings.warn("the empty set is the only minimal member of the dual family; "
                      "empty causes are excluded, so the result is empty",
                      EmptyCauseWarning, stacklevel=2)
        result = result.without_empty()
    return result


minimal_sufficient_from_minimal_necessary = minimal_dual_from_minimal
minimal_necessary_from_minimal_sufficient = minimal_dual_from_minimal


# -- Quine-McCluskey ---------------------------------------------------------

Cube = Tuple[int, int]  # (value, dont-care mask); value & mask == 0


def prime_implicants(tt: TruthTable) -> List[Cube]:
    """Prime implicants by repeated merging of cubes that differ in one bit."""
    n = tt.n
    current = {(a, 0) for a in tt.minterms()}
    primes: List[Cube] = []
    while current:
        merged = set()
        used = set()
        for value, mask in current:
            for j in range(n):
                bit = 1 << j
                if mask & bit or value & bit:
                    continue
                partner = (value | bit, mask)
                if partner in current:
                    merged.add((value, mask | bit))
                    used.add((value, mask))
                    used.add(partner)
        primes.extend(current - used)
        current = merged
    return sorted(primes, key=lambda c: _cube_key(c, n))


def _cube_key(cube: Cube, n: int) -> Tuple:
    value, mask = cube
    care = ((1 << n) - 1) & ~mask
    lits = tuple(sorted((i, bool(value >> i & 1)) for i in bits(care)))
    return (len(lits), lits)


def cube_minterms(cube: Cube, n: int) -> List[int]:
    value, mask = cube
    free = bits(mask)
    out = []
    for k in range(1 << len(free)):
        a = value
        for t, i in enumerate(free):
            if k >> t & 1:
                a |= 1 << i
        out.append(a)
    return out


def cube_literals(cube: Cube, n: int) -> int:
    return n - bin(cube[1]).count("1")


def _popcount(x: int) -> int:
    return bin(x).count("1")


DFS_CORE_LIMIT = 24


def _milp_cover(uncovered: int, candidates: List[int], covers: Dict[int, int],
                cost: Sequence[int]) -> List[int]:
    """Exact (count, literals)-minimal cover of a large cyclic core via HiGHS."""
    import numpy as np
    from scipy.optimize import Bounds, LinearConstraint, milp

    rows = bits(uncovered)
    a = np.array([[covers[p] >> c & 1 for p in candidates] for c in rows], dtype=float)
    lits = np.array([cost[p] for p in candidates], dtype=float)
    # one extra implicant always outweighs any literal saving
    weight = float(lits.sum() + 1)
    res = milp(c=weight + lits,
               constraints=LinearConstraint(a, lb=1, ub=np.inf),
               integrality=np.ones(len(candidates)),
               bounds=Bounds(0, 1),
               options={"mip_rel_gap": 0})
    if not res.success:
        raise RuntimeError(f"cover solver failed: {res.message}")
    return [p for p, x in zip(candidates, res.x) if x > 0.5]


def petrick(rows: Dict[int, List[int]], cost: Sequence[int], order_key: Sequence) -> List[int]:
    """Exact minimum cover of the rows ``minterm -> covering implicant indices``.

    Cover cost is (number of implicants, total literals).  Among equal-cost
    covers the first one met in the ``(cost, order_key)`` search order wins,
    which is deterministic but not a global lexicographic minimum.  The table is first
    reduced (essential implicants, dominated minterms, dominated implicants)
    and the remaining product of sums is expanded depth-first, abandoning a
    branch once a lower bound on its cost exceeds the best cover found.
    """
    if not rows:
        return []
    minterms = sorted(rows)
    col = {m: i for i, m in enumerate(minterms)}
    covers: Dict[int, int] = {}
    for m, pis in rows.items():
        for p in pis:
            covers[p] = covers.get(p, 0) | 1 << col[m]
    rank = {p: (cost[p], order_key[p]) for p in covers}

    chosen: List[int] = []
    uncovered = (1 << len(minterms)) - 1
    alive = set(covers)
    changed = True
    while changed and uncovered:
        changed = False
        row_sets = {}
        for c in bits(uncovered):
            row_sets[c] = frozenset(p for p in alive if covers[p] >> c & 1)
        # essential implicants
        for c, pis in row_sets.items():
            if len(pis) == 1 and uncovered >> c & 1:
                (p,) = pis
                chosen.append(p)
                uncovered &= ~covers[p]
                alive.discard(p)
                changed = True
        if changed:
            continue
        # a minterm whose implicant set contains another's is covered for free
        by_size = sorted(row_sets, key=lambda c: (len(row_sets[c]), c))
        for i, c in enumerate(by_size):
            if any(row_sets[d] <= row_sets[c] for d in by_size[:i] if uncovered >> d & 1):
                uncovered &= ~(1 << c)
                changed = True
        if changed:
            continue
        # an implicant covering a subset of a cheaper (or equal, earlier) one is never optimal
        for p in sorted(alive, key=lambda p: rank[p], reverse=True):
            mine = covers[p] & uncovered
            if any(q != p and rank[q] < rank[p] and mine & ~covers[q] == 0 for q in alive):
                alive.discard(p)
                changed = True

    if not uncovered:
        return chosen
    if len(alive) > DFS_CORE_LIMIT:
        return chosen + _milp_cover(uncovered, sorted(alive, key=lambda p: rank[p]), covers, cost)

    # Depth-first expansion of the remaining product of sums.  Branch i on
    # the pivot row excludes the implicants of branches < i, so every cover
    # is visited at most once; only strictly cheaper covers replace the best.
    order = sorted(alive, key=lambda p: rank[p])
    row_pis = {c: [p for p in order if covers[p] >> c & 1] for c in bits(uncovered)}
    best: List = [None, None]

    def lower_bound(rows: Dict[int, List[int]]) -> Tuple[int, int]:
        used: set = set()
        count = lits = 0
        for c in sorted(rows, key=lambda c: len(rows[c])):
            pis = rows[c]
            if used.isdisjoint(pis):
                used.update(pis)
                count += 1
                lits += min(cost[p] for p in pis)
        return count, lits

    def search(picks: List[int], left: int, banned: frozenset, count: int, lits: int) -> None:
        while left:
            rows = {c: [p for p in row_pis[c] if p not in banned] for c in bits(left)}
            forced = next((ps[0] for ps in rows.values() if len(ps) == 1), None)
            if any(not ps for ps in rows.values()):
                return
            if forced is None:
                break
            picks = picks + [forced]
            left &= ~covers[forced]
            count += 1
            lits += cost[forced]
        else:
            if best[0] is None or (count, lits) < best[0]:
                best[0], best[1] = (count, lits), list(picks)
            return
        lb_c, lb_l = lower_bound(rows)
        if best[0] is not None and (count + lb_c, lits + lb_l) >= best[0]:
            return
        pivot = min(rows, key=lambda c: (len(rows[c]), c))
        excluded = set(banned)
        for p in rows[pivot]:
            search(picks + [p], left & ~covers[p], frozenset(excluded), count + 1, lits + cost[p])
            excluded.add(p)

    search([], uncovered, frozenset(), 0, 0)
    return chosen + best[1]


def quine_mccluskey(tt: TruthTable) -> NormalForm:
    """Minimal sum-of-products for ``tt``: prime implicants plus an exact cover."""
    _guard(tt.n)
    n = tt.n
    primes = prime_implicants(tt)
    covering: Dict[int, List[int]] = {}
    for idx, cube in enumerate(primes):
        for a in cube_minterms(cube, n):
            covering.setdefault(a, []).append(idx)

    cost = [cube_literals(c, n) for c in primes]
    keys = [_cube_key(c, n) for c in primes]
    chosen = set(petrick(covering, cost, keys))

    cubes = sorted((primes[i] for i in chosen), key=lambda c: _cube_key(c, n))
    full = (1 << n) - 1
    return NormalForm(DNF, n, tuple(Clause(v, full & ~m & ~v) for v, m in cubes))
