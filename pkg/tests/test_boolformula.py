import itertools
import random
import warnings

import pytest
from hypothesis import given, settings, strategies as st

from causatum import boolformula as bf
from causatum.boolformula import (CNF, DNF, Clause, EmptyCauseWarning, NormalForm, TruthTable, canonical_cnf,
                                  dual_family, dual_pointwise, dual_syntactic, eval_nf, family_to_dnf,
                                  is_antichain, is_upward_closed, minimal_dual_from_minimal, minimize_family,
                                  prime_implicants, quine_mccluskey, saturate_upward, switch_connectives,
                                  truth_table)
from causatum.errors import NotAntichain, QueryTooLarge
from causatum.family import CauseFamily

AB = ("A", "B")


def F(v_res, *sets):
    return CauseFamily.from_sets(v_res, sets)


def lits(clause):
    return clause.literals


def clause_set(nf):
    return {lits(c) for c in nf.clauses}


# -- brute-force oracles ------------------------------------------------------

def all_cubes(n):
    """Every product term as (value, dontcare) over n variables."""
    for trits in itertools.product((0, 1, 2), repeat=n):
        value = sum(1 << i for i, t in enumerate(trits) if t == 1)
        mask = sum(1 << i for i, t in enumerate(trits) if t == 2)
        yield value, mask


def cube_points(cube, n):
    value, mask = cube
    return {a for a in range(1 << n) if a & ~mask == value}


def brute_primes(tt):
    on = set(tt.minterms())
    implicants = [c for c in all_cubes(tt.n) if cube_points(c, tt.n) <= on]
    return {c for c in implicants
            if not any(cube_points(c, tt.n) < cube_points(d, tt.n) for d in implicants)}


def brute_optimum(tt):
    """Smallest (implicant count, literal count) over subsets of prime implicants."""
    on = set(tt.minterms())
    if not on:
        return (0, 0)
    primes = sorted(brute_primes(tt))
    best = None
    for k in range(1, len(primes) + 1):
        for combo in itertools.combinations(primes, k):
            if set().union(*(cube_points(c, tt.n) for c in combo)) == on:
                cost = (k, sum(tt.n - bin(c[1]).count("1") for c in combo))
                best = cost if best is None else min(best, cost)
        if best is not None:
            return best


def cost_of(nf):
    return (len(nf.clauses), sum(len(c) for c in nf.clauses))


def blocker(f):
    """Subsets meeting every minimal member; the dual of an upward-closed family."""
    mins = minimize_family(f).members
    return CauseFamily(f.n, frozenset(x for x in range(1 << f.n) if all(x & m for m in mins)))


def families(n):
    return st.frozensets(st.integers(0, (1 << n) - 1)).map(lambda s: CauseFamily(n, s))


sized_families = st.integers(0, 5).flatmap(families)


# -- examples -----------------------------------------------------------------

class TestNormalForms:
    def test_family_to_dnf_conj_necessary(self):
        nf = family_to_dnf(F(AB, ["A"], ["B"]))
        assert nf.kind == DNF
        assert clause_set(nf) == {frozenset({(0, True), (1, False)}), frozenset({(0, False), (1, True)})}

    def test_family_to_dnf_empty(self):
        nf = family_to_dnf(CauseFamily(2, frozenset()))
        assert nf.clauses == () and truth_table(nf).bits == 0

    def test_family_to_dnf_top(self):
        assert clause_set(family_to_dnf(F(AB, AB))) == {frozenset({(0, True), (1, True)})}

    def test_eval(self):
        xor = family_to_dnf(F(AB, ["A"], ["B"]))
        assert not eval_nf(xor, (1, 1))
        assert eval_nf(xor, (1, 0)) and eval_nf(xor, 0b10)
        empty_cnf = NormalForm(CNF, 2, ())
        assert all(eval_nf(empty_cnf, a) for a in range(4))

    def test_eval_rejects_bad_length(self):
        with pytest.raises(ValueError):
            eval_nf(NormalForm(CNF, 2, ()), (1,))

    def test_truth_table_order(self):
        tt = truth_table(family_to_dnf(F(AB, ["A"], ["B"], AB)))
        assert tt.values() == (False, True, True, True)

    def test_canonical_cnf(self):
        assert canonical_cnf(TruthTable.from_values([1, 1, 1, 1])).clauses == ()
        a_or_b = TruthTable.from_values([0, 1, 1, 1])
        assert clause_set(canonical_cnf(a_or_b)) == {frozenset({(0, True), (1, True)})}
        a_and_b = TruthTable.from_values([0, 0, 0, 1])
        assert clause_set(canonical_cnf(a_and_b)) == {
            frozenset({(0, True), (1, True)}),
            frozenset({(0, True), (1, False)}),
            frozenset({(0, False), (1, True)}),
        }

    def test_switch_connectives(self):
        cnf = NormalForm(CNF, 2, (Clause.from_literals([(0, True), (1, True)]),))
        dnf = switch_connectives(cnf)
        assert dnf.kind == DNF and dnf.clauses == cnf.clauses
        assert truth_table(dnf).values() == (False, False, False, True)
        assert switch_connectives(NormalForm(CNF, 2, ())) == NormalForm(DNF, 2, ())
        two = NormalForm(CNF, 2, (Clause.from_literals([(0, True), (1, True)]), Clause.from_literals([(0, False)])))
        assert switch_connectives(two).clauses == two.clauses

    def test_complementary_clause_rejected(self):
        with pytest.raises(ValueError):
            Clause(1, 1)

    def test_truth_table_length(self):
        with pytest.raises(ValueError):
            TruthTable.from_values([1, 0, 1])

    def test_format(self):
        nf = family_to_dnf(F(AB, ["A"], ["B"]))
        assert str(nf) == "(a & !b) | (!a & b)"


class TestFamilyAlgebra:
    def test_dual_examples(self):
        assert dual_family(F(AB, ["A"], ["B"], AB)) == F(AB, AB)
        assert dual_family(F(AB, AB)) == F(AB, ["A"], ["B"], AB)
        # constant true dualizes to constant false and back
        full = CauseFamily(2, frozenset(range(4)))
        empty = CauseFamily(2, frozenset())
        assert dual_family(full) == empty
        assert dual_family(empty) == full

    def test_saturate(self):
        assert saturate_upward(F(AB, ["A"], ["B"])) == F(AB, ["A"], ["B"], AB)
        assert saturate_upward(CauseFamily(2, frozenset())) == CauseFamily(2, frozenset())
        assert saturate_upward(F(AB, AB)) == F(AB, AB)

    def test_minimize(self):
        assert minimize_family(F(AB, ["A"], ["B"], AB)) == F(AB, ["A"], ["B"])
        assert minimize_family(F(AB, AB)) == F(AB, AB)
        abc = ("A", "B", "C")
        got = minimize_family(F(abc, ["A"], ["A", "B"], ["B", "C"], abc))
        assert got == F(abc, ["A"], ["B", "C"])

    def test_pipeline_examples(self):
        assert minimal_dual_from_minimal(F(AB, ["A"], ["B"])) == F(AB, AB)
        assert minimal_dual_from_minimal(F(AB, AB)) == F(AB, ["A"], ["B"])

    def test_pipeline_empty_warns(self):
        with pytest.warns(EmptyCauseWarning):
            assert minimal_dual_from_minimal(CauseFamily(2, frozenset())) == CauseFamily(2, frozenset())
        assert minimal_dual_from_minimal(CauseFamily(2, frozenset()), keep_empty=True) == CauseFamily.of(2, [0])

    def test_pipeline_rejects_non_antichain(self):
        with pytest.raises(NotAntichain):
            minimal_dual_from_minimal(F(AB, ["A"], AB))

    def test_iteration_is_canonical(self):
        f = CauseFamily.of(3, range(8))
        assert list(f) == [0, 1, 2, 4, 3, 5, 6, 7]

    def test_guard(self, monkeypatch):
        monkeypatch.setenv("CAUSATUM_MAX_N", "3")
        with pytest.raises(QueryTooLarge):
            dual_family(CauseFamily(4, frozenset()))
        monkeypatch.setenv("CAUSATUM_MAX_N", "99")
        assert bf.max_n() == bf.HARD_MAX_N


class TestQuineMcCluskey:
    def test_absorption(self):
        tt = truth_table(NormalForm(DNF, 2, (Clause.from_literals([(0, True), (1, True)]),
                                            Clause.from_literals([(0, True), (1, False)]))))
        assert quine_mccluskey(tt).clauses == (Clause.from_literals([(0, True)]),)

    def test_false_and_true(self):
        assert quine_mccluskey(TruthTable(3, 0)).clauses == ()
        assert quine_mccluskey(TruthTable(3, 255)).clauses == (Clause(0, 0),)

    def test_cyclic_three_variables(self):
        tt = TruthTable.from_minterms(3, [0, 1, 2, 5, 6, 7])
        result = quine_mccluskey(tt)
        assert truth_table(result) == tt
        assert len(result.clauses) == 3
        assert cost_of(result) == brute_optimum(tt) == (3, 6)

    def test_prime_implicants_oracle_n3(self):
        for bits in range(256):
            tt = TruthTable(3, bits)
            assert set(prime_implicants(tt)) == brute_primes(tt)

    def test_exact_minimum_n3(self):
        for bits in range(256):
            tt = TruthTable(3, bits)
            result = quine_mccluskey(tt)
            assert truth_table(result) == tt
            assert cost_of(result) == brute_optimum(tt), bits

    def test_deterministic(self):
        rng = random.Random(3)
        for _ in range(20):
            tt = TruthTable(6, rng.getrandbits(64))
            assert quine_mccluskey(tt) == quine_mccluskey(tt)

    def test_milp_agrees_with_search(self, monkeypatch):
        rng = random.Random(11)
        tables = [TruthTable(n, rng.getrandbits(1 << n)) for n in (4, 5, 6) for _ in range(40)]
        searched = [quine_mccluskey(tt) for tt in tables]
        monkeypatch.setattr(bf, "DFS_CORE_LIMIT", 0)
        for tt, expected in zip(tables, searched):
            got = quine_mccluskey(tt)
            assert truth_table(got) == tt
            assert cost_of(got) == cost_of(expected)

    def test_minimal_cnf(self):
        tt = TruthTable.from_values([0, 1, 1, 1])
        cnf = bf.minimal_cnf(tt)
        assert cnf.kind == CNF and truth_table(cnf) == tt and len(cnf.clauses) == 1


@settings(max_examples=150, deadline=None)
@given(st.integers(1, 5).flatmap(lambda n: st.integers(0, (1 << (1 << n)) - 1).map(lambda b: TruthTable(n, b))))
def test_qm_sound_and_prime(tt):
    result = quine_mccluskey(tt)
    assert truth_table(result) == tt
    primes = brute_primes(tt) if tt.n <= 4 else set(prime_implicants(tt))
    full = (1 << tt.n) - 1
    for c in result.clauses:
        assert (c.pos, full & ~(c.pos | c.neg)) in primes


@settings(max_examples=300, deadline=None)
@given(sized_families)
def test_dual_invariants(f):
    d = dual_family(f)
    assert dual_pointwise(f) == dual_syntactic(f) == d
    assert dual_family(d) == f
    assert dual_syntactic(f, use_qm=True) == d


@settings(max_examples=300, deadline=None)
@given(sized_families)
def test_closure_algebra(f):
    up = saturate_upward(f)
    low = minimize_family(f)
    assert is_upward_closed(up) and is_antichain(low)
    assert saturate_upward(up) == up and minimize_family(low) == low
    assert saturate_upward(low) == up and minimize_family(up) == low
    assert is_upward_closed(dual_family(up))
    assert dual_family(up) == blocker(up)


@settings(max_examples=200, deadline=None)
@given(sized_families)
def test_pipeline_matches_direct(f):
    low = minimize_family(f)
    with warnings.catch_warnings():
        warnings.simplefilter("ignore", EmptyCauseWarning)
        got = minimal_dual_from_minimal(low)
    expected = minimize_family(dual_family(saturate_upward(low))).without_empty()
    assert got == expected
    back = minimal_dual_from_minimal(minimal_dual_from_minimal(low, keep_empty=True), keep_empty=True)
    assert back == low
