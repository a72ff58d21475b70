import itertools

import pytest
from hypothesis import given, settings, strategies as st

from causatum.boolformula import is_upward_closed, minimize_family
from causatum.causes import (ACTUAL, NECESSARY, SUFFICIENT, Witness, check_ac1, enumerate_causes,
                             is_actual_cause, is_necessary_cause, is_sufficient_cause, make_query)
from causatum.errors import QueryTooLarge, ValidationError
from causatum.family import CauseFamily
from causatum.generate import generate_random_model
from causatum.model import CausalFormula, Const, Eq, Var, solve, satisfies
from conftest import load_fixture


def fam(q, *sets):
    return CauseFamily.from_sets(q.v_res, sets)


# Reference definitions, written directly against satisfies() and solve().

def _holds(q, iv):
    return satisfies(q.model, q.context, CausalFormula(tuple(iv), q.phi))


def _settings(xs):
    return itertools.product((0, 1), repeat=len(xs))


def ref_necessary(q, xs):
    return _holds(q, ()) and any(not _holds(q, zip(xs, v)) for v in _settings(xs))


def ref_sufficient(q, xs):
    rest = [v for v in q.v_res if v not in xs]
    return _holds(q, ()) and all(_holds(q, zip(rest, v)) for v in _settings(rest))


def ref_actual(q, xs):
    actual = solve(q.model, q.context)
    others = [v for v in q.model.signature.endogenous_names if v not in xs]
    if not _holds(q, ()):
        return False
    for k in range(len(others) + 1):
        for ws in itertools.combinations(others, k):
            frozen = [(w, actual[w]) for w in ws]
            if any(not _holds(q, list(zip(xs, v)) + frozen) for v in _settings(xs)):
                return True
    return False


REF = {NECESSARY: ref_necessary, SUFFICIENT: ref_sufficient, ACTUAL: ref_actual}


def ref_family(q, kind, include_empty=False):
    members = []
    for k in range(0 if include_empty else 1, len(q.v_res) + 1):
        for xs in itertools.combinations(q.v_res, k):
            if REF[kind](q, xs):
                members.append(xs)
    return CauseFamily.from_sets(q.v_res, members)


class TestWorkedExamples:
    def test_ac1(self, wet, cruel):
        assert check_ac1(wet, ["W"])
        assert check_ac1(cruel, ["WR"])
        negated = make_query(wet.model, wet.context, Eq(Var("F"), Const(0)))
        assert not check_ac1(negated, ["W"])

    def test_wet_ground_necessary(self, wet):
        v = is_necessary_cause(wet, ["W"])
        assert v.holds and v.witness == Witness((("W", 0),))
        assert enumerate_causes(wet, NECESSARY) == fam(wet, ["W"])

    def test_cruel_neighbour_not_necessary(self, cruel):
        assert not is_necessary_cause(cruel, ["WR"]).holds

    def test_cruel_neighbour_actual(self, cruel):
        v = is_actual_cause(cruel, ["WR"])
        assert v.holds
        assert v.witness == Witness(setting=(("WR", 0),), contingency=(("S", 0),))

    def test_necessary_is_actual_with_empty_contingency(self, wet):
        v = is_actual_cause(wet, ["W"])
        assert v.holds and v.witness == Witness((("W", 0),), ())

    def test_disjunction_necessary(self, disj):
        assert not is_necessary_cause(disj, ["A"]).holds
        v = is_necessary_cause(disj, ["A", "B"])
        assert v.holds and v.witness.setting == (("A", 0), ("B", 0))

    def test_sufficient(self, conj, disj):
        assert is_sufficient_cause(conj, ["A", "B"]).holds
        assert is_sufficient_cause(disj, ["A"]).holds
        assert not is_sufficient_cause(conj, ["A"]).holds

    def test_conjunction_actual(self, conj):
        v = is_actual_cause(conj, ["A"])
        assert v.holds and v.witness == Witness((("A", 0),), ())

    def test_table_one(self, conj, disj):
        assert enumerate_causes(conj, NECESSARY) == fam(conj, ["A"], ["B"])
        assert enumerate_causes(conj, SUFFICIENT) == fam(conj, ["A", "B"])
        assert enumerate_causes(disj, NECESSARY) == fam(disj, ["A", "B"])
        assert enumerate_causes(disj, SUFFICIENT) == fam(disj, ["A"], ["B"])

    def test_wet_ground_restricted_all(self):
        q = load_fixture("wet.scm.txt", v_res=("S", "W"))
        assert enumerate_causes(q, NECESSARY, minimal_only=False) == fam(q, ["W"], ["S", "W"])
        assert enumerate_causes(q, NECESSARY) == fam(q, ["W"])


class TestQueryErrors:
    def test_phi_variable_in_v_res(self, wet):
        with pytest.raises(ValidationError) as ei:
            make_query(wet.model, wet.context, wet.phi, ["F"])
        assert ei.value.diagnostics[0].kind == "InvalidRestrict"

    def test_unknown_restricted(self, wet):
        with pytest.raises(ValidationError):
            make_query(wet.model, wet.context, wet.phi, ["Q"])

    def test_sufficient_outside_v_res(self):
        q = load_fixture("wet.scm.txt", v_res=("W",))
        with pytest.raises(ValidationError):
            is_sufficient_cause(q, ["S"])

    def test_unknown_kind(self, wet):
        with pytest.raises(ValueError):
            enumerate_causes(wet, "probable")

    def test_phi_false_gives_nothing(self, wet):
        q = make_query(wet.model, wet.context, Eq(Var("F"), Const(0)))
        for kind in (NECESSARY, SUFFICIENT, ACTUAL):
            assert not enumerate_causes(q, kind, minimal_only=False)

    def test_too_large(self, wet, monkeypatch):
        monkeypatch.setenv("CAUSATUM_MAX_N", "1")
        with pytest.raises(QueryTooLarge):
            make_query(wet.model, wet.context, wet.phi)


seeds = st.integers(0, 2 ** 32 - 1)


@settings(max_examples=40, deadline=None)
@given(seeds, st.integers(1, 4))
def test_engine_matches_reference(seed, n):
    q = generate_random_model(seed, n_endo=n)
    for kind in (NECESSARY, SUFFICIENT, ACTUAL):
        assert enumerate_causes(q, kind, minimal_only=False, include_empty=True) == \
            ref_family(q, kind, include_empty=True), kind


@settings(max_examples=80, deadline=None)
@given(seeds, st.integers(1, 6))
def test_structural_properties(seed, n):
    q = generate_random_model(seed, n_endo=n, max_parents=3)
    nec = enumerate_causes(q, NECESSARY, minimal_only=False)
    suf = enumerate_causes(q, SUFFICIENT, minimal_only=False, include_empty=True)
    act = enumerate_causes(q, ACTUAL, minimal_only=False)
    assert is_upward_closed(nec) and is_upward_closed(suf)
    # the empty set is never necessary
    assert not enumerate_causes(q, NECESSARY, minimal_only=False, include_empty=True).contains_empty
    assert nec.members <= act.members
    assert enumerate_causes(q, NECESSARY) == minimize_family(nec)
    for mask in act:
        xs = q.names(mask)
        w = is_actual_cause(q, xs).witness
        assert is_necessary_cause(q, set(xs) | {v for v, _ in w.contingency}).holds


@settings(max_examples=40, deadline=None)
@given(seeds, st.integers(2, 5))
def test_witnesses_falsify_phi(seed, n):
    q = generate_random_model(seed, n_endo=n)
    for mask in enumerate_causes(q, ACTUAL, minimal_only=False):
        w = is_actual_cause(q, q.names(mask)).witness
        assert not _holds(q, w.setting + w.contingency)
        actual = solve(q.model, q.context)
        assert all(actual[v] == x for v, x in w.contingency)
