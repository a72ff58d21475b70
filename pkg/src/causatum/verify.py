"""Check the necessary/sufficient duality and related properties on one situation.

Both families are computed by brute force from the cause definitions and
only then compared through the boolean transforms, so neither side of a
check is derived from the other.
"""
from __future__ import annotations

import random
from dataclasses import dataclass, field
from typing import Iterator, List, Tuple

from .boolformula import (RouteDisagreement, dual_family, dual_pointwise, dual_syntactic, is_upward_closed,
                          minimal_dual_from_minimal, minimize_family)
from .causes import ACTUAL, NECESSARY, SUFFICIENT, CauseQuery, cause_verdicts, enumerate_causes, is_necessary_cause
from .family import CauseFamily
from .generate import generate_random_model


@dataclass
class Report:
    label: str
    query: CauseQuery
    necessary: CauseFamily
    sufficient: CauseFamily
    failures: List[str] = field(default_factory=list)
    actual_checked: int = 0

    @property
    def passed(self) -> bool:
        return not self.failures


def verify_query(q: CauseQuery, label: str = "model") -> Report:
    """Run every property check; failures are collected, not raised.

    Families here include the empty set when it qualifies, so the dual is
    an exact involution.
    """
    nec = enumerate_causes(q, NECESSARY, minimal_only=False, include_empty=True)
    suf = enumerate_causes(q, SUFFICIENT, minimal_only=False, include_empty=True)
    rep = Report(label, q, nec, suf)
    fail = rep.failures.append

    if not q.phi_holds:
        fail("phi does not hold in the actual world")
        return rep

    syn, pw = dual_syntactic(nec), dual_pointwise(nec)
    if syn != pw:
        fail(f"dual routes disagree: syntactic {syn!r}, pointwise {pw!r}")
    if syn != suf:
        fail(f"dual(necessary) = {syn!r} but sufficient = {suf!r}")
    if dual_syntactic(suf) != nec or dual_pointwise(suf) != nec:
        fail("dual(sufficient) differs from necessary")
    try:
        if dual_family(nec, use_qm=True) != suf:
            fail("dual via minimized CNF differs from sufficient")
    except RouteDisagreement as exc:
        fail(str(exc))

    if not is_upward_closed(nec):
        fail("necessary family is not upward closed")
    if not is_upward_closed(suf):
        fail("sufficient family is not upward closed")

    min_nec, min_suf = minimize_family(nec), minimize_family(suf)
    got = minimal_dual_from_minimal(min_nec, keep_empty=True)
    if got != min_suf:
        fail(f"pipeline from minimal necessary gave {got!r}, expected {min_suf!r}")
    back = minimal_dual_from_minimal(min_suf, keep_empty=True)
    if back != min_nec:
        fail(f"pipeline from minimal sufficient gave {back!r}, expected {min_nec!r}")

    necessary_verdicts = dict(cause_verdicts(q, NECESSARY))
    actual_verdicts = dict(cause_verdicts(q, ACTUAL))
    for mask, verdict in actual_verdicts.items():
        rep.actual_checked += 1
        xs = q.names(mask)
        w = verdict.witness
        combined = dict(w.setting)
        combined.update(w.contingency)
        if q.holds_under(combined) or not is_necessary_cause(q, set(xs) | {v for v, _ in w.contingency}):
            fail(f"actual cause {xs} with contingency {w.contingency} does not extend to a necessary cause")
        nv = necessary_verdicts.get(mask)
        if nv is not None and (w.contingency or w.setting != nv.witness.setting):
            fail(f"necessary cause {xs} not witnessed as actual with empty contingency")
    missing = [q.names(m) for m in necessary_verdicts if m not in actual_verdicts]
    if missing:
        fail(f"necessary causes {missing} are not actual causes")
    return rep


def corpus_jobs(seed: int, count: int, max_endo: int, max_parents: int = 3) -> List[Tuple[int, str, int, int]]:
    """(model seed, label, n_endo, max_parents) per model, all drawn from one master RNG."""
    if max_endo < 2:
        raise ValueError("max_endo must be at least 2")
    master = random.Random(seed)
    jobs = []
    for i in range(count):
        sub_seed = master.getrandbits(32)
        n_endo = master.randint(2, max_endo)
        jobs.append((sub_seed, f"#{i} seed={sub_seed} endo={n_endo}", n_endo, max_parents))
    return jobs


def random_corpus(seed: int, count: int, max_endo: int, max_parents: int = 3) -> Iterator[Tuple[str, CauseQuery]]:
    for sub_seed, label, n_endo, parents in corpus_jobs(seed, count, max_endo, max_parents):
        yield label, generate_random_model(sub_seed, n_endo=n_endo, max_parents=parents)
