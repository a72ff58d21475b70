import pytest

from causatum import verify
from causatum.family import CauseFamily
from causatum.generate import generate_random_model
from causatum.verify import corpus_jobs, random_corpus, verify_query
from conftest import load_fixture


@pytest.mark.parametrize("name", ["wet.scm.txt", "cruel.scm.txt", "conj11.scm.txt", "disj11.scm.txt"])
def test_fixtures_pass(name):
    rep = verify_query(load_fixture(name))
    assert rep.passed, rep.failures
    assert rep.actual_checked > 0


def test_corpus_passes():
    reports = [verify_query(q, label) for label, q in random_corpus(1, 60, 5)]
    assert all(r.passed for r in reports), [r.failures for r in reports if not r.passed]


def test_corpus_is_deterministic():
    assert corpus_jobs(9, 20, 6) == corpus_jobs(9, 20, 6)
    assert corpus_jobs(9, 20, 6) != corpus_jobs(10, 20, 6)
    assert all(2 <= n <= 6 for _, _, n, _ in corpus_jobs(9, 200, 6))


def test_corpus_rejects_tiny_models():
    with pytest.raises(ValueError):
        corpus_jobs(0, 1, 1)


def _first_model_with_causes():
    for seed in range(100):
        q = generate_random_model(seed, n_endo=4)
        if verify.enumerate_causes(q, verify.NECESSARY):
            return q
    raise AssertionError("no model with necessary causes")


def test_detects_corrupted_sufficient_family(monkeypatch):
    q = _first_model_with_causes()
    original = verify.enumerate_causes

    def corrupted(q, kind, **kw):
        f = original(q, kind, **kw)
        if kind == verify.SUFFICIENT:
            return CauseFamily(f.n, f.members ^ {f.full})
        return f

    monkeypatch.setattr(verify, "enumerate_causes", corrupted)
    rep = verify_query(q)
    assert not rep.passed
    assert any("sufficient" in msg for msg in rep.failures)


def test_detects_actual_cause_outside_necessary(monkeypatch):
    q = load_fixture("cruel.scm.txt")
    monkeypatch.setattr(verify, "is_necessary_cause", lambda q, xs: False)
    rep = verify_query(q)
    assert any("does not extend to a necessary cause" in msg for msg in rep.failures)
