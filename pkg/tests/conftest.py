from pathlib import Path

import pytest

from causatum.dsl import load_query

FIXTURES = Path(__file__).parent / "fixtures"


def fixture_path(name: str) -> str:
    return str(FIXTURES / name)


def load_fixture(name: str, v_res=None):
    q = load_query((FIXTURES / name).read_bytes())
    if v_res is not None:
        from causatum.causes import make_query
        q = make_query(q.model, q.context, q.phi, v_res)
    return q


@pytest.fixture
def wet():
    return load_fixture("wet.scm.txt")


@pytest.fixture
def cruel():
    return load_fixture("cruel.scm.txt")


@pytest.fixture
def conj():
    return load_fixture("conj11.scm.txt")


@pytest.fixture
def disj():
    return load_fixture("disj11.scm.txt")
