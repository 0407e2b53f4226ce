import pytest

from cacc.frontend import load_theory

from oracles import PAPER


@pytest.fixture(scope="session")
def paper():
    return load_theory(PAPER.read_text()).signature


@pytest.fixture(scope="session")
def paper_theory():
    return load_theory(PAPER.read_text())
