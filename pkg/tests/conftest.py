import pytest

from swarmsar.kb import load_default_exemplars, load_default_kb


@pytest.fixture(scope="session")
def kb():
    return load_default_kb()


@pytest.fixture(scope="session")
def exemplars():
    return load_default_exemplars()
