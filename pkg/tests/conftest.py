import pytest

from dynflow.anntrace import corpus_dir, load_corpus, load_file
from dynflow.labels import Lattice


@pytest.fixture(scope="session")
def corpus():
    return load_corpus([corpus_dir()])


@pytest.fixture(scope="session")
def by_name(corpus):
    return {t.name: t for t in corpus}


@pytest.fixture
def lh():
    return Lattice.two_point()


def corpus_test(name):
    return load_file(corpus_dir() / f"{name}.json")
