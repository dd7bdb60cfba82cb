import json
import pathlib

import pytest

from geoclose.closure import system_from_spec

CORPUS = pathlib.Path(__file__).resolve().parents[1] / "src" / "geoclose" / "corpus"

CORPUS_NAMES = [
    "equivalence_3x3.json",
    "equality_quotient_6.json",
    "nonexchange_pairs_5.json",
    "trivial_components_8.json",
    "linear_gf2_7.json",
    "identity_5.json",
    "collapse_rules_6.json",
]


def load_spec(name):
    return json.loads((CORPUS / name).read_text())


def corpus_path(name):
    return str(CORPUS / name)


@pytest.fixture(scope="session")
def corpus_systems():
    """Session-shared systems: memo tables accumulate across tests."""
    return {name: system_from_spec(load_spec(name), name=name) for name in CORPUS_NAMES}


@pytest.fixture(scope="session")
def eq33(corpus_systems):
    return corpus_systems["equivalence_3x3.json"]


@pytest.fixture(scope="session")
def eqq(corpus_systems):
    return corpus_systems["equality_quotient_6.json"]


@pytest.fixture(scope="session")
def nonex(corpus_systems):
    return corpus_systems["nonexchange_pairs_5.json"]


@pytest.fixture(scope="session")
def trivial(corpus_systems):
    return corpus_systems["trivial_components_8.json"]


@pytest.fixture(scope="session")
def gf2(corpus_systems):
    return corpus_systems["linear_gf2_7.json"]


@pytest.fixture(scope="session")
def identity5(corpus_systems):
    return corpus_systems["identity_5.json"]


@pytest.fixture(scope="session")
def collapse6(corpus_systems):
    return corpus_systems["collapse_rules_6.json"]


@pytest.fixture(scope="session", autouse=True)
def warm_kernels(corpus_systems):
    """Compile the kernels and build closure tables before any timed test."""
    for system in corpus_systems.values():
        system.closure_table()
    return True
