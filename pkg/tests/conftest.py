import pathlib

import pytest

from stml.cli import load_rule_set

ROOT = pathlib.Path(__file__).resolve().parent.parent
CORPUS = ROOT / "corpus"
STEPS = sorted((CORPUS / "steps").glob("axpby_step*.c"))
EVAL_PROGRAMS = sorted((CORPUS / "eval").glob("*.c"))
ANNOTATED = CORPUS / "annotated"


@pytest.fixture(scope="session")
def rules():
    return load_rule_set([])


@pytest.fixture(scope="session")
def rules_by_name(rules):
    return {r.name: r for r in rules}


def read(path) -> str:
    return pathlib.Path(path).read_text()
