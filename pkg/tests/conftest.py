import os
from pathlib import Path

import pytest

from fibstack.core import poset_category
from fibstack.corpus import build_corpus
from fibstack.presheaf import SetPresheaf
from fibstack.site import generate_topology

ROOT = Path(__file__).resolve().parent.parent
ACCEPTANCE_LINES = []


def push_category():
    return poset_category(["W", "U", "V", "S"], {("W", "U"), ("W", "V"), ("U", "S"), ("V", "S"), ("W", "S")},
                          name="PUSH")


def push_site():
    return generate_topology(push_category(), {"S": [[("U", "S"), ("V", "S")]]}, name="push")


def doubled_top(E, values=("a", "b")):
    """Two elements over ``S``, one point everywhere else."""
    vals = {X: ["*"] for X in E.objects}
    vals["S"] = list(values)
    restr = {f: {x: "*" for x in vals[E.tgt(f)]} for f in E.arrows if not E.is_identity(f)}
    return SetPresheaf(E, vals, restr, name="doubled").check()


@pytest.fixture(scope="session")
def push():
    return push_site()


@pytest.fixture(scope="session")
def corpus():
    return build_corpus(0)


@pytest.fixture(scope="session")
def root():
    return ROOT


def pytest_terminal_summary(terminalreporter):
    if ACCEPTANCE_LINES:
        terminalreporter.section("acceptance criteria")
        for line in ACCEPTANCE_LINES:
            terminalreporter.write_line(line)


os.environ.setdefault("HYPOTHESIS_STORAGE_DIRECTORY", str(ROOT / ".hypothesis"))
