import os

import pytest
from hypothesis import settings

from lilrand.cli import data_path

settings.register_profile("default", deadline=None, max_examples=100)
settings.load_profile(os.environ.get("HYPOTHESIS_PROFILE", "default"))


@pytest.fixture(scope="session")
def appendix_path():
    return data_path("appendix_corpus.txt")


@pytest.fixture(scope="session")
def reference_path():
    return data_path("reference_histogram.csv")


@pytest.fixture(scope="session")
def appendix_corpus(appendix_path):
    from lilrand.bitio import load_corpus

    with open(appendix_path, "rb") as fh:
        return load_corpus(fh.read(), "appendix-decimal", 10_000, overflow="truncate")


_ACCEPTANCE_KEY = pytest.StashKey[list]()


def pytest_configure(config):
    config.stash[_ACCEPTANCE_KEY] = []


@pytest.fixture
def verdict(request):
    """Record one PASS/FAIL line for the acceptance summary, then assert."""
    lines = request.config.stash[_ACCEPTANCE_KEY]

    def record(label: str, ok: bool, detail: str = "", notes=()):
        line = f"{'PASS' if ok else 'FAIL'} {label}" + (f": {detail}" if detail else "")
        lines.append(line)
        lines.extend(f"    {note}" for note in notes)
        assert ok, line
    return record


def pytest_terminal_summary(terminalreporter, config):
    lines = config.stash.get(_ACCEPTANCE_KEY, [])
    if lines:
        terminalreporter.section("acceptance criteria")
        for line in lines:
            terminalreporter.write_line(line)
