import numpy as np
import pytest

from cipherid import corpus


@pytest.fixture(scope="session")
def builtin_corpus():
    return corpus.normalize(corpus.builtin_text())


@pytest.fixture(scope="session")
def small_corpus(builtin_corpus):
    return corpus.NormalizedCorpus(builtin_corpus.letters[:200_000], "small")


@pytest.fixture
def rng():
    return np.random.default_rng(12345)


ACCEPTANCE = pytest.StashKey[list]()


def pytest_configure(config):
    config.stash[ACCEPTANCE] = []


@pytest.fixture
def criterion(request):
    """Record one acceptance criterion as a PASS/FAIL line, then assert it.

    `checks` is a list of ``(description, passed)`` pairs.
    """
    lines = request.config.stash[ACCEPTANCE]

    def record(number, title, checks):
        ok = all(passed for _, passed in checks)
        detail = "; ".join(f"{desc} [{'ok' if passed else 'fail'}]" for desc, passed in checks)
        line = f"criterion {number:2d} {'PASS' if ok else 'FAIL'}  {title}: {detail}"
        lines.append((number, line))
        print(line)
        assert ok, line

    return record


def pytest_terminal_summary(terminalreporter, config):
    lines = config.stash.get(ACCEPTANCE, [])
    if lines:
        terminalreporter.section("acceptance criteria")
        for _, line in sorted(lines):
            terminalreporter.write_line(line)
