import pytest

from taptype.langmodel import build_lm, default_lm
from taptype.layout import qwerty_layout


def pytest_configure(config):
    config.addinivalue_line("markers", "acceptance: spec acceptance criteria")


def pytest_terminal_summary(terminalreporter):
    """One PASS/FAIL line per acceptance criterion at the end of the run."""
    rows = []
    for status in ("passed", "failed"):
        for rep in terminalreporter.stats.get(status, []):
            if getattr(rep, "when", None) == "call" and "test_acceptance" in rep.nodeid:
                rows.append((rep.nodeid.split("::")[-1], status.upper()))
    if rows:
        terminalreporter.write_sep("=", "acceptance criteria")
        for name, status in sorted(rows):
            terminalreporter.write_line(f"{status:6s} {name}")


@pytest.fixture(scope="session")
def layout():
    return qwerty_layout()


@pytest.fixture(scope="session")
def lm_small():
    """Top-200 words of the shipped lexicon (decoder-oracle sized)."""
    return default_lm(200)


@pytest.fixture(scope="session")
def lm_medium():
    return default_lm(2000)


@pytest.fixture()
def mini_lm():
    """Tiny handmade lexicon for exact-value tests."""
    text = "cat\t10\ncar\t10\nbat\t10\n"
    word_lm, _ = build_lm(text)
    return word_lm
