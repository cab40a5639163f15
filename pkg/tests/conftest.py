from pathlib import Path

import pytest

from rbmt import data_path, read_grammar

DATA = Path(__file__).parent / "data"


@pytest.fixture(scope="session")
def coord_ja():
    return read_grammar(data_path("coord_ja.scfg"))


@pytest.fixture(scope="session")
def mini_zh():
    return read_grammar(data_path("mini_zh.scfg"))


@pytest.fixture(scope="session")
def demo_zh():
    return read_grammar(data_path("demo_zh.scfg"))


@pytest.fixture(scope="session")
def data_dir():
    return DATA


# one line per acceptance criterion, filled in by test_acceptance.py
ACCEPTANCE: dict[int, tuple[bool | None, str]] = {}


def pytest_terminal_summary(terminalreporter):
    if not ACCEPTANCE:
        return
    terminalreporter.section("acceptance criteria")
    for n in sorted(ACCEPTANCE):
        ok, detail = ACCEPTANCE[n]
        status = "SKIP" if ok is None else "PASS" if ok else "FAIL"
        terminalreporter.write_line(f"criterion {n:>2}: {status}  {detail}")
