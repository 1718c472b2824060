import os

import pytest

from compsum.montecarlo import available

ACCEPTANCE_LINES: list[str] = []


def pytest_terminal_summary(terminalreporter):
    if ACCEPTANCE_LINES:
        terminalreporter.section("acceptance criteria")
        for line in ACCEPTANCE_LINES:
            terminalreporter.write_line(line)


@pytest.fixture(params=list(available()))
def backend(request):
    return request.param


@pytest.fixture
def tmp_cfg(tmp_path):
    def make(text, name="model.cfg"):
        p = tmp_path / name
        p.write_text(text)
        return str(p)

    return make


os.environ.setdefault("COMPSUM_BACKEND", "auto")
