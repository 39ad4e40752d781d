import os
from dataclasses import replace

import pytest

from reslb.cli import scenario_path
from reslb.scenario import load_scenario

DESK = scenario_path("builtin:desk_17cell")


@pytest.fixture(scope="session")
def desk():
    return load_scenario(DESK)


@pytest.fixture(scope="session")
def short_desk(desk):
    """Desk scenario cut to a few minutes for quick engine tests."""
    return replace(desk, sim=replace(desk.sim, duration_s=300))


@pytest.fixture
def tmp_out(tmp_path):
    return os.fspath(tmp_path)


ACCEPTANCE = {}


def pytest_terminal_summary(terminalreporter):
    if not ACCEPTANCE:
        return
    tr = terminalreporter
    tr.section("acceptance criteria")
    for n in sorted(ACCEPTANCE):
        ok, detail = ACCEPTANCE[n]
        tr.write_line(f"criterion {n}: {'PASS' if ok else 'FAIL'} - {detail}")
