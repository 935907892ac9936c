from importlib import resources
from pathlib import Path

import pytest

from cqedkit.circuit import build_matrices, load_netlist, reduce_to_lom

DATA = Path(str(resources.files("cqedkit") / "data"))


@pytest.fixture(scope="session")
def data_dir():
    return DATA


@pytest.fixture(scope="session")
def device_netlist():
    return load_netlist(DATA / "device_netlist.json")


@pytest.fixture(scope="session")
def device_lom(device_netlist):
    return reduce_to_lom(build_matrices(device_netlist), "qubit", "resonator", "qubit")


ACCEPTANCE = []


def record(number, label, ok, detail=""):
    """Store one acceptance line and print it (visible with -s)."""
    line = f"[{'PASS' if ok else 'FAIL'}] criterion {number}: {label}" + (f" ({detail})" if detail else "")
    ACCEPTANCE.append(line)
    print(line)
    return ok


def pytest_collection_modifyitems(config, items):
    # the wall-clock criterion has to see everything else run first
    last = [i for i in items if i.get_closest_marker("runs_last")]
    items[:] = [i for i in items if i not in last] + last


def pytest_configure(config):
    config.addinivalue_line("markers", "runs_last: execute after every other test")


def pytest_terminal_summary(terminalreporter):
    if ACCEPTANCE:
        terminalreporter.section("acceptance criteria")
        for line in ACCEPTANCE:
            terminalreporter.write_line(line)
