import os

import numpy as np
import pytest

ACCEPTANCE_LINES: dict[str, str] = {}


def pytest_addoption(parser):
    parser.addoption("--long", action="store_true", default=False,
                     help="run slow simulations (also enabled by PERMQC_LONG=1)")


def pytest_configure(config):
    config.addinivalue_line("markers", "long: slow test, needs --long or PERMQC_LONG=1")


def long_enabled(config) -> bool:
    return config.getoption("--long") or os.environ.get("PERMQC_LONG") == "1"


def pytest_collection_modifyitems(config, items):
    if long_enabled(config):
        return
    skip = pytest.mark.skip(reason="slow; use --long or PERMQC_LONG=1")
    for item in items:
        if "long" in item.keywords:
            item.add_marker(skip)


def pytest_terminal_summary(terminalreporter):
    if not ACCEPTANCE_LINES:
        return
    terminalreporter.section("acceptance criteria")
    for key in sorted(ACCEPTANCE_LINES, key=lambda k: (int(k.split()[0]), k)):
        terminalreporter.write_line(ACCEPTANCE_LINES[key])


@pytest.fixture
def rng():
    return np.random.default_rng(12345)
