import os
import sys

import pytest

sys.path.insert(0, os.path.dirname(__file__))

from helpers import prover_command  # noqa: E402


@pytest.fixture(scope="session")
def prover():
    cmd = prover_command()
    if cmd is None:
        pytest.skip("no TPTP prover available (install one or `npm i -g z3-solver`)")
    return cmd


def pytest_configure(config):
    config.addinivalue_line("markers", "prover: needs an external TPTP prover")
    config.addinivalue_line("markers", "slow: long-running acceptance checks")
