import json
from pathlib import Path

import numpy as np
import pytest

from sqdrift.determinant import hartree_fock_determinant
from sqdrift.hamiltonian import read_fcidump
from sqdrift.pauli import jordan_wigner

from _report import LINES as ACCEPTANCE_LINES

DATA = Path(__file__).parent / "data"


@pytest.fixture(scope="session")
def references():
    return json.loads((DATA / "references.json").read_text())


@pytest.fixture(scope="session")
def fcidump_path():
    return lambda name: DATA / f"{name}.fcidump"


@pytest.fixture(scope="session")
def h2():
    return read_fcidump(DATA / "h2.fcidump")


@pytest.fixture(scope="session")
def h4():
    return read_fcidump(DATA / "h4.fcidump")


@pytest.fixture(scope="session")
def h2o():
    return read_fcidump(DATA / "h2o.fcidump")


@pytest.fixture(scope="session")
def h2_pauli(h2):
    return jordan_wigner(h2)


@pytest.fixture(scope="session")
def h4_pauli(h4):
    return jordan_wigner(h4)


@pytest.fixture
def hf_det():
    return lambda ham: hartree_fock_determinant(ham.n_orbitals, ham.n_alpha, ham.n_beta)


@pytest.fixture
def rng():
    return np.random.default_rng(1234)


def pytest_terminal_summary(terminalreporter):
    if ACCEPTANCE_LINES:
        terminalreporter.section("acceptance criteria")
        for line in ACCEPTANCE_LINES:
            terminalreporter.write_line(line)
