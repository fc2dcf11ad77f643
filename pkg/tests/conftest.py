from __future__ import annotations

import numpy as np
import pytest

from doilab.linalg import joint_diagonalize, random_unitary


@pytest.fixture
def rng():
    return np.random.default_rng(12345)


def make_tuple(n: int, dim: int, rng: np.random.Generator, spread: float = 2.0):
    U = random_unitary(dim, rng)
    diags = rng.uniform(-spread, spread, (n, dim))
    return joint_diagonalize([(U * d) @ U.conj().T for d in diags]), U, diags


def random_hermitian(dim: int, rng: np.random.Generator) -> np.ndarray:
    Z = rng.standard_normal((dim, dim)) + 1j * rng.standard_normal((dim, dim))
    return (Z + Z.conj().T) / 2


ACCEPTANCE_LINES: list[str] = []


def pytest_terminal_summary(terminalreporter):
    if ACCEPTANCE_LINES:
        terminalreporter.section("acceptance criteria")
        for line in ACCEPTANCE_LINES:
            terminalreporter.write_line(line)
