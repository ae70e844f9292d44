from functools import reduce

import numpy as np
import pytest

_MATS = {
    "I": np.eye(2, dtype=complex),
    "X": np.array([[0, 1], [1, 0]], dtype=complex),
    "Y": np.array([[0, -1j], [1j, 0]], dtype=complex),
    "Z": np.array([[1, 0], [0, -1]], dtype=complex),
    "H": np.array([[1, 1], [1, -1]], dtype=complex) / np.sqrt(2),
}


def kron_all(mats):
    """Dense tensor product, player 1 leftmost. Independent of the einsum path."""
    return reduce(np.kron, mats)


def dense_pauli(word, sign=1):
    return sign * kron_all([_MATS[c] for c in word])


def embed(u, player):
    mats = [_MATS["I"]] * 4
    mats[player - 1] = np.asarray(u)
    return kron_all(mats)


def projector_distribution(state, bases):
    """Outcome table from explicit rank-1 projectors onto product eigenvectors."""
    vecs = {
        ("Z", 1): np.array([1, 0], complex),
        ("Z", -1): np.array([0, 1], complex),
        ("X", 1): np.array([1, 1], complex) / np.sqrt(2),
        ("X", -1): np.array([1, -1], complex) / np.sqrt(2),
    }
    from qminority.quantum import PROFILES

    out = []
    for prof in PROFILES:
        v = kron_all([vecs[b, a] for b, a in zip(bases, prof)])
        out.append(abs(np.vdot(v, state)) ** 2)
    return np.array(out)


@pytest.fixture
def rng():
    return np.random.default_rng(12345)


# acceptance bookkeeping: one line per criterion, printed at the end of the run
ACCEPTANCE_RESULTS: dict[int, tuple[str, str, str]] = {}


def pytest_terminal_summary(terminalreporter):
    if not ACCEPTANCE_RESULTS:
        return
    terminalreporter.section("acceptance criteria")
    for n in sorted(ACCEPTANCE_RESULTS):
        status, name, detail = ACCEPTANCE_RESULTS[n]
        terminalreporter.write_line(f"{status} criterion {n:2d}: {name} ({detail})")
