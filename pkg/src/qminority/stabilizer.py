"""The game state and its stabilizer.

The state is built twice, once from the product of the four stabilizer
projectors and once by rotating (|0000> - i|1111>)/sqrt(2) with the
equilibrium rotation on every qubit, so the two routes can check each other.
"""
from __future__ import annotations

from dataclasses import dataclass
from functools import reduce
from itertools import combinations
from operator import mul

import numpy as np

from .errors import ConstructionError
from .quantum import DIM, N_PLAYERS, TOL, PauliString, apply_local_unitary, pauli_expectation
from .strategies import S_HAT

#: Unsigned minority generators X1Z2Z3Z4, Z1X2Z3Z4, ...; the state is +1 on their negatives.
MINORITY_WORDS = tuple("".join("X" if j == i else "Z" for j in range(N_PLAYERS)) for i in range(N_PLAYERS))
MINORITY_GENERATORS = tuple(PauliString(w, -1) for w in MINORITY_WORDS)


def build_initial_state() -> np.ndarray:
    state = np.zeros(DIM, dtype=complex)
    state[0] = 1 / np.sqrt(2)
    state[-1] = -1j / np.sqrt(2)
    return state


def stabilizer_projector() -> np.ndarray:
    """Product of (I - G)/2 over the unsigned minority words G."""
    eye = np.eye(DIM, dtype=complex)
    return reduce(np.matmul, ((eye - PauliString(w).matrix()) / 2 for w in MINORITY_WORDS))


def build_game_state_via_projectors() -> np.ndarray:
    proj = stabilizer_projector()
    rank = int(np.linalg.matrix_rank(proj, tol=1e-9))
    if rank != 1:
        raise ConstructionError(f"stabilizer projector has rank {rank}, expected 1")
    for index in range(DIM):
        v = proj[:, index]  # proj @ e_index
        norm = np.linalg.norm(v)
        if norm > 1e-6:
            return v / norm
    raise ConstructionError("no basis vector survives projection")


def build_game_state_via_rotation() -> np.ndarray:
    state = build_initial_state()
    for player in range(1, N_PLAYERS + 1):
        state = apply_local_unitary(state, player, S_HAT)
    return state


def game_state() -> np.ndarray:
    return build_game_state_via_rotation()


def derive_antiminority_generators() -> list[PauliString]:
    """Products of each triple of the signed minority generators.

    Ordered so that entry i carries Z on player i+1: the triple omitting the
    generator whose X sits on that player.
    """
    out = []
    for i in range(N_PLAYERS):
        triple = [g for j, g in enumerate(MINORITY_GENERATORS) if j != i]
        out.append(reduce(mul, triple))
    return out


def generators_commute() -> bool:
    return all(a.commutes_with(b) for a, b in combinations(MINORITY_GENERATORS, 2))


@dataclass(frozen=True)
class StabilizerReport:
    entries: tuple[tuple[PauliString, float], ...]

    @property
    def all_plus_one(self) -> bool:
        return self.max_deviation <= TOL

    @property
    def max_deviation(self) -> float:
        return max(abs(v - 1) for _, v in self.entries)

    def as_dict(self) -> dict:
        return {
            "entries": [{"operator": str(p), "expectation": v} for p, v in self.entries],
            "all_plus_one": self.all_plus_one,
            "max_deviation": self.max_deviation,
        }


def verify_stabilizer(state: np.ndarray) -> StabilizerReport:
    ops = list(MINORITY_GENERATORS) + derive_antiminority_generators()
    return StabilizerReport(tuple((p, pauli_expectation(state, p)) for p in ops))
