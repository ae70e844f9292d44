"""Dense four-qubit state-vector arithmetic.

States are complex numpy arrays whose last axis has length 16. The basis
index is ``b1 b2 b3 b4`` read as a binary number, player 1 being the most
significant bit and ``bi`` the Z-basis label of player i's qubit. Leading
axes, when present, are batch axes; every function here broadcasts over
them so that whole parameter grids can be pushed through at once.

Measurement outcomes use the +1/-1 answer convention of the game: in the Z
basis +1 is ``|0>`` and -1 is ``|1>``; in the X basis +1 is
``(|0> + |1>)/sqrt(2)`` and -1 is ``(|0> - |1>)/sqrt(2)``. Outcome tables are
arrays of 16 probabilities aligned with :data:`PROFILES`.
"""
from __future__ import annotations

import itertools
from dataclasses import dataclass
from functools import reduce
from typing import Sequence

import numpy as np

from .errors import DomainError, ValidationError

N_PLAYERS = 4
DIM = 2**N_PLAYERS
TOL = 1e-12

I2 = np.eye(2, dtype=complex)
PAULI_X = np.array([[0, 1], [1, 0]], dtype=complex)
PAULI_Y = np.array([[0, -1j], [1j, 0]], dtype=complex)
PAULI_Z = np.array([[1, 0], [0, -1]], dtype=complex)
HADAMARD = np.array([[1, 1], [1, -1]], dtype=complex) / np.sqrt(2)

_PAULI_MATRICES = {"I": I2, "X": PAULI_X, "Y": PAULI_Y, "Z": PAULI_Z}

# Single-qubit Pauli products: (a, b) -> (phase, letter) with a*b = phase*letter.
_PAULI_TABLE = {
    ("I", "I"): (1, "I"), ("I", "X"): (1, "X"), ("I", "Y"): (1, "Y"), ("I", "Z"): (1, "Z"),
    ("X", "I"): (1, "X"), ("X", "X"): (1, "I"), ("X", "Y"): (1j, "Z"), ("X", "Z"): (-1j, "Y"),
    ("Y", "I"): (1, "Y"), ("Y", "X"): (-1j, "Z"), ("Y", "Y"): (1, "I"), ("Y", "Z"): (1j, "X"),
    ("Z", "I"): (1, "Z"), ("Z", "X"): (1j, "Y"), ("Z", "Y"): (-1j, "X"), ("Z", "Z"): (1, "I"),
}
_PHASES = (1, -1, 1j, -1j)

#: The 16 answer profiles, in basis-index order (bit 0 -> +1, bit 1 -> -1).
PROFILES: tuple[tuple[int, int, int, int], ...] = tuple(
    tuple(1 - 2 * b for b in bits) for bits in itertools.product((0, 1), repeat=N_PLAYERS)
)


@dataclass(frozen=True)
class PauliString:
    """A signed tensor product of single-qubit Paulis on the four players."""

    letters: str
    phase: complex = 1

    def __post_init__(self):
        if len(self.letters) != N_PLAYERS or set(self.letters) - set("IXYZ"):
            raise ValidationError(f"bad Pauli letters {self.letters!r}")
        if self.phase not in _PHASES:
            raise ValidationError(f"phase must be one of +-1, +-i, got {self.phase!r}")
        object.__setattr__(self, "phase", complex(self.phase))

    @classmethod
    def parse(cls, text: str) -> "PauliString":
        """Parse ``"-XZZZ"``, ``"+iYIIZ"``, ``"ZXXX"`` and similar."""
        text = text.strip()
        sign = 1
        if text[:1] in "+-":
            sign = -1 if text[0] == "-" else 1
            text = text[1:]
        if text[:1] == "i":
            sign = sign * 1j
            text = text[1:]
        return cls(text, sign)

    @classmethod
    def single(cls, letter: str, player: int, phase: complex = 1) -> "PauliString":
        _check_player(player)
        letters = ["I"] * N_PLAYERS
        letters[player - 1] = letter
        return cls("".join(letters), phase)

    @property
    def is_hermitian(self) -> bool:
        return self.phase.imag == 0

    def __mul__(self, other: "PauliString") -> "PauliString":
        phase = self.phase * other.phase
        letters = []
        for a, b in zip(self.letters, other.letters):
            p, c = _PAULI_TABLE[a, b]
            phase *= p
            letters.append(c)
        return PauliString("".join(letters), phase)

    def __neg__(self) -> "PauliString":
        return PauliString(self.letters, -self.phase)

    def commutes_with(self, other: "PauliString") -> bool:
        clashes = sum(
            1 for a, b in zip(self.letters, other.letters) if "I" not in (a, b) and a != b
        )
        return clashes % 2 == 0

    def matrix(self) -> np.ndarray:
        """The 16x16 dense operator, player 1 as the leftmost tensor factor."""
        return self.phase * reduce(np.kron, (_PAULI_MATRICES[c] for c in self.letters))

    def __str__(self) -> str:
        sign = {1: "+", -1: "-", 1j: "+i", -1j: "-i"}[self.phase]
        return sign + self.letters


def _check_player(player: int) -> None:
    if not isinstance(player, (int, np.integer)) or not 1 <= player <= N_PLAYERS:
        raise DomainError(f"player must be in 1..{N_PLAYERS}, got {player!r}")


def check_state(state: np.ndarray) -> np.ndarray:
    state = np.asarray(state, dtype=complex)
    if state.shape[-1:] != (DIM,):
        raise ValidationError(f"state must have trailing dimension {DIM}, got {state.shape}")
    norms = np.sum(np.abs(state) ** 2, axis=-1)
    if np.any(np.abs(norms - 1) > 1e-10):
        raise ValidationError("state is not normalized")
    return state


def check_unitary(u: np.ndarray, tol: float = TOL) -> np.ndarray:
    u = np.asarray(u, dtype=complex)
    if u.shape[-2:] != (2, 2):
        raise ValidationError(f"local unitary must be 2x2, got {u.shape}")
    gram = np.conj(np.swapaxes(u, -1, -2)) @ u
    if np.max(np.abs(gram - I2), initial=0.0) > tol:
        raise ValidationError("matrix is not unitary")
    return u


def basis_state(bits: str | int) -> np.ndarray:
    """Computational basis state, from an index or a bit string like ``"0110"``."""
    index = int(bits, 2) if isinstance(bits, str) else int(bits)
    if not 0 <= index < DIM:
        raise DomainError(f"basis index {index} out of range")
    state = np.zeros(DIM, dtype=complex)
    state[index] = 1
    return state


def ghz_state() -> np.ndarray:
    """(|0000> + |1111>)/sqrt(2)."""
    state = np.zeros(DIM, dtype=complex)
    state[0] = state[-1] = 1 / np.sqrt(2)
    return state


def apply_local_unitary(state: np.ndarray, player: int, u: np.ndarray) -> np.ndarray:
    """Apply ``u`` to ``player``'s qubit, identity elsewhere.

    ``state`` has shape ``(..., 16)`` and ``u`` shape ``(..., 2, 2)``; batch
    axes broadcast against each other.
    """
    _check_player(player)
    state = check_state(state)
    u = check_unitary(u)
    batch = np.broadcast_shapes(state.shape[:-1], u.shape[:-2])
    axis = len(batch) + player - 1
    psi = np.broadcast_to(state, batch + (DIM,)).reshape(batch + (2,) * N_PLAYERS)
    psi = np.moveaxis(psi, axis, -1)
    # pad u with singleton axes for the three untouched qubits
    uu = u.reshape(u.shape[:-2] + (1,) * (N_PLAYERS - 1) + (2, 2))
    out = np.einsum("...ij,...j->...i", uu, psi)
    return np.moveaxis(out, -1, axis).reshape(batch + (DIM,))


def apply_product(state: np.ndarray, unitaries: Sequence[np.ndarray]) -> np.ndarray:
    """Apply ``unitaries[k]`` to player ``k+1`` for every player."""
    if len(unitaries) != N_PLAYERS:
        raise ValidationError(f"need {N_PLAYERS} local unitaries, got {len(unitaries)}")
    for player, u in enumerate(unitaries, start=1):
        state = apply_local_unitary(state, player, u)
    return state


def pauli_expectation(state: np.ndarray, p: PauliString) -> float | np.ndarray:
    if not p.is_hermitian:
        raise ValidationError(f"{p} is not Hermitian")
    state = check_state(state)
    value = np.einsum("...i,ij,...j->...", np.conj(state), p.matrix(), state)
    return value.real if np.ndim(value) else float(value.real)


def _basis_letters(bases: str | Sequence[str]) -> str:
    letters = "".join(str(getattr(b, "value", b)) for b in bases)
    if len(letters) != N_PLAYERS or set(letters) - {"X", "Z"}:
        raise ValidationError(f"bases must be four of X/Z, got {bases!r}")
    return letters


def outcome_distribution(state: np.ndarray, bases: str | Sequence[str]) -> np.ndarray:
    """Probabilities of the 16 answer profiles when player i measures ``bases[i]``."""
    letters = _basis_letters(bases)
    for player, b in enumerate(letters, start=1):
        if b == "X":
            state = apply_local_unitary(state, player, HADAMARD)
    state = check_state(state)
    probs = np.abs(state) ** 2
    return probs / probs.sum(axis=-1, keepdims=True)


def distribution_table(probs: np.ndarray) -> dict[tuple[int, ...], float]:
    return {profile: float(p) for profile, p in zip(PROFILES, probs)}


def check_distribution(probs: np.ndarray) -> np.ndarray:
    probs = np.asarray(probs, dtype=float)
    if probs.shape != (DIM,):
        raise ValidationError(f"distribution must have {DIM} entries")
    if np.any(probs < -TOL) or abs(probs.sum() - 1) > 1e-9:
        raise ValidationError("distribution must be non-negative and sum to 1")
    return probs


def sample_outcome(probs: np.ndarray, rng: np.random.Generator, size: int | None = None):
    """Draw answer profile(s) from an outcome table.

    Returns one profile tuple, or an ``(size, 4)`` int array when ``size`` is given.
    """
    probs = np.clip(check_distribution(probs), 0, None)
    index = rng.choice(DIM, size=size, p=probs / probs.sum())
    if size is None:
        return PROFILES[int(index)]
    return np.asarray(PROFILES, dtype=int)[index]


def answer_product(profiles) -> np.ndarray:
    return np.prod(np.asarray(profiles), axis=-1)


def permute_players(state: np.ndarray, perm: Sequence[int]) -> np.ndarray:
    """Relabel qubits: player ``perm[k]`` of the result holds old player ``k+1``'s qubit."""
    if sorted(perm) != list(range(1, N_PLAYERS + 1)):
        raise DomainError(f"not a permutation of 1..{N_PLAYERS}: {perm!r}")
    state = check_state(state)
    psi = state.reshape(state.shape[:-1] + (2,) * N_PLAYERS)
    b = state.ndim - 1
    src = [b + k for k in range(N_PLAYERS)]
    dst = [b + p - 1 for p in perm]
    return np.moveaxis(psi, src, dst).reshape(state.shape)


def reduced_density_matrix(state: np.ndarray, player: int) -> np.ndarray:
    _check_player(player)
    psi = np.moveaxis(check_state(state).reshape((2,) * N_PLAYERS), player - 1, 0).reshape(2, -1)
    return psi @ np.conj(psi.T)


def overlap(a: np.ndarray, b: np.ndarray) -> float:
    """|<a|b>|, the phase-insensitive comparison used for state equality."""
    return float(abs(np.vdot(a, b)))


def random_state(rng: np.random.Generator) -> np.ndarray:
    v = rng.normal(size=DIM) + 1j * rng.normal(size=DIM)
    return v / np.linalg.norm(v)
