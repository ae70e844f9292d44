"""Player strategies: local rotations, deterministic classical tables, POVMs."""
from __future__ import annotations

import itertools
import math
from dataclasses import dataclass, field
from typing import Iterable, Iterator, Sequence

import numpy as np

from .errors import ValidationError
from .quantum import HADAMARD, I2, N_PLAYERS, PAULI_Y, PAULI_Z, TOL, check_unitary, _check_player
from .rules import Question, QuestionList

PI = math.pi

#: The equilibrium rotation (i/sqrt(2))(Y + Z).
S_HAT = 1j / np.sqrt(2) * (PAULI_Y + PAULI_Z)

#: The GHZ minority-game rotation with e^(+-i pi/8) phases.
GHZ_MINORITY_UNITARY = np.array(
    [
        [np.exp(1j * PI / 8), 1j * np.exp(-1j * PI / 8)],
        [1j * np.exp(1j * PI / 8), np.exp(-1j * PI / 8)],
    ]
) / np.sqrt(2)


def wrap_angle(x: float) -> float:
    """Map an angle into (-pi, pi]."""
    y = math.remainder(x, 2 * PI)
    return PI if y <= -PI else y


@dataclass(frozen=True, order=True)
class RotationParams:
    theta: float
    alpha: float
    beta: float

    def __post_init__(self):
        for name in ("theta", "alpha", "beta"):
            v = getattr(self, name)
            if not math.isfinite(v):
                raise ValidationError(f"{name} must be finite")
            object.__setattr__(self, name, float(v))
        if not 0 <= self.theta <= PI:
            raise ValidationError(f"theta must lie in [0, pi], got {self.theta}")
        for name in ("alpha", "beta"):
            v = getattr(self, name)
            if not -PI < v <= PI:
                raise ValidationError(f"{name} must lie in (-pi, pi], got {v}")

    def as_tuple(self) -> tuple[float, float, float]:
        return self.theta, self.alpha, self.beta


CANONICAL_PARAMS = RotationParams(PI / 2, PI / 2, -PI / 2)
IDENTITY_PARAMS = RotationParams(0.0, 0.0, 0.0)
GHZ_MINORITY_PARAMS = RotationParams(PI / 2, PI / 8, -PI / 8)


def rotation_matrices(theta, alpha, beta) -> np.ndarray:
    """Vectorized M(theta, alpha, beta); inputs broadcast, output ``(..., 2, 2)``.

    No range checks; callers feeding grids are responsible for the domain.
    """
    theta, alpha, beta = np.broadcast_arrays(
        np.asarray(theta, float), np.asarray(alpha, float), np.asarray(beta, float)
    )
    c = np.cos(theta / 2)
    s = np.sin(theta / 2)
    m = np.empty(theta.shape + (2, 2), dtype=complex)
    m[..., 0, 0] = np.exp(1j * alpha) * c
    m[..., 0, 1] = 1j * np.exp(1j * beta) * s
    m[..., 1, 0] = 1j * np.exp(-1j * beta) * s
    m[..., 1, 1] = np.exp(-1j * alpha) * c
    return m


def rotation_matrix(p: RotationParams) -> np.ndarray:
    if not isinstance(p, RotationParams):
        p = RotationParams(*p)
    return check_unitary(rotation_matrices(p.theta, p.alpha, p.beta))


def recover_params(u: np.ndarray) -> RotationParams:
    """Invert :func:`rotation_matrix` up to a global phase.

    At the poles (theta = 0 or pi) only one of the phases is meaningful; the
    other is returned as 0.
    """
    u = check_unitary(u, tol=1e-9)
    m = u / np.sqrt(np.linalg.det(u))
    theta = 2 * math.atan2(abs(m[0, 1]), abs(m[0, 0]))
    eps = 1e-12
    alpha = wrap_angle(float(np.angle(m[0, 0]))) if abs(m[0, 0]) > eps else 0.0
    beta = wrap_angle(float(np.angle(-1j * m[0, 1]))) if abs(m[0, 1]) > eps else 0.0
    return RotationParams(min(max(theta, 0.0), PI), alpha, beta)


def haar_unitary(rng: np.random.Generator) -> np.ndarray:
    """Haar-random 2x2 unitary via QR of a complex Gaussian matrix."""
    g = rng.normal(size=(2, 2)) + 1j * rng.normal(size=(2, 2))
    q, r = np.linalg.qr(g)
    d = np.diag(r)
    return q * (d / np.abs(d))


def same_up_to_phase(a: np.ndarray, b: np.ndarray, tol: float = TOL) -> bool:
    """True when ``a = e^{i phi} b`` for some phase."""
    inner = np.vdot(b, a)
    if abs(inner) < 1e-15:
        return False
    phase = inner / abs(inner)
    return bool(np.max(np.abs(a - phase * b)) <= tol)


@dataclass(frozen=True)
class QuantumStrategy:
    """Per player, the rotation applied when asked X and when asked Z."""

    rotations: tuple[tuple[RotationParams, RotationParams], ...]
    name: str = field(default="custom", compare=False)

    def __post_init__(self):
        if len(self.rotations) != N_PLAYERS:
            raise ValidationError(f"need rotations for {N_PLAYERS} players")
        rot = []
        for pair in self.rotations:
            if len(pair) != 2:
                raise ValidationError("each player needs an (s_X, s_Z) pair")
            rot.append(tuple(p if isinstance(p, RotationParams) else RotationParams(*p) for p in pair))
        object.__setattr__(self, "rotations", tuple(rot))

    @classmethod
    def uniform(cls, params: RotationParams, name: str = "custom") -> "QuantumStrategy":
        return cls(((params, params),) * N_PLAYERS, name)

    def params(self, player: int, question: Question | str) -> RotationParams:
        _check_player(player)
        s_x, s_z = self.rotations[player - 1]
        return s_x if Question(question) is Question.X else s_z

    def unitary(self, player: int, question: Question | str) -> np.ndarray:
        return rotation_matrix(self.params(player, question))

    def unitaries_for(self, qlist: QuestionList) -> list[np.ndarray]:
        return [self.unitary(p, qlist[p]) for p in range(1, N_PLAYERS + 1)]

    def with_player(self, player: int, s_x: RotationParams, s_z: RotationParams) -> "QuantumStrategy":
        _check_player(player)
        rot = list(self.rotations)
        rot[player - 1] = (s_x, s_z)
        return QuantumStrategy(tuple(rot), f"{self.name}+deviator{player}")

    def permuted(self, perm: Sequence[int]) -> "QuantumStrategy":
        """Player ``perm[k]`` of the result plays old player ``k+1``'s rotations."""
        rot = [None] * N_PLAYERS
        for k, p in enumerate(perm):
            rot[p - 1] = self.rotations[k]
        return QuantumStrategy(tuple(rot), self.name)

    def describe(self) -> dict:
        return {
            "name": self.name,
            "players": [
                {"X": list(sx.as_tuple()), "Z": list(sz.as_tuple())} for sx, sz in self.rotations
            ],
        }


def canonical_strategy() -> QuantumStrategy:
    return QuantumStrategy.uniform(CANONICAL_PARAMS, "canonical")


def identity_strategy() -> QuantumStrategy:
    return QuantumStrategy.uniform(IDENTITY_PARAMS, "identity")


def ghz_strategy() -> QuantumStrategy:
    return QuantumStrategy.uniform(GHZ_MINORITY_PARAMS, "ghz")


# Classical strategies -------------------------------------------------------

#: Slot order of a classical table: X1..X4 then Z1..Z4.
SLOTS: tuple[tuple[Question, int], ...] = tuple(
    (q, p) for q in (Question.X, Question.Z) for p in range(1, N_PLAYERS + 1)
)


@dataclass(frozen=True)
class ClassicalAssignment:
    """Deterministic answers X_i, Z_i in {+1, -1} for all four players."""

    values: tuple[int, ...]

    def __post_init__(self):
        vals = tuple(int(v) for v in self.values)
        if len(vals) != 2 * N_PLAYERS or any(v not in (1, -1) for v in vals):
            raise ValidationError(f"need {2 * N_PLAYERS} entries of +-1, got {self.values!r}")
        object.__setattr__(self, "values", vals)

    @classmethod
    def from_index(cls, index: int) -> "ClassicalAssignment":
        """Bit k (most significant first) set means slot k answers -1."""
        if not 0 <= index < 2 ** (2 * N_PLAYERS):
            raise ValidationError(f"assignment index must be in 0..255, got {index}")
        n = 2 * N_PLAYERS
        return cls(tuple(-1 if (index >> (n - 1 - k)) & 1 else 1 for k in range(n)))

    @classmethod
    def from_tables(cls, x: Sequence[int], z: Sequence[int]) -> "ClassicalAssignment":
        return cls(tuple(x) + tuple(z))

    @property
    def index(self) -> int:
        return int("".join("1" if v == -1 else "0" for v in self.values), 2)

    def x(self, player: int) -> int:
        return self.values[player - 1]

    def z(self, player: int) -> int:
        return self.values[N_PLAYERS + player - 1]

    def answers(self, qlist: QuestionList) -> tuple[int, ...]:
        return tuple(classical_answer(self, p, qlist[p]) for p in range(1, N_PLAYERS + 1))

    def describe(self) -> dict:
        return {
            "index": self.index,
            "X": [self.x(p) for p in range(1, N_PLAYERS + 1)],
            "Z": [self.z(p) for p in range(1, N_PLAYERS + 1)],
        }


def classical_answer(assignment: ClassicalAssignment, player: int, question: Question | str) -> int:
    _check_player(player)
    return assignment.x(player) if Question(question) is Question.X else assignment.z(player)


def all_assignments() -> Iterator[ClassicalAssignment]:
    for values in itertools.product((1, -1), repeat=2 * N_PLAYERS):
        yield ClassicalAssignment(values)


@dataclass(frozen=True)
class ClassicalMixture:
    """A probability distribution over deterministic assignments.

    Any randomness a classical player might use is drawn before the game, so
    this is the most general classical strategy.
    """

    assignments: tuple[ClassicalAssignment, ...]
    weights: tuple[float, ...]

    def __post_init__(self):
        if len(self.assignments) != len(self.weights) or not self.assignments:
            raise ValidationError("need one weight per assignment")
        if any(w < 0 for w in self.weights) or abs(sum(self.weights) - 1) > 1e-9:
            raise ValidationError("weights must be a probability distribution")


# Two-outcome POVMs ----------------------------------------------------------


@dataclass(frozen=True)
class TwoOutcomePOVM:
    """E+ = a|up><up| + b|down><down| with |up>, |down> the columns of ``eigenbasis``."""

    a: float
    b: float
    eigenbasis: np.ndarray = field(default_factory=lambda: I2.copy(), compare=False)

    def __post_init__(self):
        if not (0 <= self.b <= self.a <= 1):
            raise ValidationError(f"need 0 <= b <= a <= 1, got a={self.a}, b={self.b}")
        basis = check_unitary(self.eigenbasis, tol=1e-9)
        basis = basis.copy()
        basis.flags.writeable = False
        object.__setattr__(self, "eigenbasis", basis)

    def effects(self) -> tuple[np.ndarray, np.ndarray]:
        v = self.eigenbasis
        e_plus = v @ np.diag([self.a, self.b]).astype(complex) @ np.conj(v.T)
        return e_plus, I2 - e_plus


def povm_probabilities(rho: np.ndarray, povm: TwoOutcomePOVM) -> tuple[float, float]:
    """(p+, p-) for a single-qubit density matrix ``rho``.

    Only the diagonal of ``rho`` in the POVM eigenbasis enters.
    """
    rho = np.asarray(rho, dtype=complex)
    if rho.shape != (2, 2):
        raise ValidationError("rho must be a 2x2 density matrix")
    diag = np.real(np.diag(np.conj(povm.eigenbasis.T) @ rho @ povm.eigenbasis))
    p_plus = povm.a * diag[0] + povm.b * diag[1]
    return float(p_plus), float(1 - p_plus)


def projective_up_probability(rho: np.ndarray, povm: TwoOutcomePOVM) -> float:
    up = povm.eigenbasis[:, 0]
    return float(np.real(np.conj(up) @ rho @ up))


def povm_simulate(
    projective_outcomes: Iterable[int], povm: TwoOutcomePOVM, rng: np.random.Generator
) -> np.ndarray:
    """Turn projective outcomes (+1 = up, -1 = down) into POVM outcomes.

    Each outcome is replaced by a weighted coin flip: heads with probability
    ``a`` after up and ``b`` after down; heads reports +1.
    """
    outcomes = np.asarray(list(projective_outcomes) if not isinstance(projective_outcomes, np.ndarray)
                          else projective_outcomes, dtype=int)
    if outcomes.size and not np.all(np.isin(outcomes, (1, -1))):
        raise ValidationError("projective outcomes must be +-1")
    heads_p = np.where(outcomes == 1, povm.a, povm.b)
    return np.where(rng.random(outcomes.shape) < heads_p, 1, -1)


def measurement_basis(question: Question | str) -> np.ndarray:
    """Unitary whose columns are the +1/-1 eigenvectors of the asked observable."""
    return HADAMARD if Question(question) is Question.X else I2


def random_povm(rng: np.random.Generator) -> TwoOutcomePOVM:
    a, b = sorted(rng.random(2), reverse=True)
    return TwoOutcomePOVM(float(a), float(b), haar_unitary(rng))
