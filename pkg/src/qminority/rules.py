"""The referee: question lists, game selection, payoffs and posteriors."""
from __future__ import annotations

import enum
from dataclasses import dataclass
from fractions import Fraction
from functools import lru_cache
from typing import Sequence

import numpy as np

from .errors import ValidationError
from .quantum import N_PLAYERS, PROFILES

QUARTER = Fraction(1, 4)


class Question(str, enum.Enum):
    X = "X"
    Z = "Z"

    def __str__(self) -> str:
        return self.value


class GameKind(str, enum.Enum):
    MINORITY = "minority"
    ANTI_MINORITY = "anti-minority"

    def __str__(self) -> str:
        return self.value


@dataclass(frozen=True)
class QuestionList:
    """One question per player. Any X/Z word can be built; only 8 are valid."""

    questions: tuple[Question, ...]

    def __post_init__(self):
        qs = tuple(Question(q) for q in self.questions)
        if len(qs) != N_PLAYERS:
            raise ValidationError(f"a question list has {N_PLAYERS} entries, got {len(qs)}")
        object.__setattr__(self, "questions", qs)

    @classmethod
    def parse(cls, text: str | Sequence[str]) -> "QuestionList":
        return cls(tuple(Question(c) for c in text))

    @property
    def is_valid(self) -> bool:
        return self.questions.count(Question.X) in (1, 3)

    @property
    def kind(self) -> GameKind:
        return classify(self)

    def __getitem__(self, player: int) -> Question:
        """Question for ``player`` (1-based)."""
        return self.questions[player - 1]

    def __str__(self) -> str:
        return "".join(q.value for q in self.questions)


def classify(qlist: QuestionList) -> GameKind:
    n_x = qlist.questions.count(Question.X)
    if n_x == 1:
        return GameKind.MINORITY
    if n_x == 3:
        return GameKind.ANTI_MINORITY
    raise ValidationError(
        f"question list {qlist} is promised never to be asked "
        "(valid lists have exactly one X or exactly one Z)"
    )


def _chart() -> tuple[QuestionList, ...]:
    minority = [["Z"] * 4 for _ in range(4)]
    anti = [["X"] * 4 for _ in range(4)]
    for i in range(4):
        minority[i][i] = "X"
        anti[i][i] = "Z"
    return tuple(QuestionList.parse(q) for q in minority + anti)


#: The referee's chart: four minority lists, then four anti-minority lists.
QUESTION_LISTS: tuple[QuestionList, ...] = _chart()
LIST_WEIGHT = Fraction(1, len(QUESTION_LISTS))


def all_question_lists() -> list[tuple[QuestionList, GameKind]]:
    return [(q, classify(q)) for q in QUESTION_LISTS]


def lone_player(answers: Sequence[int]) -> int | None:
    """1-based index of the single player who disagrees with the other three."""
    if len(answers) != N_PLAYERS or any(a not in (1, -1) for a in answers):
        raise ValidationError(f"answers must be {N_PLAYERS} values of +-1, got {answers!r}")
    answers = list(answers)
    for value in (1, -1):
        if answers.count(value) == 1:
            return answers.index(value) + 1
    return None


def _kind_payoff(kind: GameKind, answers: Sequence[int]) -> tuple[Fraction, ...]:
    winner = lone_player(answers)
    if kind is GameKind.MINORITY:
        return tuple(Fraction(int(winner == p)) for p in range(1, N_PLAYERS + 1))
    share = QUARTER if winner is None else Fraction(0)
    return (share,) * N_PLAYERS


def payoff(qlist: QuestionList, answers: Sequence[int]) -> tuple[Fraction, ...]:
    """Exact payoff to each player for one round."""
    return _kind_payoff(classify(qlist), answers)


def win_condition_product(kind: GameKind) -> int:
    return -1 if kind is GameKind.MINORITY else 1


@lru_cache(maxsize=None)
def _payoff_matrix(kind: GameKind) -> np.ndarray:
    table = np.array([[float(x) for x in _kind_payoff(kind, prof)] for prof in PROFILES])
    table.flags.writeable = False
    return table


def payoff_matrix(qlist_or_kind: QuestionList | GameKind) -> np.ndarray:
    """``(16, 4)`` float table of payoffs, rows aligned with ``PROFILES``.

    Every entry is 0, 1/4 or 1, so the floats are exact.
    """
    kind = qlist_or_kind if isinstance(qlist_or_kind, GameKind) else classify(qlist_or_kind)
    return _payoff_matrix(kind)


def referee_sample(rng: np.random.Generator, size: int | None = None):
    """Uniform draw from the chart; a list of draws when ``size`` is given."""
    idx = rng.integers(len(QUESTION_LISTS), size=size)
    if size is None:
        return QUESTION_LISTS[int(idx)]
    return [QUESTION_LISTS[i] for i in idx]


def posterior(question: Question | str) -> tuple[Fraction, Fraction]:
    """(P(minority), P(anti-minority)) given only the player's own question."""
    question = Question(question)
    lists = [q for q in QUESTION_LISTS if q[1] == question]
    # by symmetry of the chart any fixed player gives the same counts
    n_min = sum(classify(q) is GameKind.MINORITY for q in lists)
    p_min = Fraction(n_min, len(lists))
    return p_min, 1 - p_min
