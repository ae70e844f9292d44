"""Classical (local hidden variable) analysis.

Every classical strategy is a distribution over the 256 deterministic answer
tables, so exhaustive enumeration settles the no-go, and payoffs are exact
fractions throughout.
"""
from __future__ import annotations

import itertools
from collections import Counter
from dataclasses import dataclass
from fractions import Fraction
from functools import lru_cache
from typing import Sequence

from .errors import ValidationError
from .quantum import N_PLAYERS
from .rules import (
    QUESTION_LISTS,
    LIST_WEIGHT,
    QuestionList,
    classify,
    payoff,
    win_condition_product,
)
from .strategies import ClassicalAssignment, ClassicalMixture, all_assignments

QUANTUM_VALUE = Fraction(1, 4)
ANALYTIC_BOUND = Fraction(7, 32)

#: Labels a..h in chart order: four minority lists, then four anti-minority lists.
LABELS = "abcdefgh"


@dataclass(frozen=True)
class Constraint:
    label: str
    qlist: QuestionList
    required: int

    def lhs(self) -> str:
        return "".join(f"{q.value}{p}" for p, q in enumerate(self.qlist.questions, start=1))

    def __str__(self) -> str:
        return f"({self.label}) {self.lhs()} = {self.required:+d}"


CONSTRAINTS: tuple[Constraint, ...] = tuple(
    Constraint(label, q, win_condition_product(classify(q))) for label, q in zip(LABELS, QUESTION_LISTS)
)


def _constraint(label: str) -> Constraint:
    try:
        return CONSTRAINTS[LABELS.index(label)]
    except ValueError:
        raise ValidationError(f"unknown constraint label {label!r}") from None


def satisfied_equations(assignment: ClassicalAssignment) -> tuple[str, ...]:
    out = []
    for c in CONSTRAINTS:
        prod = 1
        for a in assignment.answers(c.qlist):
            prod *= a
        if prod == c.required:
            out.append(c.label)
    return tuple(out)


@dataclass(frozen=True)
class AssignmentRecord:
    assignment: ClassicalAssignment
    satisfied: tuple[str, ...]
    payoffs: tuple[Fraction, ...]

    @property
    def n_satisfied(self) -> int:
        return len(self.satisfied)

    @property
    def symmetrized_payoff(self) -> Fraction:
        """Per-player payoff after a uniformly random relabeling of the players."""
        return sum(self.payoffs, Fraction(0)) / N_PLAYERS


def exact_payoffs(assignment: ClassicalAssignment) -> tuple[Fraction, ...]:
    totals = [Fraction(0)] * N_PLAYERS
    for q in QUESTION_LISTS:
        for p, v in enumerate(payoff(q, assignment.answers(q))):
            totals[p] += LIST_WEIGHT * v
    return tuple(totals)


def relabeled(assignment: ClassicalAssignment, perm: Sequence[int]) -> ClassicalAssignment:
    """Player ``perm[k]`` takes over old player ``k+1``'s answers."""
    x = [0] * N_PLAYERS
    z = [0] * N_PLAYERS
    for k, p in enumerate(perm):
        x[p - 1] = assignment.x(k + 1)
        z[p - 1] = assignment.z(k + 1)
    return ClassicalAssignment.from_tables(x, z)


def symmetrized_payoffs(assignment: ClassicalAssignment) -> tuple[Fraction, ...]:
    """Average of :func:`exact_payoffs` over all 4! relabelings."""
    perms = list(itertools.permutations(range(1, N_PLAYERS + 1)))
    totals = [Fraction(0)] * N_PLAYERS
    for perm in perms:
        for p, v in enumerate(exact_payoffs(relabeled(assignment, perm))):
            totals[p] += v
    return tuple(t / len(perms) for t in totals)


def mixture_payoffs(mixture: ClassicalMixture) -> tuple[float, ...]:
    table = {r.assignment: r.payoffs for r in enumerate_all()}
    out = [0.0] * N_PLAYERS
    for a, w in zip(mixture.assignments, mixture.weights):
        for p in range(N_PLAYERS):
            out[p] += w * float(table[a][p])
    return tuple(out)


@lru_cache(maxsize=1)
def enumerate_all() -> tuple[AssignmentRecord, ...]:
    return tuple(
        AssignmentRecord(a, satisfied_equations(a), exact_payoffs(a)) for a in all_assignments()
    )


@dataclass(frozen=True)
class EnumerationSummary:
    n_assignments: int
    n_distinct: int
    max_satisfied: int
    satisfied_histogram: dict[int, int]
    all_eight_satisfiable: bool
    best_symmetrized_payoff: Fraction
    best_assignment: ClassicalAssignment


def enumeration_summary() -> EnumerationSummary:
    records = enumerate_all()
    best = max(records, key=lambda r: (r.symmetrized_payoff, -r.assignment.index))
    hist = Counter(r.n_satisfied for r in records)
    return EnumerationSummary(
        n_assignments=len(records),
        n_distinct=len({r.assignment for r in records}),
        max_satisfied=max(hist),
        satisfied_histogram=dict(sorted(hist.items())),
        all_eight_satisfiable=bool(hist.get(len(CONSTRAINTS), 0)),
        best_symmetrized_payoff=best.symmetrized_payoff,
        best_assignment=best.assignment,
    )


@dataclass(frozen=True)
class Witness:
    """Product of several constraints compared against another one."""

    combined: tuple[str, ...]
    target: str
    product_lhs: str
    product_rhs: int
    target_lhs: str
    target_rhs: int

    @property
    def same_lhs(self) -> bool:
        return self.product_lhs == self.target_lhs

    @property
    def contradiction(self) -> bool:
        return self.same_lhs and self.product_rhs != self.target_rhs

    def as_dict(self) -> dict:
        return {
            "combined": list(self.combined),
            "target": self.target,
            "product_lhs": self.product_lhs,
            "product_rhs": self.product_rhs,
            "target_lhs": self.target_lhs,
            "target_rhs": self.target_rhs,
            "contradiction": self.contradiction,
        }


def multiply_lhs(labels: Sequence[str]) -> str:
    """Symbolic product of constraint left-hand sides.

    Each variable is +-1, so only exponent parity survives; the result keeps
    each player's odd-power variables in X-before-Z order.
    """
    parity: Counter = Counter()
    for label in labels:
        for p, q in enumerate(_constraint(label).qlist.questions, start=1):
            parity[q.value, p] += 1
    terms = [f"{q}{p}" for p in range(1, N_PLAYERS + 1) for q in "XZ" if parity[q, p] % 2]
    return "".join(terms) or "1"


def contradiction_witness(combined: Sequence[str] = "abc", target: str = "h") -> Witness:
    rhs = 1
    for label in combined:
        rhs *= _constraint(label).required
    t = _constraint(target)
    return Witness(
        combined=tuple(combined),
        target=target,
        product_lhs=multiply_lhs(combined),
        product_rhs=rhs,
        target_lhs=multiply_lhs([target]),
        target_rhs=t.required,
    )


# Analytic bound ----------------------------------------------------------------

CROSSOVER = Fraction(1, 4)


@dataclass(frozen=True)
class BoundLedger:
    m_x: Fraction
    m_z: Fraction
    x_sacrifice_minority: Fraction
    x_sacrifice_anti: Fraction
    z_sacrifice_minority: Fraction
    z_sacrifice_anti: Fraction
    max_payoff: Fraction

    @property
    def branch_formula(self) -> Fraction:
        if self.m_x <= CROSSOVER:
            return (7 - 4 * self.m_x) / 32
        return (17 + 4 * self.m_x) / 96

    def as_dict(self) -> dict:
        return {k: getattr(self, k) for k in (
            "m_x", "m_z", "x_sacrifice_minority", "x_sacrifice_anti",
            "z_sacrifice_minority", "z_sacrifice_anti", "max_payoff", "branch_formula",
        )}


def bound_ledger(m_x) -> BoundLedger:
    """Best-case payoff bookkeeping for a given minority share of the X-asked player.

    The X-asked player keeps whichever of her two sacrifices pays more, and so
    does the Z-asked player; the overall value is the average of the two.
    """
    m_x = Fraction(m_x)
    if not 0 <= m_x <= 1:
        raise ValidationError(f"M_X must lie in [0, 1], got {m_x}")
    m_z = (1 - m_x) / 3
    x_m = Fraction(3, 4) * Fraction(1, 4)
    x_a = Fraction(3, 4) * Fraction(2, 3) * Fraction(1, 4) + Fraction(1, 4) * m_x
    z_m = Fraction(1, 4) * Fraction(1, 4) + Fraction(3, 4) * Fraction(2, 3) * m_z
    z_a = Fraction(3, 4) * m_z
    best = (max(x_m, x_a) + max(z_m, z_a)) / 2
    return BoundLedger(m_x, m_z, x_m, x_a, z_m, z_a, best)


@dataclass(frozen=True)
class SupremumReport:
    analytic_bound: Fraction
    exhaustive_optimum: Fraction
    quantum_value: Fraction
    sweep_max: Fraction

    @property
    def ratio(self) -> Fraction:
        return self.analytic_bound / self.quantum_value

    @property
    def consistent(self) -> bool:
        return (
            self.exhaustive_optimum <= self.analytic_bound
            and self.exhaustive_optimum < self.quantum_value
            and self.analytic_bound < self.quantum_value
            and self.sweep_max == self.analytic_bound
        )


def classical_supremum(n_steps: int = 64) -> SupremumReport:
    sweep = max(bound_ledger(Fraction(k, n_steps)).max_payoff for k in range(n_steps + 1))
    return SupremumReport(
        analytic_bound=ANALYTIC_BOUND,
        exhaustive_optimum=enumeration_summary().best_symmetrized_payoff,
        quantum_value=QUANTUM_VALUE,
        sweep_max=sweep,
    )

