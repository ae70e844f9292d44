import itertools
from fractions import Fraction

import numpy as np
import pytest

from qminority import classical as cl
from qminority.errors import ValidationError
from qminority.rules import GameKind, classify
from qminority.strategies import ClassicalAssignment, ClassicalMixture, all_assignments

F = Fraction

# Exhaustive optimum over the 256 tables, recorded from the first enumeration.
EXHAUSTIVE_OPTIMUM = F(3, 16)
MAX_SATISFIED = 6


def test_constraint_system_layout():
    assert [c.lhs() for c in cl.CONSTRAINTS[:4]] == ["X1Z2Z3Z4", "Z1X2Z3Z4", "Z1Z2X3Z4", "Z1Z2Z3X4"]
    assert [c.lhs() for c in cl.CONSTRAINTS[4:]] == ["Z1X2X3X4", "X1Z2X3X4", "X1X2Z3X4", "X1X2X3Z4"]
    for c in cl.CONSTRAINTS:
        assert c.required == (-1 if classify(c.qlist) is GameKind.MINORITY else 1)


def test_constant_assignment_satisfies_anti_only():
    assert cl.satisfied_equations(ClassicalAssignment((1,) * 8)) == tuple("efgh")


def test_x_minus_z_plus_satisfies_minority_only():
    a = ClassicalAssignment.from_tables([-1] * 4, [1] * 4)
    assert cl.satisfied_equations(a) == tuple("abcd")


def test_abc_and_h_never_together():
    for a in all_assignments():
        sat = set(cl.satisfied_equations(a))
        assert not {"a", "b", "c", "h"} <= sat


def test_enumeration_complete_and_no_full_solution():
    records = cl.enumerate_all()
    assert len(records) == 256
    assert len({r.assignment for r in records}) == 256
    assert max(r.n_satisfied for r in records) == MAX_SATISFIED
    assert all(r.n_satisfied < 8 for r in records)


def test_brute_force_max_satisfied_independent():
    # plain loop over sign tuples, no package helpers beyond the chart words
    words = [c.lhs() for c in cl.CONSTRAINTS]
    required = [c.required for c in cl.CONSTRAINTS]
    best = 0
    for vals in itertools.product((1, -1), repeat=8):
        table = {f"X{p}": vals[p - 1] for p in range(1, 5)} | {f"Z{p}": vals[3 + p] for p in range(1, 5)}
        count = 0
        for w, r in zip(words, required):
            prod = np.prod([table[w[i:i + 2]] for i in range(0, 8, 2)])
            count += prod == r
        best = max(best, count)
    assert best == MAX_SATISFIED


def test_symmetrized_payoff_is_satisfied_over_32():
    for r in cl.enumerate_all():
        assert r.symmetrized_payoff == F(r.n_satisfied, 32)
        assert sum(r.payoffs) == F(r.n_satisfied, 8)


def test_symmetrized_average_over_relabelings():
    for index in (0, 1, 77, 200, 255):
        a = ClassicalAssignment.from_index(index)
        sym = cl.symmetrized_payoffs(a)
        assert len(set(sym)) == 1
        assert sym[0] == F(len(cl.satisfied_equations(a)), 32)


def test_best_symmetrized_payoff():
    s = cl.enumeration_summary()
    assert s.best_symmetrized_payoff == EXHAUSTIVE_OPTIMUM == F(s.max_satisfied, 32)
    assert s.best_symmetrized_payoff < F(1, 4)
    assert not s.all_eight_satisfiable


def test_mixtures_never_beat_deterministic_max():
    rng = np.random.default_rng(77)
    records = cl.enumerate_all()
    for _ in range(50):
        idx = rng.choice(256, size=5, replace=False)
        w = rng.dirichlet(np.ones(5))
        mix = ClassicalMixture(tuple(records[i].assignment for i in idx), tuple(float(x) for x in w))
        total = sum(cl.mixture_payoffs(mix))
        # affine: equals the weighted totals
        expected = sum(wi * float(sum(records[i].payoffs)) for i, wi in zip(idx, w))
        assert total == pytest.approx(expected, abs=1e-12)
        assert total / 4 <= float(EXHAUSTIVE_OPTIMUM) + 1e-12


def test_witness_abc_vs_h():
    w = cl.contradiction_witness("abc", "h")
    assert w.product_lhs == "X1X2X3Z4"
    assert w.product_rhs == -1
    assert w.target_rhs == 1
    assert w.contradiction


def test_witness_efg_vs_d():
    w = cl.contradiction_witness("efg", "d")
    assert w.product_lhs == "Z1Z2Z3X4" == w.target_lhs
    assert w.product_rhs == 1 and w.target_rhs == -1
    assert w.contradiction


def test_witness_symbolic_matches_numeric():
    for a in all_assignments():
        prod = 1
        for label in "abc":
            c = cl.CONSTRAINTS["abcdefgh".index(label)]
            prod *= np.prod(a.answers(c.qlist))
        h = cl.CONSTRAINTS[7]
        assert prod == np.prod(a.answers(h.qlist))


def test_non_witness():
    w = cl.contradiction_witness("ab", "h")
    assert not w.same_lhs and not w.contradiction
    with pytest.raises(ValidationError):
        cl.contradiction_witness("az", "h")


@pytest.mark.parametrize("m_x", [F(0), F(1)])
def test_ledger_endpoints(m_x):
    assert cl.bound_ledger(m_x).max_payoff == F(7, 32)


def test_ledger_crossover():
    led = cl.bound_ledger(F(1, 4))
    assert (7 - 4 * F(1, 4)) / 32 == (17 + 4 * F(1, 4)) / 96 == F(3, 16)
    assert led.max_payoff == F(3, 16)


def test_ledger_values_and_identity():
    for k in range(33):
        m_x = F(k, 32)
        led = cl.bound_ledger(m_x)
        assert 3 * led.m_z + led.m_x == 1
        assert led.x_sacrifice_minority == F(3, 16)
        assert led.x_sacrifice_anti == (1 + 2 * m_x) / 8
        assert led.z_sacrifice_minority == (11 - 8 * m_x) / 48
        assert led.z_sacrifice_minority == (1 + 8 * led.m_z) / 16
        assert led.z_sacrifice_anti == (1 - m_x) / 4
        assert led.max_payoff == led.branch_formula
        assert 0 <= led.max_payoff <= 1


def test_ledger_rejects_out_of_range():
    for bad in (F(-1, 10), F(11, 10)):
        with pytest.raises(ValidationError):
            cl.bound_ledger(bad)


def test_classical_supremum():
    sup = cl.classical_supremum()
    assert sup.analytic_bound == F(7, 32)
    assert sup.ratio == F(7, 8)
    assert sup.exhaustive_optimum <= sup.analytic_bound
    assert sup.exhaustive_optimum < sup.quantum_value
    assert sup.sweep_max == F(7, 32)
    assert sup.consistent
