import itertools

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from conftest import dense_pauli, embed, kron_all, projector_distribution
from qminority.errors import DomainError, ValidationError
from qminority.quantum import (
    PROFILES,
    PauliString,
    answer_product,
    apply_local_unitary,
    basis_state,
    outcome_distribution,
    pauli_expectation,
    permute_players,
    random_state,
    reduced_density_matrix,
    sample_outcome,
)
from qminority.stabilizer import build_game_state_via_projectors, build_initial_state
from qminority.strategies import S_HAT, RotationParams, haar_unitary, rotation_matrix, same_up_to_phase


@pytest.fixture(scope="module")
def psi():
    return build_game_state_via_projectors()


def test_identity_is_noop(rng):
    s = random_state(rng)
    for p in range(1, 5):
        np.testing.assert_allclose(apply_local_unitary(s, p, np.eye(2)), s, atol=1e-15)


def test_shat_on_every_qubit_gives_game_state(psi):
    s = build_initial_state()
    for p in range(1, 5):
        s = apply_local_unitary(s, p, S_HAT)
    # entrywise after removing the (arbitrary) global phase of the projector route
    assert same_up_to_phase(s, psi, tol=1e-12)


def test_m_pi_flips_first_qubit():
    m = rotation_matrix(RotationParams(np.pi, 0.0, 0.0))
    out = apply_local_unitary(basis_state("0000"), 1, m)
    expected = embed(m, 1) @ basis_state("0000")
    np.testing.assert_allclose(out, expected, atol=1e-15)
    assert abs(abs(out[0b1000]) - 1) < 1e-12
    assert np.sum(np.abs(np.delete(out, 0b1000))) < 1e-15


@pytest.mark.parametrize("player", [1, 2, 3, 4])
def test_apply_matches_dense_embedding(rng, player):
    s = random_state(rng)
    u = haar_unitary(rng)
    np.testing.assert_allclose(apply_local_unitary(s, player, u), embed(u, player) @ s, atol=1e-13)


def test_batched_apply_matches_loop(rng):
    states = np.array([random_state(rng) for _ in range(5)])
    us = np.array([haar_unitary(rng) for _ in range(5)])
    batched = apply_local_unitary(states, 3, us)
    for k in range(5):
        np.testing.assert_allclose(batched[k], embed(us[k], 3) @ states[k], atol=1e-13)


def test_apply_rejects_bad_inputs(rng):
    s = random_state(rng)
    with pytest.raises(ValidationError):
        apply_local_unitary(s, 1, np.array([[1, 1], [0, 1]]))
    for bad in (0, 5):
        with pytest.raises(DomainError):
            apply_local_unitary(s, bad, np.eye(2))


@settings(max_examples=50, deadline=None)
@given(seed=st.integers(0, 2**32 - 1), player=st.integers(1, 4))
def test_norm_preserved(seed, player):
    rng = np.random.default_rng(seed)
    out = apply_local_unitary(random_state(rng), player, haar_unitary(rng))
    assert abs(np.linalg.norm(out) - 1) <= 1e-12


def test_stabilizer_generator_expectation(psi):
    assert abs(pauli_expectation(psi, PauliString.parse("-XZZZ")) - 1) < 1e-12


def test_zzzz_on_zero_state():
    assert pauli_expectation(basis_state(0), PauliString("ZZZZ")) == pytest.approx(1, abs=1e-12)


def test_xxxx_matches_dense_oracle(psi):
    oracle = np.vdot(psi, dense_pauli("XXXX") @ psi).real
    assert pauli_expectation(psi, PauliString("XXXX")) == pytest.approx(oracle, abs=1e-12)
    # frozen from the oracle: XXXX is not in the stabilizer group of psi
    assert oracle == pytest.approx(0.0, abs=1e-12)


def test_non_hermitian_rejected(psi):
    with pytest.raises(ValidationError):
        pauli_expectation(psi, PauliString("XZZZ", 1j))


@pytest.mark.parametrize("word", ["".join(w) for w in itertools.product("IXYZ", repeat=4)][::17])
def test_expectation_bounded_and_real(rng, word):
    s = random_state(rng)
    value = pauli_expectation(s, PauliString(word, -1))
    assert isinstance(value, float)
    assert abs(value) <= 1 + 1e-12


def test_pauli_single_slot_products_match_matrices():
    for a, b in itertools.product("IXYZ", repeat=2):
        pa, pb = PauliString(a + "III"), PauliString(b + "III")
        np.testing.assert_allclose((pa * pb).matrix(), pa.matrix() @ pb.matrix(), atol=1e-15)


def test_pauli_group_closure_exhaustive():
    words = ["".join(w) for w in itertools.product("IXYZ", repeat=4)]
    mats = {w: dense_pauli(w) for w in words}
    for i, a in enumerate(words):
        for j, b in enumerate(words):
            prod = PauliString(a) * PauliString(b)
            assert prod.phase in (1, -1, 1j, -1j)
            if (i * 256 + j) % 7 == 0:
                np.testing.assert_allclose(prod.matrix(), mats[a] @ mats[b], atol=1e-15)


def test_pauli_parse_and_str_roundtrip():
    for text in ["-XZZZ", "+ZXXX", "+iYIIZ", "-iIIII"]:
        assert str(PauliString.parse(text)) == text
    with pytest.raises(ValidationError):
        PauliString("XZZ")
    with pytest.raises(ValidationError):
        PauliString("XZZZ", 2)


def test_distribution_basis_state():
    probs = outcome_distribution(basis_state(0), "ZZZZ")
    assert probs[PROFILES.index((1, 1, 1, 1))] == pytest.approx(1)
    assert probs.sum() == pytest.approx(1, abs=1e-12)


def test_minority_bases_give_odd_parity(psi):
    probs = outcome_distribution(psi, "XZZZ")
    support = [p for p, w in zip(PROFILES, probs) if w > 1e-12]
    assert support and all(np.prod(p) == -1 for p in support)


def test_anti_bases_even_parity_and_projector_oracle(psi):
    probs = outcome_distribution(psi, "ZXXX")
    support = [p for p, w in zip(PROFILES, probs) if w > 1e-12]
    assert support and all(np.prod(p) == 1 for p in support)
    np.testing.assert_allclose(probs, projector_distribution(psi, "ZXXX"), atol=1e-12)


@pytest.mark.parametrize("bases", ["".join(b) for b in itertools.product("XZ", repeat=4)])
def test_expectation_matches_distribution(rng, bases):
    s = random_state(rng)
    probs = outcome_distribution(s, bases)
    assert np.all(probs >= 0)
    assert probs.sum() == pytest.approx(1, abs=1e-12)
    np.testing.assert_allclose(probs, projector_distribution(s, bases), atol=1e-12)
    from_dist = float(np.sum(probs * answer_product(PROFILES)))
    assert pauli_expectation(s, PauliString(bases)) == pytest.approx(from_dist, abs=1e-12)


def test_sample_point_mass(rng):
    probs = np.zeros(16)
    probs[5] = 1
    assert all(sample_outcome(probs, rng) == PROFILES[5] for _ in range(20))


def test_sample_reproducible():
    probs = np.full(16, 1 / 16)
    r1, r2 = np.random.default_rng(7), np.random.default_rng(7)
    assert [sample_outcome(probs, r1) for _ in range(2)] == [sample_outcome(probs, r2) for _ in range(2)]


def test_sample_rejects_malformed(rng):
    with pytest.raises(ValidationError):
        sample_outcome(np.full(16, 0.1), rng)
    bad = np.full(16, 1 / 16)
    bad[0] = -0.1
    bad[1] += 0.1
    with pytest.raises(ValidationError):
        sample_outcome(bad, rng)


def test_sample_frequencies(psi):
    probs = outcome_distribution(psi, "XZZZ")
    n = 100_000
    draws = sample_outcome(probs, np.random.default_rng(99), size=n)
    index = ((1 - draws) // 2) @ np.array([8, 4, 2, 1])
    freq = np.bincount(index, minlength=16) / n
    sigma = np.sqrt(probs * (1 - probs) / n)
    assert np.all(np.abs(freq - probs) <= 4 * sigma + 1e-12)


def test_permute_players_matches_dense(rng):
    s = random_state(rng)
    a, b, c, d = [haar_unitary(rng) for _ in range(4)]
    prod = kron_all([a, b, c, d]) @ kron_all([np.array([1, 0])] * 4)
    perm = (2, 3, 4, 1)
    moved = permute_players(prod, perm)
    # player perm[k] now holds old player k+1's factor: (d, a, b, c)
    expected = kron_all([d, a, b, c]) @ kron_all([np.array([1, 0])] * 4)
    np.testing.assert_allclose(moved, expected, atol=1e-13)
    assert np.linalg.norm(permute_players(s, perm)) == pytest.approx(1)


def test_reduced_density_matrix_of_game_state_is_mixed(psi):
    for p in range(1, 5):
        np.testing.assert_allclose(reduced_density_matrix(psi, p), np.eye(2) / 2, atol=1e-12)
