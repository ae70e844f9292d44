"""Exact expected payoffs, deviation analysis and Monte Carlo tournaments."""
from __future__ import annotations

import math
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Callable, Sequence

import numpy as np

from .quantum import (
    N_PLAYERS,
    PROFILES,
    apply_local_unitary,
    basis_state,
    ghz_state,
    outcome_distribution,
    sample_outcome,
)
from .rules import (
    QUESTION_LISTS,
    GameKind,
    Question,
    classify,
    payoff_matrix,
)
from .stabilizer import build_initial_state
from .strategies import (
    CANONICAL_PARAMS,
    GHZ_MINORITY_UNITARY,
    PI,
    S_HAT,
    ClassicalAssignment,
    ClassicalMixture,
    QuantumStrategy,
    RotationParams,
    TwoOutcomePOVM,
    measurement_basis,
    rotation_matrices,
    wrap_angle,
)

QUARTER = 0.25
FORMULA_TOL = 1e-9
ARGMAX_TOL = 1e-9
LIST_TOL = 1e-12


@dataclass(frozen=True)
class PayoffReport:
    per_player: tuple[float, ...]
    per_question_list: dict[str, tuple[float, ...]]
    metadata: dict = field(default_factory=dict)

    @property
    def total(self) -> float:
        return float(sum(self.per_player))

    def as_dict(self) -> dict:
        return {
            "per_player": list(self.per_player),
            "total": self.total,
            "per_question_list": {k: list(v) for k, v in self.per_question_list.items()},
            "metadata": self.metadata,
        }


def conditional_distributions(state: np.ndarray, strategy: QuantumStrategy) -> np.ndarray:
    """``(8, 16)`` outcome tables, one per chart entry, after the players' rotations."""
    out = []
    for qlist in QUESTION_LISTS:
        s = state
        for player, u in enumerate(strategy.unitaries_for(qlist), start=1):
            s = apply_local_unitary(s, player, u)
        out.append(outcome_distribution(s, qlist.questions))
    return np.array(out)


def expected_payoffs(
    state: np.ndarray, strategy: QuantumStrategy, state_name: str = "custom"
) -> PayoffReport:
    dists = conditional_distributions(state, strategy)
    per_list = {}
    for qlist, probs in zip(QUESTION_LISTS, dists):
        per_list[str(qlist)] = tuple(float(x) for x in probs @ payoff_matrix(qlist))
    per_player = tuple(
        float(np.mean([v[p] for v in per_list.values()])) for p in range(N_PLAYERS)
    )
    meta = {"strategy": strategy.describe(), "state": state_name}
    return PayoffReport(per_player, per_list, meta)


# Single-player deviations ----------------------------------------------------


@dataclass(frozen=True)
class ParameterGrid:
    """theta uniform on [0, pi]; alpha and beta uniform on (-pi, pi]."""

    n_theta: int = 61
    n_phase: int = 72

    def __post_init__(self):
        if self.n_theta < 1 or self.n_phase < 1:
            raise ValueError("grid resolutions must be positive")

    def thetas(self) -> np.ndarray:
        if self.n_theta == 1:
            return np.array([PI / 2])
        return np.linspace(0.0, PI, self.n_theta)

    def phases(self) -> np.ndarray:
        k = np.arange(1, self.n_phase + 1)
        return -PI + 2 * PI * k / self.n_phase

    @property
    def theta_step(self) -> float:
        return PI / max(self.n_theta - 1, 1)

    @property
    def phase_step(self) -> float:
        return 2 * PI / self.n_phase

    def as_dict(self) -> dict:
        return {"n_theta": self.n_theta, "n_phase": self.n_phase, "points": self.n_theta * self.n_phase**2}


@dataclass(frozen=True)
class PointGrid:
    """An explicit list of parameter points; the degenerate grid of the sweep."""

    points: tuple[RotationParams, ...]

    def as_dict(self) -> dict:
        return {"points": [list(p.as_tuple()) for p in self.points]}


def _grid_arrays(grid) -> tuple[np.ndarray, np.ndarray, np.ndarray]:
    if isinstance(grid, PointGrid):
        arr = np.array([p.as_tuple() for p in grid.points], dtype=float).reshape(-1, 3)
        return arr[:, 0], arr[:, 1], arr[:, 2]
    t, a, b = np.meshgrid(grid.thetas(), grid.phases(), grid.phases(), indexing="ij")
    return t.ravel(), a.ravel(), b.ravel()


def _formula(question: Question, theta, alpha, beta):
    if question is Question.Z:
        return 1 / 8 - np.cos(alpha - beta) * np.sin(theta) / 8
    return 1 / 8 - (np.cos(2 * alpha) * (1 + np.cos(theta)) + np.cos(2 * beta) * (1 - np.cos(theta))) / 16


def deviator_payoff_formula(question: Question | str, p: RotationParams) -> float:
    """Closed-form conditional payoff of a lone deviator using M(p), given her question."""
    if not isinstance(p, RotationParams):
        p = RotationParams(*p)
    return float(_formula(Question(question), p.theta, p.alpha, p.beta))


def simulated_deviator_payoffs(theta, alpha, beta, deviator: int = N_PLAYERS) -> np.ndarray:
    """Exact conditional payoff of ``deviator`` on each chart list, shape ``(..., 8)``.

    Everyone else applies the equilibrium rotation to (|0000> - i|1111>)/sqrt(2);
    the deviator applies M(theta, alpha, beta) whatever she is asked.
    """
    m = rotation_matrices(theta, alpha, beta)
    psi_in = build_initial_state()
    cols = []
    for qlist in QUESTION_LISTS:
        s = psi_in
        for player in range(1, N_PLAYERS + 1):
            if player != deviator:
                s = apply_local_unitary(s, player, S_HAT)
        s = apply_local_unitary(s, deviator, m)
        probs = outcome_distribution(s, qlist.questions)
        cols.append(probs @ payoff_matrix(qlist)[:, deviator - 1])
    return np.stack(cols, axis=-1)


@dataclass(frozen=True)
class FormulaCheck:
    grid_spec: dict
    max_error: float
    max_error_by_question: dict[str, float]
    max_list_spread: dict[str, float]
    tolerance: float

    @property
    def passed(self) -> bool:
        return self.max_error <= self.tolerance and max(self.max_list_spread.values()) <= LIST_TOL

    def as_dict(self) -> dict:
        return {
            "grid": self.grid_spec,
            "max_error": self.max_error,
            "max_error_by_question": self.max_error_by_question,
            "max_list_spread": self.max_list_spread,
            "tolerance": self.tolerance,
            "list_tolerance": LIST_TOL,
            "passed": self.passed,
        }


def formula_vs_simulation(
    grid=ParameterGrid(), tolerance: float = FORMULA_TOL, deviator: int = N_PLAYERS, chunk: int = 8192
) -> FormulaCheck:
    theta, alpha, beta = _grid_arrays(grid)
    if theta.size == 0:
        raise ValueError("empty parameter grid")
    err = {q: 0.0 for q in Question}
    spread = {q: 0.0 for q in Question}
    by_q = {q: [i for i, ql in enumerate(QUESTION_LISTS) if ql[deviator] is q] for q in Question}
    for start in range(0, theta.size, chunk):
        sl = slice(start, start + chunk)
        sim = simulated_deviator_payoffs(theta[sl], alpha[sl], beta[sl], deviator)
        for q, cols in by_q.items():
            block = sim[:, cols]
            exact = _formula(q, theta[sl], alpha[sl], beta[sl])
            err[q] = max(err[q], float(np.max(np.abs(block - exact[:, None]))))
            spread[q] = max(spread[q], float(np.max(block.max(axis=1) - block.min(axis=1))))
    return FormulaCheck(
        grid_spec=grid.as_dict(),
        max_error=max(err.values()),
        max_error_by_question={q.value: v for q, v in err.items()},
        max_list_spread={q.value: v for q, v in spread.items()},
        tolerance=tolerance,
    )


@dataclass(frozen=True)
class SweepResult:
    question: Question
    grid_spec: dict
    max_payoff: float
    argmax_set: tuple[RotationParams, ...]
    refined: RotationParams | None = None
    refined_payoff: float | None = None

    @property
    def gap(self) -> float:
        return QUARTER - self.max_payoff

    def contains(self, p: RotationParams, atol: float = 1e-12) -> bool:
        target = np.array(p.as_tuple())
        for q in self.argmax_set:
            d = np.array(q.as_tuple()) - target
            d[1:] = [wrap_angle(x) for x in d[1:]]
            if np.all(np.abs(d) <= atol):
                return True
        return False

    def as_dict(self, max_listed: int | None = None) -> dict:
        points = self.argmax_set if max_listed is None else self.argmax_set[:max_listed]
        return {
            "question": self.question.value,
            "grid": self.grid_spec,
            "max_payoff": self.max_payoff,
            "gap": self.gap,
            "argmax_count": len(self.argmax_set),
            "argmax_set": [list(p.as_tuple()) for p in points],
            "refined": None if self.refined is None else list(self.refined.as_tuple()),
            "refined_payoff": self.refined_payoff,
            "canonical_in_argmax": self.contains(CANONICAL_PARAMS),
        }


def coordinate_refine(
    objective: Callable[[float, float, float], float],
    start: tuple[float, float, float],
    theta_step: float,
    phase_step: float,
    min_step: float = 1e-6,
) -> tuple[tuple[float, float, float], float]:
    """Greedy coordinate ascent with step halving, theta clipped and phases wrapped."""
    point = list(start)
    best = objective(*point)
    steps = [theta_step, phase_step, phase_step]
    while max(steps) >= min_step:
        improved = False
        for axis in range(3):
            for sign in (1, -1):
                cand = list(point)
                cand[axis] += sign * steps[axis]
                if axis == 0:
                    cand[0] = min(max(cand[0], 0.0), PI)
                else:
                    cand[axis] = wrap_angle(cand[axis])
                val = objective(*cand)
                if val > best:
                    point, best, improved = cand, val, True
        if not improved:
            steps = [s / 2 for s in steps]
    return tuple(point), best


def nash_deviation_sweep(grid=ParameterGrid(), refine: bool = True) -> dict[Question, SweepResult]:
    theta, alpha, beta = _grid_arrays(grid)
    results = {}
    for q in Question:
        values = _formula(q, theta, alpha, beta)
        best = int(np.argmax(values))
        max_payoff = float(values[best])
        refined = refined_val = None
        if refine:
            if isinstance(grid, ParameterGrid):
                steps = (grid.theta_step, grid.phase_step)
            else:
                steps = (PI / 60, 2 * PI / 72)
            point, refined_val = coordinate_refine(
                lambda t, a, b: float(_formula(q, t, a, b)),
                (theta[best], alpha[best], beta[best]),
                *steps,
            )
            refined = RotationParams(*point)
            max_payoff = max(max_payoff, refined_val)
        keep = np.nonzero(values >= max_payoff - ARGMAX_TOL)[0]
        argmax = [RotationParams(theta[i], alpha[i], beta[i]) for i in keep]
        if refined is not None and refined_val >= max_payoff - ARGMAX_TOL and refined not in argmax:
            argmax.append(refined)
        results[q] = SweepResult(
            question=q,
            grid_spec=grid.as_dict(),
            max_payoff=max_payoff,
            argmax_set=tuple(sorted(argmax)),
            refined=refined,
            refined_payoff=refined_val,
        )
    return results


def povm_deviation_payoff(question: Question | str, povm: TwoOutcomePOVM, deviator: int = N_PLAYERS) -> float:
    """Exact conditional payoff when the deviator answers with a two-outcome POVM.

    The others follow the equilibrium strategy; the POVM acts on the
    deviator's untouched qubit of (|0000> - i|1111>)/sqrt(2).
    """
    question = Question(question)
    profiles = np.asarray(PROFILES)
    flipped = np.array([_flip_index(i, deviator) for i in range(len(PROFILES))])
    d_up = profiles[:, deviator - 1] == 1
    vals = []
    for qlist in QUESTION_LISTS:
        if qlist[deviator] is not question:
            continue
        s = build_initial_state()
        for player in range(1, N_PLAYERS + 1):
            if player != deviator:
                s = apply_local_unitary(s, player, S_HAT)
        # projective measurement in the POVM eigenbasis, read out as a Z measurement
        s = apply_local_unitary(s, deviator, np.conj(povm.eigenbasis.T))
        bases = [q if p != deviator else Question.Z for p, q in enumerate(qlist.questions, start=1)]
        probs = outcome_distribution(s, bases)
        pay = payoff_matrix(qlist)[:, deviator - 1]
        heads = np.where(d_up, povm.a, povm.b)
        # the coin reports +1 on heads; row with D = +1 is the up row (or its flip)
        pay_plus = np.where(d_up, pay, pay[flipped])
        pay_minus = np.where(d_up, pay[flipped], pay)
        vals.append(float(np.sum(probs * (heads * pay_plus + (1 - heads) * pay_minus))))
    return float(np.mean(vals))


def _flip_index(index: int, player: int) -> int:
    return index ^ (1 << (N_PLAYERS - player))


def canonical_povm(question: Question | str) -> TwoOutcomePOVM:
    """The projective measurement the equilibrium strategy performs, as a POVM."""
    basis = np.conj(S_HAT.T) @ measurement_basis(question)
    return TwoOutcomePOVM(1.0, 0.0, basis)


# GHZ baseline ------------------------------------------------------------------


def ghz_baseline() -> dict:
    """Quantum vs classical payoffs in the plain four-player minority game.

    Every player applies the e^(+-i pi/8) rotation to the GHZ state and
    measures in the computational basis.
    """
    s = ghz_state()
    for player in range(1, N_PLAYERS + 1):
        s = apply_local_unitary(s, player, GHZ_MINORITY_UNITARY)
    minority = payoff_matrix(GameKind.MINORITY)
    probs = outcome_distribution(s, "ZZZZ")
    quantum = tuple(float(x) for x in probs @ minority)
    # uniformly random independent answers
    classical = tuple(
        sum((Fraction(int(minority[i, p])) for i in range(len(PROFILES))), Fraction(0)) / len(PROFILES)
        for p in range(N_PLAYERS)
    )
    per_list = {}
    for qlist in QUESTION_LISTS:
        if classify(qlist) is GameKind.MINORITY:
            per_list[str(qlist)] = tuple(float(x) for x in probs @ payoff_matrix(qlist))
    return {
        "quantum_per_player": quantum,
        "classical_per_player": classical,
        "minority_lists": per_list,
        "minority_support_only": bool(np.all(probs[minority.sum(axis=1) == 0] < 1e-12)),
    }


# Monte Carlo -------------------------------------------------------------------


@dataclass(frozen=True)
class MonteCarloReport:
    n_rounds: int
    seed: int
    mean: tuple[float, ...]
    std_error: tuple[float | None, ...]
    list_counts: dict[str, int]
    metadata: dict = field(default_factory=dict)

    def within(self, expected: Sequence[float], n_sigma: float = 4.0) -> list[bool]:
        out = []
        for m, se, e in zip(self.mean, self.std_error, expected):
            out.append(abs(m - e) <= n_sigma * (se or 0.0) + 1e-15)
        return out

    def as_dict(self) -> dict:
        return {
            "n_rounds": self.n_rounds,
            "seed": self.seed,
            "mean": list(self.mean),
            "std_error": list(self.std_error),
            "list_counts": self.list_counts,
            "metadata": self.metadata,
        }


def _answer_tables(strategy, state_builder) -> tuple[str, object]:
    if isinstance(strategy, QuantumStrategy):
        return "quantum", conditional_distributions(state_builder(), strategy)
    if isinstance(strategy, ClassicalAssignment):
        strategy = ClassicalMixture((strategy,), (1.0,))
    if isinstance(strategy, ClassicalMixture):
        answers = np.array([[a.answers(q) for q in QUESTION_LISTS] for a in strategy.assignments])
        return "classical", (answers, np.asarray(strategy.weights, dtype=float))
    raise TypeError(f"unsupported strategy {type(strategy).__name__}")


def _profile_index(profiles: np.ndarray) -> np.ndarray:
    bits = (1 - profiles) // 2
    weights = 1 << np.arange(N_PLAYERS - 1, -1, -1)
    return bits @ weights


def _run_block(args) -> tuple[np.ndarray, np.ndarray, np.ndarray]:
    seed_seq, n, kind, tables = args
    rng = np.random.Generator(np.random.PCG64(seed_seq))
    list_idx = rng.integers(len(QUESTION_LISTS), size=n)
    if kind == "quantum":
        profile_idx = np.empty(n, dtype=int)
        for j in range(len(QUESTION_LISTS)):
            rounds = np.nonzero(list_idx == j)[0]
            if rounds.size:
                profile_idx[rounds] = _profile_index(sample_outcome(tables[j], rng, size=rounds.size))
    else:
        answers, weights = tables
        which = rng.choice(len(weights), size=n, p=weights / weights.sum())
        profile_idx = _profile_index(answers[which, list_idx])
    sums = np.zeros(N_PLAYERS)
    sq = np.zeros(N_PLAYERS)
    for j, qlist in enumerate(QUESTION_LISTS):
        pay = payoff_matrix(qlist)[profile_idx[list_idx == j]]
        sums += pay.sum(axis=0)
        sq += (pay**2).sum(axis=0)
    counts = np.bincount(list_idx, minlength=len(QUESTION_LISTS))
    return sums, sq, counts


def monte_carlo_tournament(
    state_builder: Callable[[], np.ndarray] | None,
    strategy,
    n_rounds: int,
    seed: int,
    block_size: int = 10_000,
    workers: int = 1,
) -> MonteCarloReport:
    """Play ``n_rounds`` sampled rounds; report per-player means and standard errors.

    Rounds are split into fixed blocks with substreams spawned from ``seed``,
    so the result does not depend on ``workers``.
    """
    if n_rounds < 1:
        raise ValueError("n_rounds must be >= 1")
    kind, tables = _answer_tables(strategy, state_builder)
    n_blocks = math.ceil(n_rounds / block_size)
    seeds = np.random.SeedSequence(seed).spawn(n_blocks)
    sizes = [min(block_size, n_rounds - k * block_size) for k in range(n_blocks)]
    jobs = [(s, n, kind, tables) for s, n in zip(seeds, sizes)]
    if workers > 1 and n_blocks > 1:
        with ProcessPoolExecutor(max_workers=workers) as pool:
            parts = list(pool.map(_run_block, jobs))
    else:
        parts = [_run_block(j) for j in jobs]
    sums = sum(p[0] for p in parts)
    sq = sum(p[1] for p in parts)
    counts = sum(p[2] for p in parts)
    mean = sums / n_rounds
    if n_rounds > 1:
        var = np.maximum(sq - n_rounds * mean**2, 0.0) / (n_rounds - 1)
        se = tuple(float(x) for x in np.sqrt(var / n_rounds))
    else:
        se = (None,) * N_PLAYERS
    return MonteCarloReport(
        n_rounds=n_rounds,
        seed=seed,
        mean=tuple(float(x) for x in mean),
        std_error=se,
        list_counts={str(q): int(c) for q, c in zip(QUESTION_LISTS, counts)},
        metadata={"strategy": kind, "block_size": block_size},
    )


def zero_state_builder() -> np.ndarray:
    return basis_state(0)
