"""Command-line entry point.

Each subcommand prints one JSON report on stdout and a short summary on
stderr. Exit status: 0 success, 1 a verification check failed, 2 usage error.
"""
from __future__ import annotations

import argparse
import json
import os
import sys
from fractions import Fraction

import numpy as np

from . import classical, equilibrium, stabilizer
from .quantum import ghz_state, overlap, random_state, reduced_density_matrix
from .rules import Question
from .strategies import (
    ClassicalAssignment,
    TwoOutcomePOVM,
    canonical_strategy,
    ghz_strategy,
    haar_unitary,
    povm_probabilities,
    povm_simulate,
    projective_up_probability,
)

SCHEMA_VERSION = 1
DEFAULT_SEED = 20090101
DEFAULT_ROUNDS = 100_000
N_SIGMA = 4.0


class UsageError(Exception):
    pass


def _jsonable(obj):
    if isinstance(obj, Fraction):
        return {"decimal": float(obj), "exact": f"{obj.numerator}/{obj.denominator}"}
    if isinstance(obj, dict):
        return {str(k): _jsonable(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [_jsonable(v) for v in obj]
    if isinstance(obj, (np.floating, np.integer, np.bool_)):
        return obj.item()
    if isinstance(obj, complex):
        return [obj.real, obj.imag]
    return obj


def _exact(x: float) -> dict:
    """Decimal plus exact fraction string; every payoff here is a float rational."""
    f = Fraction(x).limit_denominator(1 << 20)
    if float(f) != x:
        f = Fraction(x)
    return {"decimal": x, "exact": f"{f.numerator}/{f.denominator}"}


# Subcommands -------------------------------------------------------------------


def cmd_state(args) -> tuple[dict, bool, str]:
    a = stabilizer.build_game_state_via_projectors()
    b = stabilizer.build_game_state_via_rotation()
    ov = overlap(a, b)
    report = stabilizer.verify_stabilizer(b)
    ok = abs(ov - 1) <= args.tolerance and report.max_deviation <= args.tolerance
    out = {
        "amplitudes_rotation": [[z.real, z.imag] for z in b],
        "amplitudes_projector": [[z.real, z.imag] for z in a],
        "overlap": ov,
        "stabilizer": report.as_dict(),
        "derived_antiminority": [str(p) for p in stabilizer.derive_antiminority_generators()],
        "generators_commute": stabilizer.generators_commute(),
        "passed": ok,
    }
    return out, ok, f"overlap={ov:.15f}, stabilizer max deviation={report.max_deviation:.2e}"


def cmd_formulas(args):
    grid = equilibrium.ParameterGrid(args.grid_theta, args.grid_phase)
    check = equilibrium.formula_vs_simulation(grid, tolerance=args.tolerance)
    return check.as_dict(), check.passed, f"max |formula - simulation| = {check.max_error:.3e}"


def cmd_nash(args):
    grid = equilibrium.ParameterGrid(args.grid_theta, args.grid_phase)
    sweeps = equilibrium.nash_deviation_sweep(grid, refine=not args.no_refine)
    out = {q.value: r.as_dict(max_listed=args.max_listed) for q, r in sweeps.items()}
    ok = all(
        r.max_payoff <= 0.25 + args.tolerance and r.contains(equilibrium.CANONICAL_PARAMS)
        for r in sweeps.values()
    )
    out["max_payoff"] = max(r.max_payoff for r in sweeps.values())
    out["gap"] = min(r.gap for r in sweeps.values())
    out["passed"] = ok
    return out, ok, "deviation max: " + ", ".join(f"{q.value}={r.max_payoff:.12f}" for q, r in sweeps.items())


def cmd_lhv(args):
    s = classical.enumeration_summary()
    w1 = classical.contradiction_witness("abc", "h")
    w2 = classical.contradiction_witness("efg", "d")
    ok = (not s.all_eight_satisfiable) and s.n_distinct == 256 and w1.contradiction and w2.contradiction
    out = {
        "constraints": [str(c) for c in classical.CONSTRAINTS],
        "n_assignments": s.n_assignments,
        "n_distinct": s.n_distinct,
        "all_eight_satisfiable": s.all_eight_satisfiable,
        "max_satisfied": s.max_satisfied,
        "satisfied_histogram": s.satisfied_histogram,
        "best_symmetrized_payoff": s.best_symmetrized_payoff,
        "best_assignment": s.best_assignment.describe(),
        "witnesses": [w1.as_dict(), w2.as_dict()],
        "passed": ok,
    }
    return out, ok, f"no assignment satisfies all 8: {not s.all_eight_satisfiable}; max satisfied = {s.max_satisfied}"


def cmd_bound(args):
    n = args.steps
    ledgers = [classical.bound_ledger(Fraction(k, n)) for k in range(n + 1)]
    sup = classical.classical_supremum(n)
    at = {str(m): classical.bound_ledger(m) for m in (Fraction(0), Fraction(1, 4), Fraction(1))}
    ok = (
        sup.consistent
        and at["0"].max_payoff == classical.ANALYTIC_BOUND
        and at["1"].max_payoff == classical.ANALYTIC_BOUND
        and all(l.max_payoff == l.branch_formula for l in ledgers)
    )
    out = {
        "ledger": [l.as_dict() for l in ledgers],
        "key_points": {k: v.as_dict() for k, v in at.items()},
        "analytic_bound": sup.analytic_bound,
        "exhaustive_optimum": sup.exhaustive_optimum,
        "quantum_value": sup.quantum_value,
        "ratio_to_quantum": sup.ratio,
        "passed": ok,
    }
    return out, ok, f"classical bound {sup.analytic_bound} = {sup.ratio} of quantum {sup.quantum_value}; exhaustive {sup.exhaustive_optimum}"


def _parse_strategy(text: str):
    if text == "quantum":
        return stabilizer.build_initial_state, canonical_strategy(), 0.25
    if text == "ghz":
        return ghz_state, ghz_strategy(), None
    if text.startswith("classical:"):
        try:
            index = int(text.split(":", 1)[1])
            assignment = ClassicalAssignment.from_index(index)
        except ValueError as exc:
            raise UsageError(f"bad classical strategy {text!r}: {exc}") from None
        return None, assignment, None
    raise UsageError(f"unknown strategy {text!r}; use quantum, ghz or classical:<0..255>")


def cmd_play(args):
    builder, strategy, expected = _parse_strategy(args.strategy)
    mc = equilibrium.monte_carlo_tournament(builder, strategy, args.rounds, args.seed)
    out = mc.as_dict()
    if isinstance(strategy, ClassicalAssignment):
        exact = classical.exact_payoffs(strategy)
        out["exact"] = exact
        expected_vals = [float(x) for x in exact]
    elif expected is not None:
        expected_vals = [expected] * 4
        out["exact"] = [_exact(x) for x in expected_vals]
    else:
        report = equilibrium.expected_payoffs(builder(), strategy, args.strategy)
        expected_vals = list(report.per_player)
        out["exact"] = [_exact(x) for x in expected_vals]
    within = mc.within(expected_vals, N_SIGMA) if args.rounds > 1 else [True] * 4
    out["within_4_sigma"] = within
    ok = all(within)
    out["passed"] = ok
    return out, ok, "means: " + ", ".join(f"{m:.5f}" for m in mc.mean)


def cmd_povm(args):
    if not 0 <= args.b <= args.a <= 1:
        raise UsageError("need 0 <= b <= a <= 1")
    rng = np.random.Generator(np.random.PCG64(args.seed))
    povm = TwoOutcomePOVM(args.a, args.b, haar_unitary(rng))
    rho = reduced_density_matrix(random_state(rng), 1)
    exact_plus, _ = povm_probabilities(rho, povm)
    p_up = projective_up_probability(rho, povm)
    projective = np.where(rng.random(args.trials) < p_up, 1, -1)
    simulated = povm_simulate(projective, povm, rng)
    freq = float(np.mean(simulated == 1))
    sigma = float(np.sqrt(exact_plus * (1 - exact_plus) / args.trials))
    ok = abs(freq - exact_plus) <= N_SIGMA * sigma + 1e-15
    proj_povm = TwoOutcomePOVM(1.0, 0.0, povm.eigenbasis)
    identical = bool(np.array_equal(povm_simulate(projective, proj_povm, rng), projective))
    ok = ok and identical
    dev = {q.value: equilibrium.povm_deviation_payoff(q, povm) for q in Question}
    out = {
        "a": args.a,
        "b": args.b,
        "trials": args.trials,
        "exact_p_plus": exact_plus,
        "simulated_p_plus": freq,
        "sigma": sigma,
        "projective_reduction_exact": identical,
        "deviation_payoff": dev,
        "passed": ok,
    }
    return out, ok, f"p+ exact={exact_plus:.5f} simulated={freq:.5f} (sigma {sigma:.1e})"


COMMANDS = {
    "state": cmd_state,
    "formulas": cmd_formulas,
    "nash": cmd_nash,
    "lhv": cmd_lhv,
    "bound": cmd_bound,
    "play": cmd_play,
    "povm": cmd_povm,
}


def _positive_int(text: str) -> int:
    try:
        value = int(text)
    except ValueError:
        raise argparse.ArgumentTypeError(f"not an integer: {text!r}") from None
    if value < 1:
        raise argparse.ArgumentTypeError(f"must be >= 1, got {value}")
    return value


def _seed(text: str) -> int:
    value = int(text)
    if not 0 <= value < 2**64:
        raise argparse.ArgumentTypeError("seed must be an unsigned 64-bit integer")
    return value


def build_parser() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--seed", type=_seed, default=DEFAULT_SEED)
    common.add_argument("--tolerance", type=float, default=None)
    common.add_argument("--json-only", action="store_true", help="suppress the stderr summary")

    grid = argparse.ArgumentParser(add_help=False)
    grid.add_argument("--grid-theta", type=_positive_int, default=61)
    grid.add_argument("--grid-phase", type=_positive_int, default=72)

    parser = argparse.ArgumentParser(prog="qminority", description=__doc__.splitlines()[0])
    sub = parser.add_subparsers(dest="command", required=True)
    sub.add_parser("state", parents=[common], help="build the game state both ways")
    sub.add_parser("formulas", parents=[common, grid], help="closed-form deviation payoffs vs simulation")
    nash = sub.add_parser("nash", parents=[common, grid], help="unilateral deviation sweep")
    nash.add_argument("--no-refine", action="store_true")
    nash.add_argument("--max-listed", type=_positive_int, default=None)
    sub.add_parser("lhv", parents=[common], help="exhaustive local hidden variable check")
    bound = sub.add_parser("bound", parents=[common], help="classical bound ledger")
    bound.add_argument("--steps", type=_positive_int, default=16)
    play = sub.add_parser("play", parents=[common], help="seeded Monte Carlo tournament")
    play.add_argument("--rounds", type=_positive_int, default=DEFAULT_ROUNDS)
    play.add_argument("--strategy", default="quantum")
    povm = sub.add_parser("povm", parents=[common], help="POVM as projective measurement plus coin")
    povm.add_argument("--a", type=float, default=0.8)
    povm.add_argument("--b", type=float, default=0.3)
    povm.add_argument("--trials", type=_positive_int, default=DEFAULT_ROUNDS)
    return parser


DEFAULT_TOLERANCE = {"state": 1e-12, "formulas": 1e-9, "nash": 1e-9}


def _summary(command: str, ok: bool, text: str) -> None:
    tag = "PASS" if ok else "FAIL"
    if sys.stderr.isatty() and "NO_COLOR" not in os.environ:
        tag = f"\033[{32 if ok else 31}m{tag}\033[0m"
    print(f"[{tag}] {command}: {text}", file=sys.stderr)


def run(argv=None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return int(exc.code or 0)
    if args.tolerance is None:
        args.tolerance = DEFAULT_TOLERANCE.get(args.command, 1e-9)
    try:
        body, ok, text = COMMANDS[args.command](args)
    except UsageError as exc:
        parser.print_usage(sys.stderr)
        print(f"qminority: error: {exc}", file=sys.stderr)
        return 2
    config = {k: v for k, v in sorted(vars(args).items()) if k != "json_only"}
    doc = {"schema_version": SCHEMA_VERSION, "command": args.command, "config": config, "report": body}
    sys.stdout.write(json.dumps(_jsonable(doc), sort_keys=True) + "\n")
    if not args.json_only:
        _summary(args.command, ok, text)
    return 0 if ok else 1


def main() -> None:
    sys.exit(run())


if __name__ == "__main__":
    main()
