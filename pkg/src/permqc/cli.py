"""Command-line entry point: ``permqc <command> [options]``.

Every command prints a report (JSON by default) and writes it to ``--output``
or, when ``PERMQC_OUTPUT_DIR`` is set, to ``$PERMQC_OUTPUT_DIR/<command>.json``.
Exit status is 0 when every check passes, 1 when a check fails and 2 on a
usage error.
"""
from __future__ import annotations

import argparse
import cmath
import json
import math
import os
import sys
from fractions import Fraction
from pathlib import Path

import numpy as np

from . import __version__

SCHEMA_VERSION = 1
DEFAULT_SEED = 20240607
OUTPUT_DIR_ENV = "PERMQC_OUTPUT_DIR"

EXIT_OK, EXIT_FAIL, EXIT_USAGE = 0, 1, 2


class UsageError(Exception):
    pass


def _c(z) -> list[float]:
    z = complex(z)
    return [z.real, z.imag]


def _check(name: str, passed: bool, **values) -> dict:
    return {"name": name, "passed": bool(passed), **values}


def _tol(args, default: float) -> float:
    return default if args.tol is None else args.tol


def _max_dev(a, b) -> float:
    from .states import superpose
    return max((abs(v) for _, v in superpose([(1, a), (-1, b)]).items()), default=0.0)


# ---------------------------------------------------------------- commands

def cmd_verify_encoding(args) -> dict:
    from .dualrail import alpha_perm, gamma_perm, logical_basis, root
    from .states import apply_perm

    tol = _tol(args, 1e-12)
    checks, details = [], []
    for n in args.n or [2, 4, 8]:
        zero, one = logical_basis(n)
        a, g = alpha_perm(n), gamma_perm(n)
        x = root(n)
        devs = {
            "alpha_0_to_1": _max_dev(apply_perm(a, zero), one),
            "alpha_1_to_0": _max_dev(apply_perm(a, one), zero),
            "gamma_fixes_0": _max_dev(apply_perm(g, zero), zero),
            "gamma_phases_1": _max_dev(apply_perm(g, one), one.scale(x)),
        }
        for name, dev in devs.items():
            checks.append(_check(f"n={n}:{name}", dev < tol, deviation=dev))
        if n == 8:
            t = cmath.exp(1j * math.pi / 4)
            checks.append(_check("n=8:gamma_phase_is_T", abs(x - t) < tol, deviation=abs(x - t)))
        details.append({"n": n, "gamma_phase": _c(x), "gamma_order": g.order()})
    return {"checks": checks, "details": details}


def cmd_verify_theorem1(args) -> dict:
    from .gates import verify_theorem1

    tol = _tol(args, 1e-12)
    rng = np.random.default_rng(args.seed)
    checks, details = [], []
    for n in args.n or list(range(1, 9)):
        rep = verify_theorem1(n, trials=args.trials, rng=rng)
        checks.append(_check(f"n={n}", rep.max_deviation < tol, max_deviation=rep.max_deviation))
        details.append(rep.to_json())
    return {"checks": checks, "details": details}


def cmd_verify_lemma(args) -> dict:
    from .gates import verify_lemma_identity

    checks, details = [], []
    for n in args.n or list(range(2, 7)):
        rep = verify_lemma_identity(n)
        checks.append(_check(f"n={n}", rep.passed, max_entry_deviation=rep.max_entry_deviation))
        details.append(rep.to_json())
    neg = verify_lemma_identity(2, pairs=[(1, 2), (2, 3)])
    checks.append(_check("overlapping_pairs_fail", not neg.passed,
                         max_entry_deviation=neg.max_entry_deviation))
    return {"checks": checks, "details": details}


def cmd_verify_hadamard(args) -> dict:
    from .dualrail import (HADAMARD, LogicalRegister, calibrate_hadamard, hadamard_schedule,
                           logical_matrix)
    from .schedule import timesteps

    tol = _tol(args, 1e-10)
    checks, details = [], []
    for n in args.n or [4, 8]:
        cal = calibrate_hadamard(n)
        sched = hadamard_schedule(LogicalRegister(n), 1, cal)
        m, leak = logical_matrix(sched, n)
        ov = np.trace(HADAMARD.conj().T @ m) / 2
        fid = float(abs(ov))
        phase = ov / abs(ov)
        entry_dev = float(np.max(np.abs(m - phase * HADAMARD)))
        ts = timesteps(sched)
        checks += [
            _check(f"n={n}:fidelity", fid >= 1 - tol, fidelity=fid),
            _check(f"n={n}:shared_phase", entry_dev < tol, deviation=entry_dev),
            _check(f"n={n}:leakage", leak < tol, residual=leak),
            _check(f"n={n}:timesteps", ts == 2 * n + 1, timesteps=ts, expected=2 * n + 1),
        ]
        details.append({"calibration": cal.to_json(), "timesteps": ts})
    return {"checks": checks, "details": details}


def cmd_verify_cnot(args) -> dict:
    from .dualrail import LogicalRegister, cnot_schedule, decode, encode_amplitudes, logical_state
    from .gates import Fredkin
    from .schedule import run_schedule, timesteps

    tol = _tol(args, 1e-12)
    checks, details = [], []
    for n in args.n or [2]:
        reg = LogicalRegister(n, 2)
        sched = cnot_schedule(n, 1, 2, reg)
        table = {}
        for a in "01":
            for b in "01":
                out = decode(run_schedule(sched, logical_state(reg, a + b)), reg)
                want = a + str(int(a) ^ int(b))
                dev = max(abs(amp - (1 if bits == want else 0)) for bits, amp in out.amplitudes.items())
                checks.append(_check(f"n={n}:|{a}{b}>", dev < tol and out.residual < tol,
                                     deviation=dev, residual=out.residual))
                table[a + b] = want
        s = 1 / math.sqrt(2)
        out = decode(run_schedule(sched, encode_amplitudes(reg, {"00": s, "10": s})), reg)
        want = {"00": s, "01": 0, "10": 0, "11": s}
        dev = max(abs(out.amplitudes[b] - want[b]) for b in want)
        checks.append(_check(f"n={n}:bell_linearity", dev < tol and out.residual < tol,
                             deviation=dev, residual=out.residual))
        ts, fred = timesteps(sched), sched.count(Fredkin)
        checks.append(_check(f"n={n}:timesteps", ts == n, timesteps=ts))
        checks.append(_check(f"n={n}:fredkins", fred == 2 * n * n, fredkins=fred))
        details.append({"n": n, "truth_table": table, "timesteps": ts, "fredkins": fred})
    return {"checks": checks, "details": details}


def cmd_verify_toffoli(args) -> dict:
    from .toffoli import (compare_report, deviation_mod_phase, ideal_logical_unitary, is_exact,
                          simulated_logical_unitary, toffoli_matrix, toffoli_schedule)
    from .schedule import timesteps

    tol = _tol(args, 1e-10)
    checks, details = [], []
    for n in args.n or [8]:
        rep = compare_report(n)
        ts = timesteps(toffoli_schedule(n))
        checks.append(_check(f"n={n}:timesteps", ts == 10 * n + 2, timesteps=ts, expected=10 * n + 2))
        checks.append(_check("baseline", rep.divincenzo == 85, baseline=rep.divincenzo))
        entry = {"n": n, "timesteps": ts, "baseline": rep.divincenzo,
                 "baseline_cnot11": rep.divincenzo_alt, "delta": rep.delta,
                 "exact_toffoli": is_exact(n), "simulated": False}
        if n <= 4 or args.long:
            u, leak = simulated_logical_unitary(n, workers=args.workers)
            circ_dev = deviation_mod_phase(u, ideal_logical_unitary(n))
            checks.append(_check(f"n={n}:matches_circuit", circ_dev < tol and leak < tol,
                                 deviation=circ_dev, residual=leak))
            entry["simulated"] = True
            if is_exact(n):
                tof_dev = deviation_mod_phase(u, toffoli_matrix())
                checks.append(_check(f"n={n}:toffoli_truth_table", tof_dev < tol, deviation=tof_dev))
            else:
                entry["note"] = ("no eighth root of unity at this n; every phase gate is doubled, "
                                 "so the circuit is Clifford and cannot equal Toffoli")
        details.append(entry)
    return {"checks": checks, "details": details}


def cmd_verify_perm_hadamard(args) -> dict:
    from .clifford import TABLE_WORDS, a_matrix
    from .perm_hadamard import (build_basis, generated_group, op_H, op_X, op_Y, op_Z,
                                sufficient_conditions, verify_logical_action)

    tol = _tol(args, 1e-12)
    basis = build_basis()
    ops = {"H": (op_H(), a_matrix(3, 1)), "Z": (op_Z(), a_matrix(1, 2)),
           "X": (op_X(), a_matrix(2, 4)), "Y": (op_Y(), a_matrix(2, 2))}
    checks, details = [], {}
    for name, (perm, target) in ops.items():
        rep = verify_logical_action(perm, target.matrix, basis)
        checks.append(_check(f"op_{name}", rep.residual < tol and abs(rep.fidelity - 1) < tol,
                             residual=rep.residual, fidelity=rep.fidelity))
        details[f"op_{name}"] = {"perm": str(perm), **rep.to_json()}
    for name, dev in sufficient_conditions(basis).items():
        checks.append(_check(name, dev < tol, deviation=dev))
    group = generated_group({"H": op_H(), "Z": op_Z()}, basis)
    table2 = sorted(TABLE_WORDS[2])
    checks.append(_check("group_matches_table2", group.indices == table2 and not group.leaked,
                         size=len(group.indices)))
    details["group"] = group.to_json()
    return {"checks": checks, "details": details}


def cmd_clifford_tables(args) -> dict:
    from .clifford import (INDICES, a_matrix, eq_mod_phase, multiplication_table,
                           verify_s4_profile, verify_table)

    checks, details = [], {}
    for t in (1, 2):
        rep = verify_table(t)
        checks.append(_check(f"table{t}", rep.passed, printed_mismatches=[list(i) for i in rep.printed_mismatches]))
        details[f"table{t}"] = rep.to_json()
    s4 = verify_s4_profile()
    checks.append(_check("s4_profile", s4.passed, size=s4.size))
    details["s4"] = s4.to_json()
    mats = [a_matrix(i, j).matrix for i, j in INDICES]
    clashes = sum(eq_mod_phase(mats[a], mats[b]) for a in range(24) for b in range(a + 1, 24))
    checks.append(_check("pairwise_inequivalent", clashes == 0, clashes=clashes))
    if args.long:
        details["multiplication_table"] = multiplication_table()
    return {"checks": checks, "details": details}


def _parse_turn(text: str) -> complex:
    """Unit scalar from a fraction of a full turn, e.g. '1/4' -> i."""
    try:
        f = Fraction(text)
    except (ValueError, ZeroDivisionError) as exc:
        raise UsageError(f"bad turn fraction {text!r}") from exc
    return cmath.exp(2j * math.pi * float(f))


def _perm_arg(M: int, text: str | None, name: str):
    from .states import QubitPermutation, StateError, parse_cycles
    if text is None:
        raise UsageError(f"--{name} is required")
    try:
        return parse_cycles(M, text)
    except StateError as exc:
        raise UsageError(str(exc)) from exc


def cmd_feasibility_check(args) -> dict:
    from .feasibility import (FeasibilityProblem, check_solution, kernel_intersection,
                              rank_check, reproduces_clifford, z1_candidates, z2_candidates)
    from .perm_hadamard import op_H, op_Y

    default_ks = None
    if args.preset == "perm-hadamard":
        M, P, H = 16, op_Y(), op_H()
        # the logical states live at weight 2
        default_ks = [2]
    else:
        if args.M is None:
            raise UsageError("--M is required without --preset")
        M = args.M
        P, H = _perm_arg(M, args.P, "P"), _perm_arg(M, args.H, "H")
    ks = [args.k] if args.k is not None else default_ks or list(range(M + 1))
    z1s = [_parse_turn(args.z1)] if args.z1 else None
    z2s = [_parse_turn(args.z2)] if args.z2 else None
    checks, details = [], []
    for k in ks:
        for z1 in z1s or z1_candidates(P, k):
            for z2 in z2s or z2_candidates(H, k):
                prob = FeasibilityProblem(M, k, P, H, z1, z2)
                rep = kernel_intersection(prob)
                ranked = rank_check(prob) if rep.diagnostics["dim_weight_space"] <= 1000 else None
                label = f"k={k}:z1={prob.to_json()['z1']}:z2={prob.to_json()['z2']}"
                if ranked is not None:
                    checks.append(_check(f"{label}:rank_agrees", ranked == rep.feasible))
                for u, v in rep.solutions:
                    checks.append(_check(f"{label}:solution", check_solution(prob, u, v) < 1e-10
                                         and reproduces_clifford(prob, u, v)))
                details.append(dict(rep.to_json(), rank_deficient=ranked))
    feasible = any(d["feasible"] for d in details)
    return {"checks": checks, "details": details, "feasible": feasible,
            "P": str(P), "H": str(H), "M": M}


def cmd_feasibility_search(args) -> dict:
    from .feasibility import search

    if args.M is None:
        raise UsageError("--M is required")
    if args.strategy == "exhaustive" and args.M > 5:
        raise UsageError("exhaustive search supports M <= 5")
    jsonl = args.jsonl
    if jsonl is None and args.output_dir is not None:
        jsonl = str(Path(args.output_dir) / "feasibility-search.jsonl")
    summary = search(args.M, args.k, args.strategy, args.budget, args.seed, args.workers,
                     jsonl_path=jsonl, checkpoint_path=args.checkpoint)
    data = summary.to_json(timing=args.timing)
    checks = [_check("search_completed", True, candidates=summary.candidates,
                     budget_exhausted=summary.budget_exhausted)]
    return {"checks": checks, "summary": data, "jsonl": jsonl}


def cmd_schedule_compare(args) -> dict:
    from .toffoli import compare_report, is_exact

    checks, details = [], []
    for n in args.n or [8]:
        rep = compare_report(n)
        zero_cost = sum(1 for b in rep.breakdown if b["timesteps"] == 0)
        checks.append(_check(f"n={n}:formula", rep.extended_dual_rail == 10 * n + 2,
                             timesteps=rep.extended_dual_rail))
        checks.append(_check(f"n={n}:baseline", rep.divincenzo == 85, baseline=rep.divincenzo))
        checks.append(_check(f"n={n}:permutational_gates", zero_cost == 8, count=zero_cost))
        details.append(dict(rep.to_json(), exact_toffoli=is_exact(n)))
        args._text_extra = getattr(args, "_text_extra", []) + [rep.text()]
    return {"checks": checks, "details": details}


COMMANDS = {
    "verify-encoding": (cmd_verify_encoding, "alpha and gamma on the logical basis"),
    "verify-theorem1": (cmd_verify_theorem1, "sequential vs single-exponential exchanges"),
    "verify-lemma": (cmd_verify_lemma, "row-permutation operator identity"),
    "verify-hadamard": (cmd_verify_hadamard, "calibrated logical Hadamard"),
    "verify-cnot": (cmd_verify_cnot, "Fredkin-based logical CNOT"),
    "verify-toffoli": (cmd_verify_toffoli, "Toffoli timesteps and truth table"),
    "verify-perm-hadamard": (cmd_verify_perm_hadamard, "permutation-only H and Z on 16 qubits"),
    "clifford-tables": (cmd_clifford_tables, "Clifford subgroup tables and S4 profile"),
    "feasibility-check": (cmd_feasibility_check, "decide one (P, H) candidate pair"),
    "feasibility-search": (cmd_feasibility_search, "search candidate pairs"),
    "schedule-compare": (cmd_schedule_compare, "timestep comparison with the exchange-only baseline"),
}


def _int_list(text: str) -> list[int]:
    try:
        return [int(x) for x in text.split(",") if x]
    except ValueError as exc:
        raise argparse.ArgumentTypeError(f"expected comma-separated integers, got {text!r}") from exc


def build_parser() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--n", type=_int_list, default=None,
                        help="row width(s), comma separated; each command has its own default")
    common.add_argument("--M", type=int, default=None, help="qubit count for feasibility commands")
    common.add_argument("--k", type=int, default=None, help="excitation weight (default: all)")
    common.add_argument("--seed", type=int, default=DEFAULT_SEED)
    common.add_argument("--trials", type=int, default=100)
    common.add_argument("--tol", type=float, default=None, help="override the check tolerance")
    common.add_argument("--output", default=None, help="report path")
    common.add_argument("--format", choices=("json", "text"), default="json")
    common.add_argument("--long", action="store_true", help="include slow checks")
    common.add_argument("--workers", type=int, default=1)

    parser = argparse.ArgumentParser(prog="permqc", description=__doc__.splitlines()[0])
    parser.add_argument("--version", action="version", version=__version__)
    sub = parser.add_subparsers(dest="command", required=True)
    for name, (_, helptext) in COMMANDS.items():
        p = sub.add_parser(name, parents=[common], help=helptext)
        if name == "feasibility-check":
            p.add_argument("--P", default=None, help='P candidate in cycle notation, e.g. "(1,2,3,4)"')
            p.add_argument("--H", default=None, help="H candidate in cycle notation")
            p.add_argument("--z1", default=None, help="z1 as a fraction of a turn (default: scan)")
            p.add_argument("--z2", default=None, help="z2 as a fraction of a turn (default: scan)")
            p.add_argument("--preset", choices=("perm-hadamard",), default=None)
        if name == "feasibility-search":
            p.add_argument("--strategy", choices=("exhaustive", "structured", "random"),
                           default="exhaustive")
            p.add_argument("--budget", type=int, default=100_000)
            p.add_argument("--jsonl", default=None, help="per-candidate JSON-lines stream")
            p.add_argument("--checkpoint", default=None, help="resume file")
            p.add_argument("--timing", action="store_true", help="add elapsed time to the summary")
    return parser


def _text(report: dict, extra: list[str]) -> str:
    lines = [f"{report['command']}: {'PASS' if report['passed'] else 'FAIL'}"]
    for c in report["checks"]:
        vals = ", ".join(f"{k}={v}" for k, v in c.items() if k not in ("name", "passed"))
        lines.append(f"  [{'PASS' if c['passed'] else 'FAIL'}] {c['name']}" + (f"  {vals}" if vals else ""))
    lines.extend(extra)
    return "\n".join(lines) + "\n"


def run(argv: list[str] | None = None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return int(exc.code or 0)
    args.output_dir = os.environ.get(OUTPUT_DIR_ENV)
    func = COMMANDS[args.command][0]
    try:
        if args.workers < 1 or args.trials < 1:
            raise UsageError("--workers and --trials must be positive")
        body = func(args)
    except UsageError as exc:
        print(f"permqc: error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    except ValueError as exc:
        print(f"permqc: error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    passed = all(c["passed"] for c in body["checks"])
    config = {k: v for k, v in sorted(vars(args).items())
              if not k.startswith("_") and k not in ("output", "output_dir", "format")}
    report = {"schemaVersion": SCHEMA_VERSION, "command": args.command, "config": config,
              "passed": passed, **body}
    blob = json.dumps(report, indent=2, sort_keys=True, default=_json_default) + "\n"
    out = args.output
    if out is None and args.output_dir is not None:
        out = str(Path(args.output_dir) / f"{args.command}.json")
    if out is not None:
        Path(out).parent.mkdir(parents=True, exist_ok=True)
        Path(out).write_text(blob)
    if args.format == "json":
        sys.stdout.write(blob)
    else:
        sys.stdout.write(_text(report, getattr(args, "_text_extra", [])))
    return EXIT_OK if passed else EXIT_FAIL


def _json_default(obj):
    if isinstance(obj, complex):
        return _c(obj)
    if isinstance(obj, np.generic):
        return obj.item()
    raise TypeError(f"cannot serialize {type(obj).__name__}")


def main() -> None:
    sys.exit(run())


if __name__ == "__main__":
    main()
