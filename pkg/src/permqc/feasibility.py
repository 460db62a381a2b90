"""Can a pair of qubit permutations act as the Clifford generators P and H?

Given permutations P, H of M qubits, a weight k and unit scalars z1, z2, we
look for nonzero u, v in the weight-k subspace with

    P u = z1 u,   P v = i z1 v,   H u = z2 (u + v)/sqrt2,   H v = z2 (u - v)/sqrt2.

Two independent routes decide this: restricting to the P-eigenspaces built
from orbit Fourier vectors (``kernel_intersection``), and a dense rank test
of the stacked block matrices (``rank_check``).
"""
from __future__ import annotations

import cmath
import itertools
import json
import math
import os
import time
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field
from fractions import Fraction
from pathlib import Path
from typing import Iterator, Sequence

import numpy as np

from .clifford import H as CLIFFORD_H
from .clifford import P as CLIFFORD_P
from .clifford import eq_mod_phase
from .states import (
    QubitPermutation,
    SparseState,
    compose,
    eigenspace_basis,
    induced_weight_action,
    perm_from_cycles,
)

SVD_TOL = 1e-9
EQ_TOL = 1e-10
MAX_DENSE_DIM = 1000
SQRT2 = math.sqrt(2)


class FeasibilityError(ValueError):
    pass


@dataclass(frozen=True)
class FeasibilityProblem:
    M: int
    k: int
    permP: QubitPermutation
    permH: QubitPermutation
    z1: complex = 1
    z2: complex = 1

    def __post_init__(self):
        if not 0 <= self.k <= self.M:
            raise FeasibilityError(f"weight {self.k} outside 0..{self.M}")
        if self.permP.n != self.M or self.permH.n != self.M:
            raise FeasibilityError("permutations must act on M qubits")
        for z in (self.z1, self.z2):
            if abs(abs(z) - 1) > 1e-12:
                raise FeasibilityError(f"|z| must be 1, got {abs(z)}")

    def to_json(self) -> dict:
        return {"M": self.M, "k": self.k, "P": str(self.permP), "H": str(self.permH),
                "z1": _angle_json(self.z1), "z2": _angle_json(self.z2)}


def _angle_json(z: complex) -> str:
    """Unit scalar as a reduced fraction of a full turn, e.g. '1/4'."""
    frac = Fraction(cmath.phase(z) / (2 * math.pi)).limit_denominator(10_000) % 1
    return str(frac)


@dataclass
class FeasibilityReport:
    problem: FeasibilityProblem
    feasible: bool
    solutions: list[tuple[SparseState, SparseState]] = field(default_factory=list)
    diagnostics: dict = field(default_factory=dict)

    def to_json(self, with_states: bool = False) -> dict:
        out = {"problem": self.problem.to_json(), "feasible": self.feasible,
               "num_solutions": len(self.solutions), "diagnostics": self.diagnostics}
        if with_states:
            out["solutions"] = [{"u": u.to_json(), "v": v.to_json()} for u, v in self.solutions]
        return out


def _nullspace(mat: np.ndarray, tol: float = SVD_TOL) -> np.ndarray:
    if mat.shape[1] == 0:
        return np.zeros((0, 0), dtype=complex)
    _, s, vh = np.linalg.svd(mat)
    rank = int(np.sum(s > tol))
    return vh[rank:].conj().T


def solve_generator_equations(Hmat: np.ndarray, B1: np.ndarray, B2: np.ndarray,
                              z2: complex) -> list[tuple[np.ndarray, np.ndarray]]:
    """Solutions (u, v) with u in span(B1), v in span(B2) of the two H equations.

    Columns of B1, B2 are orthonormal eigenvectors of P. Each returned pair
    is scaled so that |u| = |v| = 1.
    """
    if B1.shape[1] == 0 or B2.shape[1] == 0:
        return []
    c = z2 / SQRT2
    top = np.hstack([Hmat @ B1 - c * B1, -c * B2])
    bottom = np.hstack([-c * B1, Hmat @ B2 + c * B2])
    null = _nullspace(np.vstack([top, bottom]))
    out = []
    d1 = B1.shape[1]
    for col in null.T:
        u, v = B1 @ col[:d1], B2 @ col[d1:]
        nu = np.linalg.norm(u)
        if nu < SVD_TOL or np.linalg.norm(v) < SVD_TOL:
            continue
        out.append((u / nu, v / nu))
    return out


def _dense_basis(states: Sequence[SparseState], keys: Sequence[int]) -> np.ndarray:
    if not states:
        return np.zeros((len(keys), 0), dtype=complex)
    return np.column_stack([s.dense(keys) for s in states])


def kernel_intersection(problem: FeasibilityProblem) -> FeasibilityReport:
    M, k = problem.M, problem.k
    actP = induced_weight_action(problem.permP, k)
    actH = induced_weight_action(problem.permH, k)
    keys = actP.keys
    E1 = eigenspace_basis(problem.permP, k, problem.z1, actP)
    E2 = eigenspace_basis(problem.permP, k, 1j * problem.z1, actP)
    diag = {
        "dim_weight_space": len(keys),
        "dim_u_space": len(E1),
        "dim_v_space": len(E2),
        "P_cycle_lengths": actP.cycle_lengths,
        "H_cycle_lengths": actH.cycle_lengths,
    }
    raw = solve_generator_equations(actH.matrix(), _dense_basis(E1, keys),
                                    _dense_basis(E2, keys), problem.z2)
    solutions = [(SparseState(M, dict(zip(keys, u)), fixed_weight=True),
                  SparseState(M, dict(zip(keys, v)), fixed_weight=True)) for u, v in raw]
    diag["nullity"] = len(raw)
    return FeasibilityReport(problem, bool(solutions), solutions, diag)


def stacked_matrix(problem: FeasibilityProblem, variant: str = "stated") -> np.ndarray:
    """[A; A'] restricted to weight k, shape (4D, 2D)."""
    actP = induced_weight_action(problem.permP, problem.k)
    actH = induced_weight_action(problem.permH, problem.k)
    D = len(actP.keys)
    if D > MAX_DENSE_DIM:
        raise FeasibilityError(f"weight-{problem.k} block of dimension {D} too large for dense rank")
    Pm, Hm = actP.matrix(), actH.matrix()
    eye = np.eye(D)
    zero = np.zeros((D, D))
    z1, z2 = problem.z1, problem.z2
    if variant == "stated":
        A = np.block([[Pm - z1 * eye, zero], [zero, -1j * Pm - z1 * eye]])
    elif variant == "alt":
        A = np.block([[Pm - z1 * eye, zero], [zero, Pm - 1j * z1 * eye]])
    else:
        raise FeasibilityError(f"unknown variant {variant!r}")
    Ap = np.block([[SQRT2 * Hm - z2 * eye, -z2 * eye], [-z2 * eye, SQRT2 * Hm + z2 * eye]])
    return np.vstack([A, Ap])


def rank_check(problem: FeasibilityProblem, variant: str = "stated") -> bool:
    """True iff the stacked matrix is rank deficient (a nonzero common kernel exists)."""
    mat = stacked_matrix(problem, variant)
    return int(np.linalg.matrix_rank(mat, tol=SVD_TOL)) < mat.shape[1]


def check_solution(problem: FeasibilityProblem, u: SparseState, v: SparseState) -> float:
    """Largest violation of the four generator equations."""
    actP = induced_weight_action(problem.permP, problem.k)
    actH = induced_weight_action(problem.permH, problem.k)
    keys = actP.keys
    uu, vv = u.dense(keys), v.dense(keys)
    Pm, Hm = actP.matrix(), actH.matrix()
    z1, z2 = problem.z1, problem.z2
    res = [Pm @ uu - z1 * uu, Pm @ vv - 1j * z1 * vv,
           Hm @ uu - z2 * (uu + vv) / SQRT2, Hm @ vv - z2 * (uu - vv) / SQRT2]
    return float(max(np.max(np.abs(r)) for r in res))


def solution_logical_matrices(problem: FeasibilityProblem, u: SparseState,
                              v: SparseState) -> tuple[np.ndarray, np.ndarray]:
    """Actions of P and H on span{u, v} in the (u, v) frame."""
    actP = induced_weight_action(problem.permP, problem.k)
    actH = induced_weight_action(problem.permH, problem.k)
    keys = actP.keys
    frame = np.column_stack([u.dense(keys), v.dense(keys)])
    return frame.conj().T @ actP.matrix() @ frame, frame.conj().T @ actH.matrix() @ frame


def reproduces_clifford(problem: FeasibilityProblem, u: SparseState, v: SparseState) -> bool:
    mp, mh = solution_logical_matrices(problem, u, v)
    return eq_mod_phase(mp, CLIFFORD_P.matrix) and eq_mod_phase(mh, CLIFFORD_H.matrix)


def _root_fraction(z: complex) -> Fraction:
    return Fraction(cmath.phase(z) / (2 * math.pi)).limit_denominator(10_000) % 1


def z_candidates(perm: QubitPermutation, k: int) -> list[complex]:
    """Every c-th root of unity for the induced cycle lengths c, sorted by angle."""
    lengths = set(induced_weight_action(perm, k).cycle_lengths)
    fracs = sorted({Fraction(t, c) for c in lengths for t in range(c)})
    return [cmath.exp(2j * math.pi * float(f)) for f in fracs]


def z1_candidates(permP: QubitPermutation, k: int) -> list[complex]:
    """Eigenvalues z of P for which i*z is an eigenvalue too."""
    cands = z_candidates(permP, k)
    fr = {_root_fraction(z) for z in cands}
    return [z for z in cands if (_root_fraction(z) + Fraction(1, 4)) % 1 in fr]


def z2_candidates(permH: QubitPermutation, k: int) -> list[complex]:
    """Eigenvalues z of H for which -z is an eigenvalue too.

    H acts on span{u, v} as z2 times a Hadamard, whose eigenvalues are +-z2.
    """
    cands = z_candidates(permH, k)
    fr = {_root_fraction(z) for z in cands}
    return [z for z in cands if (_root_fraction(z) + Fraction(1, 2)) % 1 in fr]


def orbit_profile(perm: QubitPermutation, k: int) -> dict[int, int]:
    """Induced cycle length -> number of cycles of that length."""
    out: dict[int, int] = {}
    for c in induced_weight_action(perm, k).cycle_lengths:
        out[c] = out.get(c, 0) + 1
    return dict(sorted(out.items()))


def orbit_filter(permP: QubitPermutation, permHP: QubitPermutation, k: int) -> bool:
    """Necessary condition only: P needs an induced cycle of length 0 mod 4 and
    the product HP one of length 0 mod 3 (P has order 4 and HP order 3 mod phase)."""
    p_ok = any(c % 4 == 0 for c in orbit_profile(permP, k))
    hp_ok = any(c % 3 == 0 for c in orbit_profile(permHP, k))
    return p_ok and hp_ok


def clifford_orbit_instance(seed=(1, 0)) -> tuple[FeasibilityProblem, SparseState, SparseState]:
    """A feasible instance built from the orbit of ``seed`` under the matrices P and H.

    One qubit per orbit vector o; P and H permute the qubits as they permute
    the orbit. The map psi -> sum_o <o|psi> |o> intertwines the two actions,
    so its images of |0> and |1> solve the generator equations at k=1 with
    z1 = z2 = 1. The orbit of |0> has 48 elements.
    """
    gens = (CLIFFORD_P.matrix, CLIFFORD_H.matrix)
    start = np.asarray(seed, dtype=complex)
    start = start / np.linalg.norm(start)

    def key(vec):
        return tuple(np.round(vec, 9).tolist())

    orbit = {key(start): 0}
    vectors = [start]
    frontier = [start]
    while frontier:
        nxt = []
        for vec in frontier:
            for g in gens:
                w = g @ vec
                if key(w) not in orbit:
                    orbit[key(w)] = len(vectors)
                    vectors.append(w)
                    nxt.append(w)
        frontier = nxt
    M = len(vectors)

    def as_perm(g):
        return QubitPermutation(M, tuple(orbit[key(g @ vec)] + 1 for vec in vectors))

    permP, permH = as_perm(gens[0]), as_perm(gens[1])
    u = SparseState(M, {1 << (M - 1 - q): vec[0].conjugate() for q, vec in enumerate(vectors)})
    v = SparseState(M, {1 << (M - 1 - q): vec[1].conjugate() for q, vec in enumerate(vectors)})
    scale = 1 / u.norm()
    problem = FeasibilityProblem(M, 1, permP, permH, 1, 1)
    return problem, u.scale(scale), v.scale(scale)


# ---------------------------------------------------------------- search

def partitions(m: int, largest: int | None = None) -> Iterator[tuple[int, ...]]:
    """Integer partitions of m in decreasing lexicographic order."""
    largest = m if largest is None else largest
    if m == 0:
        yield ()
        return
    for first in range(min(m, largest), 0, -1):
        for rest in partitions(m - first, first):
            yield (first,) + rest


def cycle_type_representative(M: int, parts: Sequence[int]) -> QubitPermutation:
    cycles, start = [], 1
    for p in parts:
        cycles.append(tuple(range(start, start + p)))
        start += p
    return perm_from_cycles(M, cycles)


def conjugate(perm: QubitPermutation, sigma: QubitPermutation) -> QubitPermutation:
    """sigma perm sigma^-1: the same permutation after relabeling qubits by sigma."""
    return compose(sigma, compose(perm, sigma.inverse()))


def _all_perms(M: int) -> Iterator[QubitPermutation]:
    for img in itertools.permutations(range(1, M + 1)):
        yield QubitPermutation(M, img)


def candidates(M: int, strategy: str, seed: int = 0) -> Iterator[tuple[QubitPermutation, QubitPermutation]]:
    """Candidate (P, H) pairs in a deterministic order; only "exhaustive" ends."""
    if strategy == "exhaustive":
        if M > 5:
            raise FeasibilityError("exhaustive search is limited to M <= 5")
        # simultaneous relabeling preserves feasibility, so P ranges over cycle types only
        for parts in partitions(M):
            rep = cycle_type_representative(M, parts)
            for h in _all_perms(M):
                yield rep, h
    elif strategy == "structured":
        # P runs over cycle types with a part divisible by 4, H over relabeled cycle types
        rng = np.random.default_rng(seed)
        types = [p for p in partitions(M) if any(c % 4 == 0 for c in p)] or list(partitions(M))
        all_types = list(partitions(M))
        while True:
            for tp in types:
                for th in all_types:
                    sigma = QubitPermutation(M, tuple(int(x) + 1 for x in rng.permutation(M)))
                    yield (cycle_type_representative(M, tp),
                           conjugate(cycle_type_representative(M, th), sigma))
    elif strategy == "random":
        rng = np.random.default_rng(seed)
        while True:
            p = QubitPermutation(M, tuple(int(x) + 1 for x in rng.permutation(M)))
            h = QubitPermutation(M, tuple(int(x) + 1 for x in rng.permutation(M)))
            yield p, h
    else:
        raise FeasibilityError(f"unknown strategy {strategy!r}")


@dataclass
class CandidateResult:
    index: int
    P: str
    H: str
    pruned_k: list[int]
    evaluated: int
    hits: list[dict]

    def to_json(self) -> dict:
        return {"index": self.index, "P": self.P, "H": self.H, "pruned_k": self.pruned_k,
                "kernel_evaluations": self.evaluated, "hits": self.hits}


def evaluate_candidate(index: int, P: QubitPermutation, H: QubitPermutation,
                       ks: Sequence[int]) -> CandidateResult:
    HP = compose(H, P)
    pruned, hits, evaluated = [], [], 0
    for k in ks:
        if not orbit_filter(P, HP, k):
            pruned.append(k)
            continue
        for z1 in z1_candidates(P, k):
            for z2 in z2_candidates(H, k):
                evaluated += 1
                rep = kernel_intersection(FeasibilityProblem(P.n, k, P, H, z1, z2))
                if rep.feasible:
                    hits.append(rep.to_json())
    return CandidateResult(index, str(P), str(H), pruned, evaluated, hits)


def _evaluate_chunk(args):
    chunk, ks = args
    return [evaluate_candidate(i, QubitPermutation(len(p), p), QubitPermutation(len(h), h), ks)
            for i, p, h in chunk]


@dataclass
class SearchSummary:
    M: int
    ks: list[int]
    strategy: str
    budget: int
    seed: int
    candidates: int = 0
    fully_pruned: int = 0
    filter_passed: int = 0
    filter_passed_infeasible: int = 0
    kernel_evaluations: int = 0
    feasible_pairs: int = 0
    hits: list[dict] = field(default_factory=list)
    budget_exhausted: bool = False
    resumed_from: int | None = None
    elapsed_seconds: float | None = None

    def add(self, res: CandidateResult) -> None:
        self.candidates += 1
        if len(res.pruned_k) == len(self.ks):
            self.fully_pruned += 1
        else:
            self.filter_passed += 1
            if not res.hits:
                self.filter_passed_infeasible += 1
        self.kernel_evaluations += res.evaluated
        if res.hits:
            self.feasible_pairs += 1
            self.hits.append({"index": res.index, "P": res.P, "H": res.H, "reports": res.hits})

    def to_json(self, timing: bool = False) -> dict:
        out = {
            "M": self.M, "ks": self.ks, "strategy": self.strategy, "budget": self.budget,
            "seed": self.seed, "candidates": self.candidates, "fully_pruned": self.fully_pruned,
            "filter_passed": self.filter_passed,
            "filter_passed_infeasible": self.filter_passed_infeasible,
            "kernel_evaluations": self.kernel_evaluations,
            "feasible_pairs": self.feasible_pairs, "hits": self.hits,
            "budget_exhausted": self.budget_exhausted,
        }
        if timing:
            out["elapsed_seconds"] = self.elapsed_seconds
            out["resumed_from"] = self.resumed_from
        return out

    @classmethod
    def from_json(cls, data: dict) -> "SearchSummary":
        fields = {k: v for k, v in data.items() if k in cls.__dataclass_fields__}
        return cls(**fields)


def search(M: int, k: int | None = None, strategy: str = "exhaustive", budget: int = 10**5,
           seed: int = 0, workers: int = 1, jsonl_path: str | os.PathLike | None = None,
           checkpoint_path: str | os.PathLike | None = None,
           chunk_size: int = 64) -> SearchSummary:
    """Enumerate candidate pairs, prune with ``orbit_filter``, decide with ``kernel_intersection``.

    Results are identical for identical arguments. With a checkpoint file an
    interrupted search resumes after the last finished candidate; the
    JSON-lines stream is appended to in that case.
    """
    ks = [k] if k is not None else [kk for kk in range(M + 1) if math.comb(M, kk) >= 2]
    summary = SearchSummary(M, ks, strategy, budget, seed)
    start_index = 0
    ckpt = Path(checkpoint_path) if checkpoint_path else None
    if ckpt and ckpt.exists():
        saved = json.loads(ckpt.read_text())
        summary = SearchSummary.from_json(saved["summary"])
        start_index = saved["next_index"]
        summary.resumed_from = start_index
    t0 = time.perf_counter()
    stream = open(jsonl_path, "a" if start_index else "w") if jsonl_path else None
    try:
        pending: list[tuple[int, tuple, tuple]] = []
        index = -1
        executor = ProcessPoolExecutor(workers) if workers > 1 else None

        def flush():
            nonlocal pending
            if not pending:
                return
            chunks = [pending[i:i + chunk_size] for i in range(0, len(pending), chunk_size)]
            if executor:
                batches = executor.map(_evaluate_chunk, [(c, ks) for c in chunks])
            else:
                batches = map(_evaluate_chunk, [(c, ks) for c in chunks])
            for batch in batches:
                for res in batch:
                    summary.add(res)
                    if stream:
                        stream.write(json.dumps(res.to_json(), sort_keys=True) + "\n")
            if stream:
                stream.flush()
            if ckpt:
                ckpt.write_text(json.dumps({"next_index": pending[-1][0] + 1,
                                            "summary": summary.to_json(timing=True)}))
            pending = []

        for index, (P, H) in enumerate(candidates(M, strategy, seed)):
            if index < start_index:
                continue
            if index >= budget:
                summary.budget_exhausted = True
                break
            pending.append((index, P.image, H.image))
            if len(pending) >= chunk_size * max(workers, 1):
                flush()
        flush()
        if executor:
            executor.shutdown()
    finally:
        if stream:
            stream.close()
    summary.elapsed_seconds = time.perf_counter() - t0
    return summary


__all__ = [
    "FeasibilityError", "FeasibilityProblem", "FeasibilityReport", "SearchSummary",
    "check_solution", "clifford_orbit_instance", "conjugate", "cycle_type_representative", "kernel_intersection",
    "orbit_filter", "orbit_profile", "partitions", "rank_check", "reproduces_clifford",
    "search", "solution_logical_matrices", "solve_generator_equations", "stacked_matrix",
    "z1_candidates", "z2_candidates", "z_candidates",
]
