import cmath
import json
import math
from math import comb

import numpy as np
import pytest
from scipy.linalg import null_space

import permqc.feasibility as feas
from permqc.clifford import H as CH
from permqc.clifford import P as CP
from permqc.feasibility import (
    FeasibilityError,
    FeasibilityProblem,
    check_solution,
    clifford_orbit_instance,
    conjugate,
    kernel_intersection,
    orbit_filter,
    orbit_profile,
    partitions,
    rank_check,
    reproduces_clifford,
    search,
    solve_generator_equations,
    z1_candidates,
    z2_candidates,
    z_candidates,
)
from permqc.perm_hadamard import op_H, op_Y
from permqc.states import QubitPermutation, apply_perm, compose, perm_from_cycles


def rand_perm(rng, M):
    return QubitPermutation(M, tuple(int(x) + 1 for x in rng.permutation(M)))


def turns(zs):
    return sorted(round(cmath.phase(z) / (2 * math.pi) % 1, 9) % 1 for z in zs)


# ---------------------------------------------------------------- problem and z candidates

def test_problem_validation():
    ident = QubitPermutation.identity(3)
    with pytest.raises(FeasibilityError):
        FeasibilityProblem(3, 4, ident, ident)
    with pytest.raises(FeasibilityError):
        FeasibilityProblem(3, 1, ident, ident, z1=2)
    with pytest.raises(FeasibilityError):
        FeasibilityProblem(3, 1, ident, QubitPermutation.identity(4))


def test_z_candidates_8_cycle():
    zs = z_candidates(perm_from_cycles(8, [tuple(range(1, 9))]), 1)
    assert turns(zs) == [t / 8 for t in range(8)]


def test_z_candidates_identity():
    assert z_candidates(QubitPermutation.identity(4), 2) == [1]


def test_z_candidates_union():
    # k=1 on (1,2,3,4)(5,6) plus a fixed qubit: induced cycle lengths {1, 2, 4}
    p = perm_from_cycles(7, [(1, 2, 3, 4), (5, 6)])
    assert set(orbit_profile(p, 1)) == {1, 2, 4}
    assert turns(z_candidates(p, 1)) == [0, 0.25, 0.5, 0.75]


def test_z1_and_z2_filters():
    p = perm_from_cycles(4, [(1, 2, 3, 4)])
    assert len(z1_candidates(p, 1)) == 4
    assert z1_candidates(perm_from_cycles(4, [(1, 2)]), 1) == []
    assert turns(z2_candidates(perm_from_cycles(4, [(1, 2)]), 1)) == [0, 0.5]


# ---------------------------------------------------------------- orbit filter

def test_orbit_filter_4_cycle_p_side():
    p = perm_from_cycles(4, [(1, 2, 3, 4)])
    hp = perm_from_cycles(4, [(1, 2, 3)])
    assert orbit_filter(p, hp, 1)


def test_orbit_filter_identity_fails():
    ident = QubitPermutation.identity(4)
    assert not orbit_filter(ident, perm_from_cycles(4, [(1, 2, 3)]), 1)


def test_orbit_filter_is_necessary_only():
    summary = search(5, strategy="exhaustive")
    assert summary.filter_passed_infeasible > 0 and summary.feasible_pairs == 0


# ---------------------------------------------------------------- kernel intersection

def test_identity_infeasible():
    ident = QubitPermutation.identity(2)
    rep = kernel_intersection(FeasibilityProblem(2, 1, ident, ident, 1, 1))
    assert not rep.feasible and rep.diagnostics["dim_v_space"] == 0


def test_off_spectrum_z_infeasible():
    p = perm_from_cycles(3, [(1, 2, 3)])
    prob = FeasibilityProblem(3, 1, p, p, cmath.exp(0.1j), 1)
    assert not kernel_intersection(prob).feasible and not rank_check(prob)


def _random_problem(rng, M):
    p, h = rand_perm(rng, M), rand_perm(rng, M)
    k = int(rng.integers(0, M + 1))
    z1s = z_candidates(p, k)
    z2s = z_candidates(h, k)
    z1 = z1s[int(rng.integers(len(z1s)))]
    z2 = z2s[int(rng.integers(len(z2s)))]
    return FeasibilityProblem(M, k, p, h, z1, z2)


def test_rank_agrees_on_random_5_qubit():
    rng = np.random.default_rng(5)
    for _ in range(50):
        prob = _random_problem(rng, 5)
        assert kernel_intersection(prob).feasible == rank_check(prob)


def test_rank_agrees_on_random_3_qubit_k1():
    rng = np.random.default_rng(3)
    for _ in range(200):
        p, h = rand_perm(rng, 3), rand_perm(rng, 3)
        zs = z_candidates(p, 1) + [1j, cmath.exp(0.3j)]
        prob = FeasibilityProblem(3, 1, p, h, zs[int(rng.integers(len(zs)))],
                                  z_candidates(h, 1)[0])
        assert kernel_intersection(prob).feasible == rank_check(prob)


def test_rank_variants_agree():
    rng = np.random.default_rng(11)
    for _ in range(50):
        prob = _random_problem(rng, 4)
        assert rank_check(prob, "stated") == rank_check(prob, "alt")
    with pytest.raises(FeasibilityError):
        rank_check(prob, "other")


def test_dense_guard():
    ident = QubitPermutation.identity(14)
    with pytest.raises(FeasibilityError):
        rank_check(FeasibilityProblem(14, 7, ident, ident))


def test_eigenspace_dimensions_sum():
    rng = np.random.default_rng(2)
    for _ in range(20):
        M = int(rng.integers(2, 7))
        p = rand_perm(rng, M)
        k = int(rng.integers(0, M + 1))
        total = sum(kernel_intersection(FeasibilityProblem(M, k, p, p, z, 1)).diagnostics["dim_u_space"]
                    for z in z_candidates(p, k))
        assert total == comb(M, k)


def test_perm_hadamard_pair_verdicts():
    """Pinned: op_Y as the P candidate and op_H as the H candidate, weight 2."""
    P, H = op_Y(), op_H()
    verdicts = {}
    for z1 in z1_candidates(P, 2):
        for z2 in z2_candidates(H, 2):
            prob = FeasibilityProblem(16, 2, P, H, z1, z2)
            rep = kernel_intersection(prob)
            assert rep.feasible == rank_check(prob)
            verdicts[(prob.to_json()["z1"], prob.to_json()["z2"])] = rep.feasible
    assert verdicts == {(a, b): False for a in ("0", "1/4", "1/2", "3/4") for b in ("0", "1/2")}


# ---------------------------------------------------------------- positive instances

@pytest.fixture(scope="module")
def orbit_instance():
    return clifford_orbit_instance()


def test_orbit_instance_constructed_solution(orbit_instance):
    prob, u, v = orbit_instance
    assert prob.M == 48
    assert check_solution(prob, u, v) < 1e-10
    assert reproduces_clifford(prob, u, v)


def test_orbit_instance_found_by_kernel(orbit_instance):
    prob, _, _ = orbit_instance
    rep = kernel_intersection(prob)
    assert rep.feasible and rank_check(prob) and rank_check(prob, "alt")
    for u, v in rep.solutions:
        assert check_solution(prob, u, v) < 1e-10
        assert reproduces_clifford(prob, u, v)
    assert orbit_filter(prob.permP, compose(prob.permH, prob.permP), 1)


def test_orbit_instance_json(orbit_instance):
    prob, _, _ = orbit_instance
    data = json.loads(json.dumps(kernel_intersection(prob).to_json(with_states=True)))
    assert data["feasible"] and data["num_solutions"] == 1
    assert data["problem"]["z1"] == "0"


def test_relabeling_invariance(orbit_instance):
    prob, u, v = orbit_instance
    rng = np.random.default_rng(17)
    for _ in range(3):
        sigma = rand_perm(rng, prob.M)
        moved = FeasibilityProblem(prob.M, 1, conjugate(prob.permP, sigma),
                                   conjugate(prob.permH, sigma), prob.z1, prob.z2)
        su, sv = apply_perm(sigma, u), apply_perm(sigma, v)
        assert check_solution(moved, su, sv) < 1e-10
        assert kernel_intersection(moved).feasible


def test_solver_on_regular_representation():
    """The left-regular action of the group generated by the exact P and H matrices."""
    gens = (CP.matrix, CH.matrix)

    def key(m):
        return tuple(np.round(m, 8).flatten().tolist())

    elems = {key(np.eye(2)): np.eye(2, dtype=complex)}
    frontier = [np.eye(2, dtype=complex)]
    while frontier:
        nxt = []
        for e in frontier:
            for g in gens:
                c = g @ e
                if key(c) not in elems:
                    elems[key(c)] = c
                    nxt.append(c)
        frontier = nxt
    keys = list(elems)
    index = {k: i for i, k in enumerate(keys)}
    N = len(keys)
    assert N == 192

    def left(g):
        m = np.zeros((N, N))
        for i, k in enumerate(keys):
            m[index[key(g @ elems[k])], i] = 1
        return m

    LP, LH = left(gens[0]), left(gens[1])
    B1, B2 = null_space(LP - np.eye(N)), null_space(LP - 1j * np.eye(N))
    sols = solve_generator_equations(LH, B1, B2, 1)
    assert len(sols) == 2
    for u, v in sols:
        frame = np.column_stack([u, v])
        assert np.allclose(frame.conj().T @ frame, np.eye(2), atol=1e-10)
        assert np.max(np.abs(LH @ u - (u + v) / math.sqrt(2))) < 1e-10
        assert np.max(np.abs(LP @ v - 1j * v)) < 1e-10


# ---------------------------------------------------------------- search

def test_partitions():
    assert list(partitions(4)) == [(4,), (3, 1), (2, 2), (2, 1, 1), (1, 1, 1, 1)]


def test_exhaustive_m3_pinned():
    s = search(3, strategy="exhaustive")
    assert (s.candidates, s.feasible_pairs, s.fully_pruned) == (18, 0, 18)


def test_exhaustive_m4_k1_pinned():
    s = search(4, k=1, strategy="exhaustive")
    assert s.candidates == 120 and s.feasible_pairs == 0


def test_exhaustive_m4_all_k_pinned():
    s = search(4, strategy="exhaustive")
    assert (s.candidates, s.filter_passed, s.kernel_evaluations, s.feasible_pairs) == (120, 8, 288, 0)


def test_exhaustive_rejects_large_m():
    with pytest.raises(FeasibilityError):
        search(6, strategy="exhaustive")


def test_search_deterministic(tmp_path):
    a, b = tmp_path / "a.jsonl", tmp_path / "b.jsonl"
    sa = search(4, strategy="random", budget=40, seed=9, jsonl_path=a)
    sb = search(4, strategy="random", budget=40, seed=9, jsonl_path=b)
    assert a.read_bytes() == b.read_bytes()
    assert json.dumps(sa.to_json()) == json.dumps(sb.to_json())
    assert sa.budget_exhausted and sa.candidates == 40
    assert len(a.read_text().splitlines()) == 40


def test_structured_strategy_format():
    s = search(8, strategy="structured", budget=12, seed=1, k=2)
    data = s.to_json(timing=True)
    assert data["candidates"] == 12 and data["budget_exhausted"]
    assert data["elapsed_seconds"] >= 0


def test_budget_truncates_exhaustive():
    s = search(4, strategy="exhaustive", budget=10)
    assert s.candidates == 10 and s.budget_exhausted


def test_checkpoint_resume(tmp_path, monkeypatch):
    ref = tmp_path / "ref.jsonl"
    full = search(4, strategy="exhaustive", jsonl_path=ref, chunk_size=16)

    out, ckpt = tmp_path / "run.jsonl", tmp_path / "ckpt.json"
    real = feas._evaluate_chunk
    calls = {"n": 0}

    def flaky(args):
        calls["n"] += 1
        if calls["n"] == 3:
            raise KeyboardInterrupt
        return real(args)

    monkeypatch.setattr(feas, "_evaluate_chunk", flaky)
    with pytest.raises(KeyboardInterrupt):
        search(4, strategy="exhaustive", jsonl_path=out, checkpoint_path=ckpt, chunk_size=16)
    assert json.loads(ckpt.read_text())["next_index"] == 32
    monkeypatch.setattr(feas, "_evaluate_chunk", real)
    resumed = search(4, strategy="exhaustive", jsonl_path=out, checkpoint_path=ckpt, chunk_size=16)
    assert resumed.resumed_from == 32
    assert out.read_bytes() == ref.read_bytes()
    assert resumed.to_json() == full.to_json()


def test_workers_match_serial():
    serial = search(4, strategy="exhaustive")
    parallel = search(4, strategy="exhaustive", workers=2, chunk_size=8)
    assert serial.to_json() == parallel.to_json()
