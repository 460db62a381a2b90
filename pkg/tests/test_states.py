import cmath
import json
import math
from math import comb

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from permqc.dualrail import gamma_perm, logical_basis, psi0, psi1
from permqc.perm_hadamard import U
from permqc.states import (
    QubitPermutation,
    SparseState,
    StateError,
    apply_perm,
    basis_key,
    compose,
    eigenspace_basis,
    fidelity_mod_phase,
    induced_weight_action,
    inner_product,
    inverse,
    key_bits,
    make_excited,
    order,
    parse_cycles,
    perm_from_cycles,
    random_state,
    roots_of_unity,
    superpose,
    tensor,
    weight_keys,
)


def perms(n):
    return st.permutations(list(range(1, n + 1))).map(lambda img: QubitPermutation(n, tuple(img)))


@st.composite
def perm_state(draw, max_n=6):
    n = draw(st.integers(2, max_n))
    k = draw(st.integers(0, n))
    seed = draw(st.integers(0, 2**32 - 1))
    state = random_state(n, weight_keys(n, k), np.random.default_rng(seed))
    return n, k, state


# ---------------------------------------------------------------- construction

def test_make_excited_single():
    s = make_excited(4, [1])
    assert s.items() == [(basis_key(4, [1]), 1)]
    assert key_bits(4, s.items()[0][0]) == "1000"


def test_make_excited_vacuum():
    assert make_excited(4)["0000"] == 1
    assert make_excited(4).weight == 0


def test_make_excited_j8():
    s = make_excited(8, [3])
    assert s["00100000"] == 1 and len(s) == 1


@pytest.mark.parametrize("positions", [[1, 1], [0], [5]])
def test_make_excited_rejects_bad_positions(positions):
    with pytest.raises(StateError):
        make_excited(4, positions)


def test_superpose_bell_like():
    s = superpose([(1 / math.sqrt(2), make_excited(2, [1])), (1 / math.sqrt(2), make_excited(2, [2]))])
    assert len(s) == 2 and s.norm() == pytest.approx(1, abs=1e-15)


def test_superpose_cancels_to_empty():
    s = superpose([(1, make_excited(2, [1])), (-1, make_excited(2, [1]))])
    assert len(s) == 0 and s.norm() == 0


def test_superpose_psi0_formula_at_n2():
    x = cmath.exp(2j * math.pi / 2)
    s = superpose([(x ** (j - 1) / math.sqrt(2), make_excited(2, [j])) for j in (1, 2)])
    assert s["10"] == pytest.approx(1 / math.sqrt(2))
    assert s["01"] == pytest.approx(-1 / math.sqrt(2))


def test_superpose_rejects_mixed_sizes():
    with pytest.raises(StateError):
        superpose([(1, make_excited(2)), (1, make_excited(3))])


def test_prune_below_tolerance():
    s = SparseState(2, {0b01: 1e-13, 0b10: 1})
    assert len(s) == 1


def test_fixed_weight_flag_rejects_mixed_weights():
    with pytest.raises(StateError):
        SparseState(2, {0b01: 1, 0b11: 1}, fixed_weight=True)


def test_non_finite_rejected():
    with pytest.raises(StateError):
        SparseState(2, {0: float("nan")})


# ---------------------------------------------------------------- inner products

def test_psi0_normalized():
    assert inner_product(psi0(4), psi0(4)) == pytest.approx(1)


def test_psi0_psi1_orthogonal():
    assert inner_product(psi0(4), psi1(4)) == 0


def test_inner_product_conjugate_linear_in_first():
    a = make_excited(1, [1])
    assert inner_product(a.scale(1j), a) == pytest.approx(-1j)


def test_inner_product_size_mismatch():
    with pytest.raises(StateError):
        inner_product(make_excited(2), make_excited(3))


def test_tensor_gives_logical_zero():
    zero, _ = logical_basis(4)
    t = tensor(psi0(4), psi1(4))
    assert t.n == 16 and t.items() == zero.items()


def test_fidelity_global_phase_invisible(rng):
    s = random_state(5, weight_keys(5, 2), rng)
    assert fidelity_mod_phase(s, s.scale(cmath.exp(1j * math.pi / 4))) == pytest.approx(1, abs=1e-14)


def test_fidelity_orthogonal_logical():
    zero, one = logical_basis(4)
    assert fidelity_mod_phase(zero, one) == 0


def test_fidelity_rejects_unnormalized():
    with pytest.raises(StateError):
        fidelity_mod_phase(make_excited(2).scale(2), make_excited(2))


def test_json_roundtrip(rng):
    s = random_state(6, weight_keys(6, 3), rng)
    data = json.loads(json.dumps(s.to_json()))
    back = SparseState.from_json(data)
    assert back.items() == s.items() and data["weight"] == 3
    bits = [t["bits"] for t in data["terms"]]
    assert bits == sorted(bits)


# ---------------------------------------------------------------- permutations

def test_perm_from_cycles_u():
    assert U.image == (6, 5, 4, 3, 2, 1, 8, 7)
    assert str(U) == "(1,6)(2,5)(3,4)(7,8)"


@pytest.mark.parametrize("n", [2, 5, 8])
def test_order_of_descending_cycle(n):
    assert order(perm_from_cycles(n, [tuple(range(n, 0, -1))])) == n


def test_compose_with_inverse_is_identity():
    assert compose(U, inverse(U)).is_identity()


def test_compose_applies_right_first():
    p = perm_from_cycles(3, [(1, 2)])
    q = perm_from_cycles(3, [(2, 3)])
    # q sends 2 -> 3, then p leaves 3 alone
    assert compose(p, q)(2) == 3
    assert compose(p, q)(1) == 2


@pytest.mark.parametrize("cycles", [[(1, 2), (2, 3)], [(1, 4)]])
def test_perm_from_cycles_rejects_bad(cycles):
    with pytest.raises(StateError):
        perm_from_cycles(3, cycles)


def test_parse_cycles_roundtrip():
    p = perm_from_cycles(7, [(1, 3, 5), (2, 7)])
    assert parse_cycles(7, str(p)) == p
    assert parse_cycles(4, "()").is_identity()
    with pytest.raises(StateError):
        parse_cycles(4, "(1,2")


def test_apply_swap_moves_content():
    s = apply_perm(perm_from_cycles(2, [(1, 2)]), make_excited(2, [2]))
    assert s["10"] == 1


def test_apply_perm_move_to_convention():
    # qubit 1's excitation lands on image[1] = 2
    s = apply_perm(perm_from_cycles(3, [(1, 2, 3)]), make_excited(3, [1]))
    assert s["010"] == 1


def test_gamma_phase_on_logical_one():
    zero, one = logical_basis(4)
    g = gamma_perm(4)
    out = apply_perm(g, one)
    assert max(abs(out.amplitude(k) - 1j * a) for k, a in one.items()) < 1e-12
    assert apply_perm(g, zero).items() == zero.items()


def test_apply_perm_size_mismatch():
    with pytest.raises(StateError):
        apply_perm(QubitPermutation.identity(3), make_excited(2))


@settings(max_examples=60, deadline=None)
@given(perm_state(), st.data())
def test_apply_perm_preserves_norm_and_weight(ps, data):
    n, k, s = ps
    p = data.draw(perms(n))
    out = apply_perm(p, s)
    assert abs(out.norm() - s.norm()) < 1e-12
    assert out.weight == (k if len(s) else None)


@settings(max_examples=60, deadline=None)
@given(perm_state(), st.data())
def test_apply_perm_is_group_action(ps, data):
    n, _, s = ps
    p, q = data.draw(perms(n)), data.draw(perms(n))
    a = apply_perm(compose(p, q), s)
    b = apply_perm(p, apply_perm(q, s))
    assert (a - b).norm() < 1e-12


@settings(max_examples=60, deadline=None)
@given(perm_state(), st.data())
def test_apply_inverse_undoes(ps, data):
    n, _, s = ps
    p = data.draw(perms(n))
    assert (apply_perm(inverse(p), apply_perm(p, s)) - s).norm() < 1e-12


@settings(max_examples=60, deadline=None)
@given(st.integers(1, 8).flatmap(lambda n: perms(n)))
def test_order_is_lcm_of_cycles(p):
    assert p.order() == math.lcm(*[len(c) for c in p.cycles])
    assert p.power(p.order()).is_identity()


# ---------------------------------------------------------------- induced action and eigenspaces

@pytest.mark.parametrize("n", [3, 5, 8])
def test_n_cycle_induces_single_cycle(n):
    p = perm_from_cycles(n, [tuple(range(1, n + 1))])
    act = induced_weight_action(p, 1)
    assert act.cycle_lengths == [n]
    eig = np.linalg.eigvals(act.matrix())
    roots = roots_of_unity(n)
    assert all(min(abs(e - r) for r in roots) < 1e-9 for e in eig)


@pytest.mark.parametrize("n", [4, 6, 8])
def test_eigenspace_contains_excited_row(n):
    g = perm_from_cycles(n, [tuple(range(n, 0, -1))])
    x = cmath.exp(2j * math.pi / n)
    row = superpose([(x ** (j - 1) / math.sqrt(n), make_excited(n, [j])) for j in range(1, n + 1)])
    basis = eigenspace_basis(g, 1, x)
    assert len(basis) == 1
    assert fidelity_mod_phase(basis[0], row) == pytest.approx(1, abs=1e-12)
    assert (apply_perm(g, row) - row.scale(x)).norm() < 1e-12


def test_identity_eigenspace_k1():
    vecs = eigenspace_basis(QubitPermutation.identity(5), 1, 1)
    assert len(vecs) == 5
    gram = np.array([[inner_product(a, b) for b in vecs] for a in vecs])
    assert np.allclose(gram, np.eye(5))


def test_eigenspace_empty_when_no_root():
    assert eigenspace_basis(perm_from_cycles(4, [(1, 2)]), 1, 1j) == []


def test_weight_out_of_range():
    with pytest.raises(StateError):
        induced_weight_action(QubitPermutation.identity(3), 4)


@settings(max_examples=40, deadline=None)
@given(st.integers(2, 7).flatmap(lambda n: st.tuples(perms(n), st.integers(0, n))))
def test_eigenvectors_and_dimension_count(pk):
    p, k = pk
    act = induced_weight_action(p, k)
    lengths = set(act.cycle_lengths)
    lams = {round(t / c, 12): cmath.exp(2j * math.pi * t / c) for c in lengths for t in range(c)}
    total = 0
    for lam in lams.values():
        vecs = eigenspace_basis(p, k, lam, act)
        total += len(vecs)
        for v in vecs:
            pv = apply_perm(p, v)
            assert abs(inner_product(v, pv) - lam) < 1e-12
            assert fidelity_mod_phase(pv, v) == pytest.approx(1, abs=1e-12)
    assert total == comb(p.n, k)
