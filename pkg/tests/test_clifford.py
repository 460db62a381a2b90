import cmath
import itertools
import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from permqc.clifford import (
    GENERATORS,
    INDICES,
    CliffordError,
    H,
    IDENTITY,
    P,
    X,
    Z,
    a_matrix,
    canonicalize,
    element,
    element_order,
    eq_mod_phase,
    evaluate_word,
    generate,
    inverse,
    mul_mod_phase,
    multiplication_table,
    parse_word,
    verify_s4_profile,
    verify_table,
)

ALL = [a_matrix(i, j) for i, j in INDICES]
elements = st.sampled_from(ALL)


def test_a11_is_p():
    assert np.allclose(a_matrix(1, 1).matrix, np.diag([1, 1j]))


def test_a31_is_hadamard():
    assert np.allclose(a_matrix(3, 1).matrix, np.array([[1, 1], [1, -1]]) / math.sqrt(2))


def test_a14_is_identity():
    assert np.allclose(a_matrix(1, 4).matrix, np.eye(2))


def test_row3_formula():
    want = (a_matrix(1, 2).matrix + a_matrix(2, 4).matrix) / math.sqrt(2)
    assert np.allclose(a_matrix(3, 1).matrix, want)


def test_row5_formula():
    for j in range(1, 5):
        want = (a_matrix(1, j).matrix + 1j * a_matrix(2, j).matrix) / math.sqrt(2)
        assert np.allclose(a_matrix(5, j).matrix, want)


def test_out_of_range():
    with pytest.raises(CliffordError):
        a_matrix(7, 1)
    with pytest.raises(CliffordError):
        a_matrix(1, 0)


def test_all_unitary_and_distinct():
    for e in ALL:
        assert np.allclose(e.matrix @ e.matrix.conj().T, np.eye(2))
    for a, b in itertools.combinations(ALL, 2):
        assert not eq_mod_phase(a.matrix, b.matrix)


def test_hh_identity():
    assert mul_mod_phase(H, H).index == (1, 4)


def test_pp_is_z():
    assert mul_mod_phase(P, P).index == (1, 2)


def test_canonicalize_strips_phase():
    assert canonicalize(cmath.exp(1j * math.pi / 7) * H.matrix) == (3, 1)


def test_canonicalize_rejects_t_gate():
    with pytest.raises(CliffordError):
        canonicalize(np.diag([1, cmath.exp(1j * math.pi / 4)]))


def test_eq_mod_phase():
    assert eq_mod_phase(1j * P.matrix, P.matrix)
    assert not eq_mod_phase(P.matrix, Z.matrix)


def test_generate_full_group():
    assert len(generate([H, P])) == 24


def test_generate_table1_subgroup():
    rep = verify_table(1)
    assert len(generate([P, X])) == 8 and rep.subgroup_matches


def test_generate_z_only():
    assert {e.index for e in generate([Z])} == {(1, 4), (1, 2)}


@pytest.mark.parametrize("table", [1, 2])
def test_tables_verify(table):
    rep = verify_table(table)
    assert rep.passed and len(rep.subgroup) == 8


def test_table_misprints_flagged():
    assert verify_table(1).printed_mismatches == [(2, 2), (2, 3), (2, 4)]
    assert verify_table(2).printed_mismatches == [(4, 1)]


def test_table2_word_h2zh_is_a32():
    assert evaluate_word(parse_word("H^2ZH")).index == (3, 2)


def test_parse_word():
    assert parse_word("P^3") == ["P"] * 3
    assert parse_word("(PX)^2") == ["P", "X", "P", "X"]
    assert parse_word("H2ZH") == ["H", "H", "Z", "H"]
    with pytest.raises(CliffordError):
        parse_word("Q")


def test_s4_profile():
    rep = verify_s4_profile()
    assert rep.passed and rep.size == 24 and rep.profile[3] == 8


def test_h_order_two():
    assert element_order(H) == 2


def test_multiplication_table_shape():
    table = multiplication_table()
    assert len(table) == 24 and all(len(row) == 24 for row in table.values())
    assert table["A_31"]["A_31"] == "A_14"


@settings(max_examples=100, deadline=None)
@given(elements, elements)
def test_closure(a, b):
    c = mul_mod_phase(a, b)
    assert c.index in INDICES
    assert np.allclose(c.matrix, a.matrix @ b.matrix)


@settings(max_examples=50, deadline=None)
@given(elements)
def test_inverse(a):
    assert mul_mod_phase(a, inverse(a)).index == IDENTITY.index


@given(st.lists(elements, min_size=1, max_size=3))
def test_generate_idempotent(gens):
    group = generate(gens)
    assert {e.index for e in generate(group)} == {e.index for e in group}
    for a in group:
        assert inverse(a).index in {e.index for e in group}


def test_element_from_matrix():
    e = element(GENERATORS["X"].matrix * -1)
    assert e.index == (2, 4)


def test_table_subgroups_intersection():
    one = {e.index for e in generate([P, X])}
    two = {e.index for e in generate([H, Z])}
    assert one & two == {(1, 2), (1, 4), (2, 2), (2, 4)}
