"""The 24 single-qubit Clifford gates modulo global phase."""
from __future__ import annotations

import math
from collections import Counter
from dataclasses import dataclass, field
from functools import lru_cache
from typing import Iterable, Sequence

import numpy as np

MATCH_TOL = 1e-9
SQRT2 = math.sqrt(2)


class CliffordError(ValueError):
    pass


def _a1(j: int) -> np.ndarray:
    return np.array([[1, 0], [0, 1j ** j]], dtype=complex)


def _a2(j: int) -> np.ndarray:
    return np.array([[0, 1], [1j ** j, 0]], dtype=complex)


# rows 3 and 4: A_3j = (A_1a + A_2b)/sqrt2, A_4j = (A_1a - A_2b)/sqrt2
_ROW34 = {1: (2, 4), 2: (4, 2), 3: (1, 3), 4: (3, 1)}


def a_matrix_raw(i: int, j: int) -> np.ndarray:
    if not (1 <= i <= 6 and 1 <= j <= 4):
        raise CliffordError(f"index ({i}, {j}) outside 1..6 x 1..4")
    if i == 1:
        return _a1(j)
    if i == 2:
        return _a2(j)
    if i in (3, 4):
        a, b = _ROW34[j]
        sign = 1 if i == 3 else -1
        return (_a1(a) + sign * _a2(b)) / SQRT2
    sign = 1j if i == 5 else -1j
    return (_a1(j) + sign * _a2(j)) / SQRT2


INDICES: tuple[tuple[int, int], ...] = tuple((i, j) for i in range(1, 7) for j in range(1, 5))


def eq_mod_phase(a, b, tol: float = MATCH_TOL) -> bool:
    """True iff ``a = e^{i phi} b`` for some real phi (2x2 unitaries)."""
    a = np.asarray(a, dtype=complex)
    b = np.asarray(b, dtype=complex)
    return abs(abs(np.trace(b.conj().T @ a)) / 2 - 1) <= tol and np.allclose(
        a @ a.conj().T, np.eye(2), atol=1e-9)


def phase_normalized(m) -> np.ndarray:
    """``m`` rescaled so its first nonzero entry (row-major) is real positive."""
    m = np.asarray(m, dtype=complex)
    for v in m.flat:
        if abs(v) > MATCH_TOL:
            return m * (abs(v) / v)
    return m


@lru_cache(maxsize=None)
def _table() -> tuple[np.ndarray, ...]:
    return tuple(phase_normalized(a_matrix_raw(i, j)) for i, j in INDICES)


def canonicalize(matrix) -> tuple[int, int]:
    """Index (i, j) of the A_ij equal to ``matrix`` up to a global phase."""
    m = phase_normalized(matrix)
    if m.shape != (2, 2):
        raise CliffordError("expected a 2x2 matrix")
    for idx, ref in zip(INDICES, _table()):
        if np.max(np.abs(m - ref)) <= MATCH_TOL * 10:
            return idx
    raise CliffordError(f"matrix is not a Clifford gate mod phase:\n{matrix}")


@dataclass(frozen=True)
class CliffordElement:
    matrix: np.ndarray = field(compare=False, repr=False)
    index: tuple[int, int]

    def __mul__(self, other: "CliffordElement") -> "CliffordElement":
        return mul_mod_phase(self, other)

    def __hash__(self):
        return hash(self.index)

    def __str__(self) -> str:
        return f"A_{self.index[0]}{self.index[1]}"


def a_matrix(i: int, j: int) -> CliffordElement:
    return CliffordElement(a_matrix_raw(i, j), (i, j))


def element(matrix) -> CliffordElement:
    return CliffordElement(np.asarray(matrix, dtype=complex), canonicalize(matrix))


def mul_mod_phase(a: CliffordElement, b: CliffordElement) -> CliffordElement:
    return element(a.matrix @ b.matrix)


def inverse(a: CliffordElement) -> CliffordElement:
    return element(a.matrix.conj().T)


P = a_matrix(1, 1)
H = a_matrix(3, 1)
Z = a_matrix(1, 2)
X = a_matrix(2, 4)
IDENTITY = a_matrix(1, 4)

GENERATORS = {"P": P, "H": H, "Z": Z, "X": X}


def generate(generators: Iterable[CliffordElement]) -> set[CliffordElement]:
    """Closure of ``generators`` (plus the identity) under multiplication mod phase."""
    gens = list(generators)
    found = {IDENTITY.index: IDENTITY}
    frontier = [IDENTITY]
    while frontier:
        nxt = []
        for e in frontier:
            for g in gens:
                c = mul_mod_phase(g, e)
                if c.index not in found:
                    found[c.index] = c
                    nxt.append(c)
        frontier = nxt
    return set(found.values())


def element_order(a: CliffordElement) -> int:
    cur, k = a, 1
    while cur.index != IDENTITY.index:
        cur = mul_mod_phase(cur, a)
        k += 1
    return k


def evaluate_word(word: Sequence[str]) -> CliffordElement:
    """Operator product of named generators, written left to right as in A B C."""
    m = np.eye(2, dtype=complex)
    for name in word:
        m = m @ GENERATORS[name].matrix
    return element(m)


def parse_word(text: str) -> list[str]:
    """Expand words like ``P^3``, ``(PX)^2`` and ``H2ZH`` into generator names."""
    out: list[str] = []
    i = 0
    while i < len(text):
        ch = text[i]
        if ch == "(":
            close = text.index(")", i)
            inner = parse_word(text[i + 1:close])
            i = close + 1
            power = 1
            if i < len(text) and text[i] == "^":
                j = i + 1
                while j < len(text) and text[j].isdigit():
                    j += 1
                power = int(text[i + 1:j])
                i = j
            out.extend(inner * power)
            continue
        if ch not in GENERATORS:
            raise CliffordError(f"unknown symbol {ch!r} in {text!r}")
        i += 1
        power = 1
        if i < len(text) and text[i] == "^":
            i += 1
        j = i
        while j < len(text) and text[j].isdigit():
            j += 1
        if j > i:
            power = int(text[i:j])
            i = j
        out.extend([ch] * power)
    return out


# Cells as printed: (row, column) -> word.
TABLE_WORDS = {
    1: {(1, 1): "P", (1, 2): "P^2", (1, 3): "P^3", (1, 4): "P^4",
        (2, 1): "PX", (2, 2): "(PX)^2", (2, 3): "(PX)^3", (2, 4): "(PX)^4"},
    2: {(1, 2): "Z", (1, 4): "Z^2",
        (2, 2): "ZHZH", (2, 4): "Z^2HZH",
        (3, 1): "H", (3, 2): "H^2ZH",
        (4, 1): "H^2ZH^2", (4, 2): "HZ"},
}

# Readings that do evaluate to the indexed gate where the printed word does not.
TABLE_CORRECTIONS = {
    1: {(2, 2): "P^2X", (2, 3): "P^3X", (2, 4): "P^4X"},
    2: {(4, 1): "ZHZ"},
}

TABLE_GENERATORS = {1: ("P", "X"), 2: ("H", "Z")}


@dataclass
class TableReport:
    table: int
    subgroup: list[tuple[int, int]]
    cells: list[dict]

    @property
    def subgroup_matches(self) -> bool:
        return sorted(self.subgroup) == sorted(c["index"] for c in self.cells)

    @property
    def printed_mismatches(self) -> list[tuple[int, int]]:
        return [c["index"] for c in self.cells if not c["printed_ok"]]

    @property
    def passed(self) -> bool:
        return (self.subgroup_matches and len(self.subgroup) == 8
                and all(c["verified"] for c in self.cells))

    def to_json(self) -> dict:
        return {
            "table": self.table,
            "subgroup_size": len(self.subgroup),
            "subgroup": [list(i) for i in sorted(self.subgroup)],
            "subgroup_matches_cells": self.subgroup_matches,
            "cells": [dict(c, index=list(c["index"]), evaluates_to=list(c["evaluates_to"]))
                      for c in self.cells],
            "printed_mismatches": [list(i) for i in self.printed_mismatches],
            "passed": self.passed,
        }


def verify_table(table: int) -> TableReport:
    """Check every populated cell of a subgroup table.

    A cell verifies when its index lies in the subgroup generated by the
    table's generators and some recorded word for it evaluates to that
    index. Printed words that evaluate elsewhere are flagged in
    ``printed_ok`` and replaced by the reading in ``TABLE_CORRECTIONS``.
    """
    if table not in TABLE_WORDS:
        raise CliffordError(f"unknown table {table}")
    gens = [GENERATORS[g] for g in TABLE_GENERATORS[table]]
    group = {e.index for e in generate(gens)}
    cells = []
    for idx, word in sorted(TABLE_WORDS[table].items()):
        got = evaluate_word(parse_word(word)).index
        printed_ok = got == idx
        corrected = TABLE_CORRECTIONS[table].get(idx)
        used = word if printed_ok or corrected is None else corrected
        used_idx = evaluate_word(parse_word(used)).index
        cells.append({
            "index": idx, "word": word, "evaluates_to": got, "printed_ok": printed_ok,
            "word_used": used, "verified": used_idx == idx and idx in group,
        })
    return TableReport(table, sorted(group), cells)


S4_PROFILE = {1: 1, 2: 9, 3: 8, 4: 6}


@dataclass
class S4Report:
    size: int
    profile: dict[int, int]

    @property
    def passed(self) -> bool:
        return self.size == 24 and self.profile == S4_PROFILE

    def to_json(self) -> dict:
        return {"size": self.size, "order_profile": {str(k): v for k, v in sorted(self.profile.items())},
                "expected": {str(k): v for k, v in S4_PROFILE.items()}, "passed": self.passed}


def verify_s4_profile() -> S4Report:
    group = generate([H, P])
    profile = Counter(element_order(e) for e in group)
    return S4Report(len(group), dict(sorted(profile.items())))


def multiplication_table() -> dict[str, dict[str, str]]:
    elems = [a_matrix(i, j) for i, j in INDICES]
    return {str(a): {str(b): str(mul_mod_phase(a, b)) for b in elems} for a in elems}


__all__ = [
    "CliffordElement", "CliffordError", "GENERATORS", "H", "IDENTITY", "INDICES", "P", "X", "Z",
    "a_matrix", "canonicalize", "element", "element_order", "eq_mod_phase", "evaluate_word",
    "generate", "inverse", "mul_mod_phase", "multiplication_table", "parse_word",
    "verify_s4_profile", "verify_table",
]
