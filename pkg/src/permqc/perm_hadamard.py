"""Hadamard and phase flip realized purely by qubit permutations on 8 + 8 qubits."""
from __future__ import annotations

import cmath
import math
from dataclasses import dataclass

import numpy as np

from .clifford import CliffordElement, canonicalize, eq_mod_phase
from .states import (
    QubitPermutation,
    SparseState,
    apply_perm,
    compose,
    inner_product,
    make_excited,
    perm_from_cycles,
    superpose,
    tensor,
)

W = cmath.exp(1j * math.pi / 4)
HALF = 8

U = perm_from_cycles(HALF, [(1, 6), (2, 5), (3, 4), (7, 8)])
Q = perm_from_cycles(HALF, [(2, 6), (4, 8)])
R = perm_from_cycles(HALF, [(1, 7), (2, 6), (3, 5)])


def _row(coef) -> SparseState:
    return superpose([(coef(j), make_excited(HALF, [j])) for j in range(1, HALF + 1)])


@dataclass(frozen=True)
class PermHBasis:
    x0: SparseState
    x1: SparseState
    y0: SparseState
    y1: SparseState
    basis0: SparseState
    basis1: SparseState


def build_basis() -> PermHBasis:
    s8 = math.sqrt(HALF)

    def x(k):
        return _row(lambda j: W ** (5 * k) / s8 * W ** ((-1) ** k * (j - 1)))

    x0, x1 = x(0), x(1)
    y0 = _row(lambda j: (-W) ** (j - 1) / s8)
    y1 = x0.scale(W)
    a, b = tensor(x0, y0), tensor(x1, y1)
    basis0 = superpose([(1 / math.sqrt(2), a), (1 / math.sqrt(2), b)])
    basis1 = superpose([(1j / math.sqrt(2), a), (-1j / math.sqrt(2), b)])
    return PermHBasis(x0, x1, y0, y1, basis0, basis1)


def tensor_perm(first: QubitPermutation, second: QubitPermutation) -> QubitPermutation:
    """``first`` on qubits 1-8 and ``second`` on qubits 9-16."""
    return QubitPermutation(first.n + second.n,
                            first.image + tuple(first.n + t for t in second.image))


IDENTITY8 = QubitPermutation.identity(HALF)


def op_H() -> QubitPermutation:
    return tensor_perm(U, Q)


def op_Z() -> QubitPermutation:
    return tensor_perm(R, Q)


def op_X() -> QubitPermutation:
    return tensor_perm(compose(U, compose(R, U)), Q)


def op_Y() -> QubitPermutation:
    return tensor_perm(compose(U, compose(R, compose(U, R))), IDENTITY8)


@dataclass
class LogicalActionReport:
    matrix: np.ndarray
    residual: float
    fidelity: float
    clifford_index: tuple[int, int] | None

    @property
    def passed(self) -> bool:
        return self.residual < 1e-12 and abs(self.fidelity - 1) < 1e-12

    def to_json(self) -> dict:
        return {
            "matrix": [[[complex(v).real, complex(v).imag] for v in row] for row in self.matrix],
            "residual": self.residual,
            "fidelity": self.fidelity,
            "clifford_index": list(self.clifford_index) if self.clifford_index else None,
            "passed": self.passed,
        }


def logical_action(perm: QubitPermutation, basis: PermHBasis | None = None) -> tuple[np.ndarray, float]:
    """2x2 matrix of ``perm`` in the {basis0, basis1} frame and the leakage out of it."""
    basis = basis or build_basis()
    frame = (basis.basis0, basis.basis1)
    m = np.zeros((2, 2), dtype=complex)
    residual = 0.0
    for b, s in enumerate(frame):
        image = apply_perm(perm, s)
        for a, t in enumerate(frame):
            m[a, b] = inner_product(t, image)
        leftover = superpose([(1, image)] + [(-m[a, b], t) for a, t in enumerate(frame)])
        residual = max(residual, leftover.norm())
    return m, residual


def verify_logical_action(perm: QubitPermutation, target: np.ndarray,
                          basis: PermHBasis | None = None) -> LogicalActionReport:
    m, residual = logical_action(perm, basis)
    target = np.asarray(target, dtype=complex)
    fidelity = float(abs(np.trace(target.conj().T @ m)) / 2)
    try:
        index = canonicalize(m)
    except ValueError:
        index = None
    return LogicalActionReport(m, residual, min(fidelity, 1.0), index)


@dataclass
class GroupReport:
    elements: list[CliffordElement]
    words: dict[tuple[int, int], str]
    leaked: list[str]

    @property
    def indices(self) -> list[tuple[int, int]]:
        return sorted(e.index for e in self.elements)

    def to_json(self) -> dict:
        return {"size": len(self.elements),
                "elements": [{"index": list(i), "word": self.words[i]} for i in self.indices],
                "leaked": self.leaked}


def generated_group(gens: dict[str, QubitPermutation], basis: PermHBasis | None = None) -> GroupReport:
    """Close the named permutations under composition, tracking logical actions mod phase.

    Permutations are composed exactly; each new permutation is reduced to its
    logical 2x2 action and kept only if that action is new mod global phase.
    """
    basis = basis or build_basis()
    n = next(iter(gens.values())).n
    start = QubitPermutation.identity(n)
    found: dict[tuple[int, int], tuple[QubitPermutation, str]] = {}
    leaked: list[str] = []
    m, _ = logical_action(start, basis)
    found[canonicalize(m)] = (start, "")
    frontier = [(start, "")]
    while frontier:
        nxt = []
        for perm, word in frontier:
            for name, g in sorted(gens.items()):
                cand = compose(g, perm)
                cand_word = name + word
                m, residual = logical_action(cand, basis)
                if residual > 1e-12:
                    leaked.append(cand_word)
                    continue
                idx = canonicalize(m)
                if idx not in found:
                    found[idx] = (cand, cand_word)
                    nxt.append((cand, cand_word))
        frontier = nxt
    elements = []
    words = {}
    for idx, (perm, word) in sorted(found.items()):
        m, _ = logical_action(perm, basis)
        elements.append(CliffordElement(m, idx))
        words[idx] = word or "I"
    return GroupReport(elements, words, leaked)


def sufficient_conditions(basis: PermHBasis | None = None) -> dict[str, float]:
    """Deviations in U|x0> = |x1> and Q|y0> = w^-1 |y1>."""
    basis = basis or build_basis()
    ux0 = apply_perm(U, basis.x0) - basis.x1
    qy0 = apply_perm(Q, basis.y0) - basis.y1.scale(1 / W)
    return {"U_x0_minus_x1": ux0.norm(), "Q_y0_minus_winv_y1": qy0.norm()}


__all__ = [
    "PermHBasis", "Q", "R", "U", "W", "build_basis", "generated_group", "logical_action",
    "op_H", "op_X", "op_Y", "op_Z", "sufficient_conditions", "tensor_perm",
    "verify_logical_action", "eq_mod_phase",
]
